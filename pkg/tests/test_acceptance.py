"""Acceptance criteria, one test each, at the stated tolerances and budgets."""

import time
from pathlib import Path

import numpy as np
import pytest

from tpspace import PureStateSpace, kernel_from_points, transition_probability
from tpspace.cli import main
from tpspace.cstar import StateFunctional, check_cstar_axioms, mtp_infimum_check, tp_from_state_norm
from tpspace.lattice import SubspaceElement, check_lattice_suite, check_two_sphere
from tpspace.poisson import (
    check_associator,
    check_dual_bracket,
    check_flow_agreement,
    check_leibniz,
    check_square_covariance,
    check_unitarity,
    default_steps,
    random_bounded_hamiltonian,
)
from tpspace.reconstruct import ReconstructionConfig, reconstruct
from tpspace.sampling import random_unit_vector
from tpspace.spectral import check_classical_pointwise, check_jb_axioms, random_observable, spectral_resolution

DATA = Path(__file__).resolve().parents[1] / "data"
SEED = 2026


def test_transition_probability_triple_agreement(criterion):
    rng = np.random.default_rng(SEED)
    space = PureStateSpace((2, 3, 4))
    start = time.perf_counter()
    norm_gap = attain = below = 0.0
    for _ in range(200):
        a = int(rng.integers(3))
        rho, sigma = space.random_ray(rng, a), space.random_ray(rng, a)
        p = transition_probability(rho, sigma)
        pn = tp_from_state_norm(StateFunctional.from_ray(space, rho), StateFunctional.from_ray(space, sigma))
        norm_gap = max(norm_gap, abs(pn - p))
        rep = mtp_infimum_check(rho, sigma, space, trials=100, rng=rng)
        attain = max(attain, rep["attainment"].violation)
        below = max(below, rep["lower_bound"].violation, rep["feasibility"].violation)
    elapsed = time.perf_counter() - start
    ok = norm_gap < 1e-9 and attain < 1e-9 and below <= 1e-10 and elapsed < 30
    criterion(1, "transition-probability triple agreement", ok,
              f"norm {norm_gap:.1e}, infimum {attain:.1e}, below {below:.1e}, {elapsed:.1f}s")
    assert ok


def test_two_sphere_property(criterion):
    rng = np.random.default_rng(SEED)
    space = PureStateSpace((2, 3, 4))
    worst = 0.0
    total = 0
    for _ in range(50):
        a = int(rng.integers(3))
        rho, sigma = space.random_ray(rng, a), space.random_ray(rng, a)
        rep = check_two_sphere(rho, sigma, samples=10, rng=rng)
        worst = max(worst, rep.max_violation)
        total += 10
    ok = total == 500 and worst < 1e-10
    criterion(2, "two-sphere property", ok, f"{total} pairs, max {worst:.1e}")
    assert ok


def test_spectral_theorem(criterion):
    rng = np.random.default_rng(SEED)
    space = PureStateSpace((2, 3))
    unit = SubspaceElement.unit(space)
    pointwise = complete = 0.0
    for _ in range(100):
        f = random_observable(space, rng, max_terms=5)
        res = spectral_resolution(f)
        complete = max(complete, res.completeness_error(), res.orthogonality_error())
        for _ in range(10):
            s = unit.random_ray(rng)
            pointwise = max(pointwise, abs(res(s) - f(s)))
            complete = max(complete, abs(sum(Q.p_value(s) for Q in res.projections) - 1.0))
    ok = pointwise < 1e-9 and complete < 1e-10
    criterion(3, "spectral theorem", ok, f"pointwise {pointwise:.1e}, completeness {complete:.1e}")
    assert ok


def test_jordan_structure(criterion):
    rng = np.random.default_rng(SEED)
    rep = check_jb_axioms(PureStateSpace((2, 3)), trials=100, rng=rng, tol=1e-8)
    cls = check_classical_pointwise(PureStateSpace.classical(5), trials=100, rng=rng)
    mixed = check_classical_pointwise(PureStateSpace((1, 3, 1)), trials=100, rng=rng)
    ok = rep.passed and cls.violation == 0.0 and mixed.violation == 0.0
    criterion(4, "Jordan structure", ok,
              f"JB max {rep.max_violation:.1e}, classical {max(cls.violation, mixed.violation):.1e}")
    assert ok, rep.failures


def test_bracket_consistency(criterion):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for d in (2, 3, 4):
        for hbar in (0.5, 1.0, 2.0):
            rep = check_dual_bracket(PureStateSpace((d,), (hbar,)), samples=100, rng=rng, tol=1e-6)
            worst = max(worst, rep.max_violation)
    ok = worst < 1e-6
    criterion(5, "bracket consistency", ok, f"max relative {worst:.1e}")
    assert ok


def test_unitarity_and_leibniz(criterion):
    rng = np.random.default_rng(SEED)
    exact = rk4 = agree = leib = cov = 0.0
    min_steps = None
    for d in (2, 3, 4):
        space = PureStateSpace((d,), (float(rng.uniform(0.5, 2.0)),))
        for _ in range(3):
            H = random_bounded_hamiltonian(space, rng)
            t = float(rng.uniform(-10, 10))
            rho, sigma = space.random_ray(rng, 0), space.random_ray(rng, 0)
            exact = max(exact, check_unitarity(H, rho, sigma, t, method="exact").max_violation)
            steps = max(1000, default_steps(H, 0, t))
            min_steps = steps if min_steps is None else min(min_steps, steps)
            rk4 = max(rk4, check_unitarity(H, rho, sigma, t, steps, method="rk4").max_violation)
            agree = max(agree, check_flow_agreement(H, rho, t, steps).violation)
            f, g = random_observable(space, rng), random_observable(space, rng)
            leib = max(leib, check_leibniz(H, f, g, 20, rng).max_violation)
            cov = max(cov, check_square_covariance(H, f, t, 20, rng).violation)
    ok = exact < 1e-12 and rk4 < 1e-6 and agree < 1e-6 and leib < 1e-8 and cov < 1e-10 and min_steps >= 1000
    criterion(6, "unitarity and Leibniz", ok,
              f"exact {exact:.1e}, rk4 {max(rk4, agree):.1e}, Leibniz {leib:.1e}, covariance {cov:.1e}")
    assert ok


def test_associator_and_cstar(criterion):
    rng = np.random.default_rng(SEED)
    space = PureStateSpace((2, 3, 1), (0.5, 2.0, 1.0))
    assoc = 0.0
    for _ in range(20):
        f, g, h = (random_observable(space, rng) for _ in range(3))
        assoc = max(assoc, check_associator(f, g, h, 10, rng).max_violation)
    rep = check_cstar_axioms(space, trials=50, rng=rng)
    ok = (
        assoc < 1e-8
        and rep["associativity"].violation < 1e-9
        and rep["cstar_identity"].violation < 1e-9
        and rep["hbar_independence"].violation < 1e-12
        and rep.passed
    )
    criterion(7, "associator and C*-product", ok,
              f"associator {assoc:.1e}, assoc {rep['associativity'].violation:.1e}, "
              f"C* {rep['cstar_identity'].violation:.1e}, hbar {rep['hbar_independence'].violation:.1e}")
    assert ok, rep.failures


def test_lattice_suite(criterion):
    rng = np.random.default_rng(SEED)
    needed = ("orthomodular_law", "de_morgan", "double_complement", "covering", "sasaki_factorization")
    worst = dict.fromkeys(needed, 0.0)
    seen = set()
    ok = True
    for dims in [(5,), (2, 3), (1, 4), (2, 2, 1)]:
        rep = check_lattice_suite(PureStateSpace(dims), trials=100, rng=rng, tol=1e-9)
        ok &= rep.passed
        for rec in rep.records:
            for key in needed:
                if rec.name == key:
                    seen.add(key)
                    worst[key] = max(worst[key], rec.violation)
    ok = ok and seen == set(needed) and all(v < 1e-9 for v in worst.values())
    criterion(8, "lattice suite", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok


# Fixed grid; every (d, n) with n rays in C^d, d <= 4, n <= 12.
GRID = [(d, n) for d in (1, 2, 3, 4) for n in (4, 8, 12)]


def test_reconstruction_round_trip(criterion):
    rng = np.random.default_rng(SEED)
    cfg = ReconstructionConfig(restarts=20, seed=SEED)
    failures = []
    slowest = 0.0
    worst = 0.0
    for d, n in GRID:
        pts = [PureStateSpace((d,)).random_ray(rng, 0) for _ in range(n)]
        K = kernel_from_points(PureStateSpace((d,), points=pts))
        start = time.perf_counter()
        rec = reconstruct(K, cfg)
        elapsed = time.perf_counter() - start
        slowest = max(slowest, elapsed)
        res = rec.residual(K)
        worst = max(worst, res)
        ranks = [r.rank for r in rec.results]
        if not (res < 1e-7 and ranks == [d] and elapsed < 60):
            failures.append(f"(d={d}, n={n}: ranks {ranks}, residual {res:.1e}, {elapsed:.0f}s)")
    ok = not failures
    detail = f"{len(GRID)} instances, max residual {worst:.1e}, slowest {slowest:.1f}s"
    if failures:
        detail += "; failed " + " ".join(failures)
    criterion(9, "reconstruction round trip", ok, detail)
    assert ok, failures


def test_end_to_end_cli(criterion, tmp_path, capsys):
    good = main(["verify", "--input", str(DATA / "space_c2_c3.json"), "--out", str(tmp_path / "a.json")])
    bad = main(["verify", "--input", str(DATA / "kernel_corrupted_asymmetric.json"), "--out", str(tmp_path / "b.json")])
    err = capsys.readouterr().err
    ok = good == 0 and bad == 1 and "symmetry" in err
    criterion(10, "end-to-end CLI", ok, f"example exit {good}, corrupted exit {bad}, stderr {err.strip()!r}")
    assert ok
