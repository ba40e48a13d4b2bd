"""Command-line front end.

    tpspace verify       --input space.json|kernel.json [--suite tps,lattice,...]
    tpspace reconstruct  --input kernel.json
    tpspace flow         --input flow.json [--csv trajectory.csv]
    tpspace spectral     --input function.json
    tpspace report-merge --input a.json b.json ...

Every command writes one JSON report (to ``--out`` or stdout) carrying the
seed it ran with.  Exit status: 0 all checks pass, 1 a check failed, 2 the
input could not be used.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import __version__
from ._backend import BACKEND
from .core import PureStateSpace, TransitionKernel, check_tps_axioms, kernel_from_points, sectors
from .cstar import check_cstar_axioms, pure_state_roundtrip
from .errors import InputError, TPSError
from .io import (
    function_from_json,
    function_to_json,
    kernel_from_json,
    load_json,
    ray_from_json,
    space_from_json,
    space_to_json,
    write_atomic,
    write_json,
    dumps,
)
from .lattice import SubspaceElement, basis_report, check_lattice_suite, check_two_sphere
from .poisson import (
    check_dual_bracket,
    check_flow_agreement,
    check_leibniz,
    check_unitarity,
    hamiltonian_flow,
    poisson_bracket,
    trajectory_csv,
)
from .reconstruct import ReconstructionConfig, reconstruct
from .reports import CheckRecord, Report
from .spectral import check_classical_pointwise, check_jb_axioms, random_observable, spectral_resolution

SUITES = ("tps", "two-sphere", "lattice", "bracket", "jordan", "roundtrip", "cstar")
DEFAULT_SUITES = ("tps", "two-sphere", "lattice", "bracket", "jordan", "roundtrip")
TRIALS = 20


def _tol(args, default):
    return default if args.tol is None else args.tol


def _kw(args):
    return {} if args.tol is None else {"tol": args.tol}


# verify -------------------------------------------------------------------


def _sample_points(space, rng, per_sector=4):
    pts = list(space.points)
    if pts:
        return pts
    for a, d in enumerate(space.sectors):
        pts.extend(space.basis_rays(a))
        pts.extend(space.random_ray(rng, a) for _ in range(per_sector if d > 1 else 0))
    return pts


def _suite_tps(space, rng, args):
    K = kernel_from_points(space.with_points(_sample_points(space, rng)))
    rep = check_tps_axioms(K, **_kw(args))
    family = [r for a in range(len(space.sectors)) for r in space.basis_rays(a)]
    br = basis_report(family, SubspaceElement.unit(space), samples=TRIALS, rng=rng)
    # the rank and sum criteria must both hold, and so agree
    worst = 0.0 if br.is_basis else 1.0
    rep.add(CheckRecord.from_violation("basis_criteria", worst, 0.0, TRIALS, sum_deviation=br.max_sum_deviation))
    return rep


def _suite_two_sphere(space, rng, args):
    rep = Report("two-sphere")
    quantum = [a for a, d in enumerate(space.sectors) if d > 1]
    if not quantum:
        rep.meta["note"] = "no sector of dimension > 1: planes do not exist"
        return rep
    worst = 0.0
    for k in range(TRIALS):
        a = quantum[k % len(quantum)]
        rho, sigma = space.random_ray(rng, a), space.random_ray(rng, a)
        worst = max(worst, check_two_sphere(rho, sigma, 25, rng, **_kw(args)).max_violation)
    rep.add(CheckRecord.from_violation("two_sphere", worst, _tol(args, 1e-10), TRIALS * 25))
    return rep


def _suite_lattice(space, rng, args):
    return check_lattice_suite(space, TRIALS, rng, **_kw(args))


def _suite_bracket(space, rng, args):
    if any(d > 1 for d in space.sectors):
        return check_dual_bracket(space, TRIALS * 2, rng, **_kw(args))
    rep = Report("dual-bracket", meta={"note": "classical space: every bracket vanishes"})
    worst = 0.0
    for _ in range(TRIALS):
        pb = poisson_bracket(random_observable(space, rng), random_observable(space, rng))
        worst = max(worst, pb.norm())
    rep.add(CheckRecord.from_violation("bracket_vanishes", worst, _tol(args, 1e-12), TRIALS))
    return rep


def _suite_jordan(space, rng, args):
    rep = check_jb_axioms(space, TRIALS, rng, **_kw(args))
    if 1 in space.sectors:
        rep.add(check_classical_pointwise(space, TRIALS, rng, **_kw(args)))
    return rep


def _suite_roundtrip(space, rng, args):
    return pure_state_roundtrip(space, TRIALS, rng, **_kw(args))


def _suite_cstar(space, rng, args):
    return check_cstar_axioms(space, TRIALS // 2, rng, **_kw(args))


SUITE_RUNNERS = {
    "tps": _suite_tps,
    "two-sphere": _suite_two_sphere,
    "lattice": _suite_lattice,
    "bracket": _suite_bracket,
    "jordan": _suite_jordan,
    "roundtrip": _suite_roundtrip,
    "cstar": _suite_cstar,
}


def _parse_suites(text, allowed):
    if text is None:
        return None
    names = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in names if s not in allowed]
    if bad or not names:
        raise InputError(f"unknown suite(s) {bad}; choose from {', '.join(allowed)}")
    return names


def cmd_verify(args):
    doc = load_json(args.input)
    rng = np.random.default_rng(args.seed)
    report = Report("verify")
    if isinstance(doc, dict) and "p" in doc and "sectors" not in doc:
        K = kernel_from_json(doc)
        names = _parse_suites(args.suite, ("tps",)) or ["tps"]
        report.meta["input_kind"] = "kernel"
        report.extend(check_tps_axioms(K, **_kw(args)), prefix="tps.")
        if not report.failures:
            report.meta["sectors"] = sectors(K)
    else:
        space = space_from_json(doc)
        names = _parse_suites(args.suite, SUITES) or list(DEFAULT_SUITES)
        report.meta["input_kind"] = "space"
        report.meta["space_sectors"] = list(space.sectors)
        for name in names:
            report.extend(SUITE_RUNNERS[name](space, rng, args), prefix=f"{name}.")
    report.meta["suites"] = names
    for r in report.records:
        if not r.passed:
            print(
                f"verify: axiom {r.name} violated "
                f"(max violation {r.violation:.3g} > tolerance {r.tolerance:.3g})",
                file=sys.stderr,
            )
    return report


# reconstruct --------------------------------------------------------------


def cmd_reconstruct(args):
    K = kernel_from_json(load_json(args.input))
    axioms = check_tps_axioms(K)
    if not axioms.passed:
        raise InputError(f"kernel violates {', '.join(axioms.failures)}; reconstruction needs a valid kernel")
    cfg = ReconstructionConfig(seed=args.seed, tolerance=_tol(args, ReconstructionConfig.tolerance))
    rec = reconstruct(K, cfg)
    report = Report("reconstruct")
    for a, (idx, res) in enumerate(zip(rec.blocks, rec.results)):
        report.add(
            CheckRecord.from_violation(
                f"sector_{a}.residual", res.residual, cfg.tolerance, len(idx),
                points=list(idx), converged=res.converged,
            )
        )
    report.meta["results"] = [dict(r.to_dict(), points=list(i)) for i, r in zip(rec.blocks, rec.results)]
    report.meta["ranks"] = [r.rank for r in rec.results]
    report.meta["converged"] = rec.converged
    report.meta["residual"] = rec.residual(K)
    report.meta["space"] = space_to_json(rec.space)
    return report


# flow ---------------------------------------------------------------------


def cmd_flow(args):
    doc = load_json(args.input)
    space = space_from_json(_field(doc, "space"))
    H = function_from_json(_field(doc, "hamiltonian"), space)
    rho0 = space.validate_ray(ray_from_json(_field(doc, "initial")))
    t = float(doc.get("t", 1.0))
    method = doc.get("method", "exact")
    if method not in ("exact", "rk4"):
        raise InputError(f"unknown flow method {method!r}")
    steps = doc.get("steps")
    if steps is not None and int(steps) < 1:
        raise InputError("steps must be a positive integer")
    rng = np.random.default_rng(args.seed)
    if "partner" in doc:
        sigma0 = space.validate_ray(ray_from_json(doc["partner"]))
        if sigma0.sector != rho0.sector:
            raise InputError("partner must lie in the sector of the initial point")
    else:
        sigma0 = space.random_ray(rng, rho0.sector)
    traj = hamiltonian_flow(H, rho0, t, steps, method)
    partner = hamiltonian_flow(H, sigma0, t, len(traj) - 1, method) if t != 0 else hamiltonian_flow(H, sigma0, 0.0)
    report = Report("flow")
    report.extend(check_unitarity(H, rho0, sigma0, t, len(traj) - 1, method, args.tol) if t != 0 else _static_unitarity(), "")
    if method == "rk4" and t != 0:
        report.add(check_flow_agreement(H, rho0, t, len(traj) - 1))
    f, g = random_observable(space, rng), random_observable(space, rng)
    report.extend(check_leibniz(H, f, g, TRIALS, rng, **_kw(args)))
    report.meta.update(
        t=t, method=method, steps=len(traj) - 1, chart_switches=traj.chart_switches,
        final={"re": [float(x) for x in traj.vectors[-1].real], "im": [float(x) for x in traj.vectors[-1].imag]},
    )
    if args.csv:
        write_atomic(args.csv, trajectory_csv(traj, partner))
        report.meta["csv"] = args.csv
    return report


def _static_unitarity():
    return Report("unitarity", [CheckRecord.from_violation("unitarity_t0", 0.0, 0.0, 1)])


def _field(doc, key):
    if not isinstance(doc, dict) or key not in doc:
        raise InputError(f"flow document needs a {key!r} field")
    return doc[key]


# spectral -----------------------------------------------------------------


def cmd_spectral(args):
    doc = load_json(args.input)
    space = space_from_json(_field(doc, "space"))
    f = function_from_json(_field(doc, "function"), space)
    res = spectral_resolution(f)
    rng = np.random.default_rng(args.seed)
    probes = [r for _, r in f.terms] + [space.random_ray(rng) for _ in range(50)]
    pointwise = max(abs(f(s) - res(s)) for s in probes)
    report = Report("spectral")
    report.add(CheckRecord.from_violation("pointwise_reconstruction", pointwise, _tol(args, 1e-9), len(probes)))
    report.add(CheckRecord.from_violation("completeness", res.completeness_error(), _tol(args, 1e-10)))
    report.add(CheckRecord.from_violation("orthogonality", res.orthogonality_error(), _tol(args, 1e-10)))
    report.meta["resolution"] = res.to_dict()
    report.meta["function"] = function_to_json(f.simplified())
    return report


# report-merge -------------------------------------------------------------


def cmd_report_merge(args):
    docs = [load_json(p) for p in args.input]
    for p, d in zip(args.input, docs):
        if not isinstance(d, dict) or "pass" not in d or "checks" not in d:
            raise InputError(f"{p} is not a report")
    merged = {
        "suite": "merged",
        "pass": all(bool(d["pass"]) for d in docs),
        "seed": args.seed,
        "sources": list(args.input),
        "reports": docs,
    }
    return merged


# entry point --------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="tpspace", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, many=False):
        if many:
            p.add_argument("--input", nargs="+", required=True, help="report files to merge")
        else:
            p.add_argument("--input", required=True, help="JSON input document")
        p.add_argument("--seed", type=int, default=0, help="seed for every randomized check")
        p.add_argument("--tol", type=float, default=None, help="override every check tolerance")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        return p

    v = common(sub.add_parser("verify", help="run axiom checks on a space or kernel"))
    v.add_argument("--suite", default=None, help=f"comma-separated subset of: {', '.join(SUITES)}")
    common(sub.add_parser("reconstruct", help="find minimal-rank rays for a kernel"))
    f = common(sub.add_parser("flow", help="integrate a Hamiltonian flow"))
    f.add_argument("--csv", default=None, help="write the trajectory as CSV")
    common(sub.add_parser("spectral", help="spectral resolution of a function"))
    common(sub.add_parser("report-merge", help="combine reports into one"), many=True)
    return parser


COMMANDS = {
    "verify": cmd_verify,
    "reconstruct": cmd_reconstruct,
    "flow": cmd_flow,
    "spectral": cmd_spectral,
    "report-merge": cmd_report_merge,
}


def _emit(doc, out):
    if out:
        write_json(out, doc)
    else:
        sys.stdout.write(dumps(doc))


def main(argv=None):
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        result = COMMANDS[args.command](args)
    except (TPSError, ValueError) as exc:
        print(f"tpspace {args.command}: {exc}", file=sys.stderr)
        return 2
    if isinstance(result, Report):
        result.meta = {
            "command": args.command,
            "seed": args.seed,
            "input": args.input,
            "tolerance_override": args.tol,
            "version": __version__,
            "backend": BACKEND,
            **result.meta,
            "timing": {"elapsed_s": round(time.perf_counter() - start, 6)},
        }
        doc = result.to_dict()
    else:
        doc = result
    _emit(doc, args.out)
    return 0 if doc["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
