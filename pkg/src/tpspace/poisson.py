"""Fubini-Study Poisson structure on each sector, Hamiltonian flows, and the
compatibility laws between the bracket, the Jordan product and transition
probabilities.

Conventions: ``{f, g}(rho) = i <rho, (AB - BA) rho> / hbar(rho)`` and the
flow of ``H`` is ``psi(t) = exp(-i t A / hbar) psi``, so that
``d/dt f(rho(t)) = {H, f}(rho(t))``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from ._backend import FS_NORMALIZATION, kernels
from .core import Ray, transition_probability
from .errors import ChartError, IntegrationError, PreconditionError
from .reports import CheckRecord, Report
from .sampling import as_rng, random_hermitian
from .spectral import ObservableFunction, jordan, random_observable, square

PIVOT_TOL = 1e-12
FD_STEP = 1e-5
# switch charts once some coordinate is twice the pivot component
CHART_SWITCH_MODULUS = 2.0
MAX_CHART_SWITCHES = 10_000
MIN_STEPS = 1000
RK4_PHASE_STEP = 0.01


# charts -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChartPoint:
    """Affine coordinates of a ray: representative with component ``pivot`` set to 1."""

    sector: int
    pivot: int
    coords: np.ndarray

    @classmethod
    def from_ray(cls, ray, pivot=None):
        v = ray.vector
        best = int(np.argmax(np.abs(v)))
        if pivot is None:
            pivot = best
        if abs(v[pivot]) <= PIVOT_TOL:
            raise ChartError(f"component {pivot} of the ray vanishes", suggested_pivot=best)
        z = np.delete(v / v[pivot], pivot)
        return cls(ray.sector, int(pivot), z)

    @property
    def dim(self):
        return self.coords.shape[0] + 1

    def representative(self):
        return np.insert(np.asarray(self.coords, dtype=complex), self.pivot, 1.0)

    def to_ray(self):
        return Ray.from_vector(self.representative(), self.sector)


def chart_derivatives(f, cp, method="analytic", step=FD_STEP):
    """Holomorphic derivatives ``df/dz_j`` of ``f`` in the chart of ``cp``.

    ``analytic`` differentiates each term ``c |<rho, psi>|^2 / |psi|^2``;
    ``fd`` uses central differences of ``f`` itself along Re z_j and Im z_j.
    Neither touches commutators.
    """
    z = np.asarray(cp.coords, dtype=complex)
    m = z.shape[0]
    if method == "fd":
        def val(zz):
            return f(ChartPoint(cp.sector, cp.pivot, zz).to_ray())

        out = np.empty(m, dtype=complex)
        for j in range(m):
            e = np.zeros(m, dtype=complex)
            e[j] = step
            dx = (val(z + e) - val(z - e)) / (2 * step)
            dy = (val(z + 1j * e) - val(z - 1j * e)) / (2 * step)
            out[j] = 0.5 * (dx - 1j * dy)
        return out
    if method != "analytic":
        raise ValueError(f"unknown derivative method {method!r}")
    psi = cp.representative()
    norm2 = float(np.vdot(psi, psi).real)
    out = np.zeros(psi.shape[0], dtype=complex)
    for c, r in f.terms:
        if r.sector != cp.sector:
            continue
        amp = np.vdot(r.vector, psi)
        out += c * (r.vector.conj() * amp.conjugate() / norm2 - abs(amp) ** 2 * psi.conj() / norm2 ** 2)
    return np.delete(out, cp.pivot)


def fs_poisson_tensor(z):
    """Inverse Fubini-Study metric ``(1 + |z|^2)(I + z z^H)`` in affine coordinates."""
    z = np.asarray(z, dtype=complex)
    return (1.0 + float(np.vdot(z, z).real)) * (np.eye(z.shape[0]) + np.outer(z, z.conj()))


def _raw_chart_bracket(df, dg, z):
    W = fs_poisson_tensor(z)
    val = 1j * (df @ W @ dg.conj() - dg @ W @ df.conj())
    return float(val.real)


def chart_bracket(f, g, rho, hbar=None, method="analytic", normalization=None):
    """Poisson bracket from the Fubini-Study symplectic form in affine coordinates.

    ``rho`` may be a :class:`ChartPoint` or a :class:`Ray` (charted at its
    largest component).
    """
    cp = rho if isinstance(rho, ChartPoint) else ChartPoint.from_ray(rho)
    if hbar is None:
        hbar = f.space.hbar[cp.sector]
    kappa = FS_NORMALIZATION if normalization is None else normalization
    if cp.coords.shape[0] == 0:
        return 0.0
    df = chart_derivatives(f, cp, method)
    dg = chart_derivatives(g, cp, method)
    return kappa * _raw_chart_bracket(df, dg, cp.coords) / hbar


def fit_fs_normalization(samples=50, rng=None):
    """Least-squares ratio between ``i<[A,B]>`` and the unnormalized chart form on CP^1."""
    from .core import PureStateSpace

    rng = as_rng(rng)
    space = PureStateSpace((2,))
    num = den = 0.0
    for _ in range(samples):
        f, g = random_observable(space, rng), random_observable(space, rng)
        rho = space.random_ray(rng)
        ref = commutator_bracket(f, g, rho)
        raw = chart_bracket(f, g, rho, hbar=1.0, normalization=1.0)
        num += ref * raw
        den += raw * raw
    return num / den


# brackets from operators ------------------------------------------------


def commutator_blocks(f, g, scaled=True):
    """Blocks ``i(AB - BA)/hbar`` (``scaled``) or ``i(AB - BA)``."""
    out = []
    for a, (A, B) in enumerate(zip(f.blocks(), g.blocks())):
        C = 1j * (A @ B - B @ A)
        out.append(C / f.space.hbar[a] if scaled else C)
    return out


def commutator_bracket(f, g, rho):
    """``{f, g}(rho) = i <rho, [A, B] rho> / hbar``."""
    A = f.blocks()[rho.sector]
    B = g.blocks()[rho.sector]
    v = rho.vector
    val = 1j * np.vdot(v, (A @ B - B @ A) @ v)
    return float(val.real) / f.space.hbar[rho.sector]


def poisson_bracket(f, g):
    """``{f, g}`` as an observable function."""
    return ObservableFunction.from_blocks(f.space, commutator_blocks(f, g, scaled=True))


def lie_bracket(f, g):
    """Rescaled bracket ``[f, g] = hbar {f, g}``, independent of hbar."""
    return ObservableFunction.from_blocks(f.space, commutator_blocks(f, g, scaled=False))


def fit_hbar(samples):
    """Per-sector hbar from ``(sector, reference, observed)`` bracket samples.

    ``reference`` is the hbar = 1 value ``i<[A,B]>``; the fit is the least
    squares scalar ``observed ~ reference / hbar``.
    """
    sums = {}
    for sector, ref, obs in samples:
        num, den = sums.get(sector, (0.0, 0.0))
        sums[sector] = (num + ref * obs, den + ref * ref)
    return {a: den / num for a, (num, den) in sorted(sums.items())}


def bracket_samples(space, bracket, n=20, rng=None):
    """Sample ``bracket(f, g, rho)`` against the hbar = 1 commutator value."""
    rng = as_rng(rng)
    unit = space.with_hbar((1.0,) * len(space.sectors))
    out = []
    for a, d in enumerate(space.sectors):
        if d < 2:
            continue
        for _ in range(n):
            f = random_observable(space, rng)
            g = random_observable(space, rng)
            rho = space.random_ray(rng, a)
            f1, g1 = ObservableFunction(unit, f.terms), ObservableFunction(unit, g.terms)
            out.append((a, commutator_bracket(f1, g1, rho), bracket(f, g, rho)))
    return out


# flows ------------------------------------------------------------------


@dataclass
class Trajectory:
    times: np.ndarray
    vectors: np.ndarray
    sector: int
    label: str = ""
    chart_switches: int = 0

    @property
    def points(self):
        return [Ray.from_vector(v, self.sector) for v in self.vectors]

    def __len__(self):
        return len(self.times)

    @property
    def final(self):
        return Ray.from_vector(self.vectors[-1], self.sector)


def _flow_setup(H, rho0):
    H.space.validate_ray(rho0)
    A = np.ascontiguousarray(H.blocks()[rho0.sector], dtype=complex)
    return A, H.space.hbar[rho0.sector]


def exact_propagator(H, sector, t):
    A = H.blocks()[sector]
    return expm(-1j * t * A / H.space.hbar[sector])


def default_steps(H, sector, t):
    """At least ``MIN_STEPS``; more when ``|t| * spread(A) / hbar`` is large.

    Keeps ``spread * dt / hbar <= RK4_PHASE_STEP`` so the RK4 phase error per
    step, about ``(spread dt / hbar)^5 / 120``, stays negligible.
    """
    w = np.linalg.eigvalsh(H.blocks()[sector])
    spread = float(w[-1] - w[0]) / H.space.hbar[sector] if w.size else 0.0
    return max(MIN_STEPS, int(np.ceil(abs(t) * spread / RK4_PHASE_STEP)))


def hamiltonian_flow(H, rho0, t, steps=None, method="exact", label=""):
    """Hamiltonian curve of ``H`` through ``rho0`` on ``steps + 1`` equally spaced times.

    ``exact`` projects ``exp(-i t A / hbar) psi``; ``rk4`` integrates the
    Hamiltonian vector field in affine charts, switching pivot whenever a
    coordinate grows past ``CHART_SWITCH_MODULUS``.  ``steps=None`` picks
    :func:`default_steps`.
    """
    A, hbar = _flow_setup(H, rho0)
    if t == 0:
        return Trajectory(np.zeros(1), rho0.vector[None, :].copy(), rho0.sector, label)
    if steps is None:
        steps = default_steps(H, rho0.sector, t)
    if steps < 1:
        raise PreconditionError("need at least one step")
    times = np.linspace(0.0, t, steps + 1)
    if A.shape[0] == 1:
        # a one-point leaf: the flow only rotates the global phase of the representative
        return Trajectory(times, np.repeat(rho0.vector[None, :], steps + 1, axis=0), rho0.sector, label)
    if method == "exact":
        w, U = np.linalg.eigh(A)
        c0 = U.conj().T @ rho0.vector
        phases = np.exp(-1j * np.outer(times, w) / hbar)
        vecs = (phases * c0) @ U.T
        return Trajectory(times, vecs, rho0.sector, label)
    if method != "rk4":
        raise ValueError(f"unknown flow method {method!r}")
    dt = t / steps
    d = A.shape[0]
    vecs = np.empty((steps + 1, d), dtype=complex)
    vecs[0] = rho0.vector
    done = 0
    switches = 0
    cp = ChartPoint.from_ray(rho0)
    while done < steps:
        seg = kernels.rk4_segment(
            A, np.ascontiguousarray(cp.coords, dtype=complex), cp.pivot, hbar, dt,
            steps - done, CHART_SWITCH_MODULUS,
        )
        if not np.all(np.isfinite(seg)):
            raise IntegrationError("non-finite chart coordinates")
        reps = np.insert(seg[1:], cp.pivot, 1.0, axis=1)
        reps /= np.linalg.norm(reps, axis=1)[:, None]
        vecs[done + 1: done + len(seg)] = reps
        done += len(seg) - 1
        if done < steps:
            switches += 1
            if switches > MAX_CHART_SWITCHES:
                raise IntegrationError("too many chart switches")
            cp = ChartPoint.from_ray(Ray(rho0.sector, vecs[done]))
    return Trajectory(times, vecs, rho0.sector, label, switches)


def trajectory_csv(traj, partner=None):
    """CSV text: ``t, re..., im..., unitarity_dev``.

    ``partner`` is a second trajectory on the same time grid; the last column
    is then ``|p(rho(t), sigma(t)) - p(rho(0), sigma(0))|`` (else 0).
    """
    d = traj.vectors.shape[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"re_{i}" for i in range(d)] + [f"im_{i}" for i in range(d)] + ["unitarity_dev"])
    p0 = None
    if partner is not None:
        p0 = abs(np.vdot(traj.vectors[0], partner.vectors[0])) ** 2
    for k, t in enumerate(traj.times):
        v = traj.vectors[k]
        dev = 0.0
        if partner is not None:
            dev = abs(abs(np.vdot(v, partner.vectors[k])) ** 2 - p0)
        w.writerow([repr(float(t))] + [repr(float(x)) for x in v.real] + [repr(float(x)) for x in v.imag] + [repr(float(dev))])
    return buf.getvalue()


# compatibility checks -----------------------------------------------------


def check_unitarity(H, rho0, sigma0, t, steps=None, method="exact", tol=None):
    """Max over the time grid of ``|p(rho(t), sigma(t)) - p(rho, sigma)|``."""
    if rho0.sector != sigma0.sector:
        raise PreconditionError("unitarity compares rays in one sector")
    if tol is None:
        tol = 1e-12 if method == "exact" else 1e-6
    if steps is None:
        steps = default_steps(H, rho0.sector, t)
    a = hamiltonian_flow(H, rho0, t, steps, method)
    b = hamiltonian_flow(H, sigma0, t, steps, method)
    p0 = transition_probability(rho0, sigma0)
    ov = np.abs(np.einsum("ij,ij->i", a.vectors.conj(), b.vectors)) ** 2
    dev = float(np.max(np.abs(ov - p0)))
    return Report(
        "unitarity",
        [CheckRecord.from_violation(f"unitarity_{method}", dev, tol, len(a), chart_switches=a.chart_switches + b.chart_switches)],
    )


def check_flow_agreement(H, rho0, t, steps=None, tol=1e-6):
    """RK4 and exact flows agree at the final time (1 - |<psi, phi>|^2)."""
    b = hamiltonian_flow(H, rho0, t, steps, "rk4")
    a = hamiltonian_flow(H, rho0, t, len(b) - 1, "exact")
    dev = 1.0 - abs(np.vdot(a.vectors[-1], b.vectors[-1])) ** 2
    return CheckRecord.from_violation("rk4_vs_exact", max(dev, 0.0), tol, len(b) - 1)


def _rays_for(space, samples, rng, sectors=None):
    if sectors is None:
        return [space.random_ray(rng) for _ in range(samples)]
    return [space.random_ray(rng, sectors[k % len(sectors)]) for k in range(samples)]


def check_leibniz(H, f, g, samples=50, rng=None, tol=1e-8):
    """``{H, f o g} = {H, f} o g + f o {H, g}`` at random rays."""
    rng = as_rng(rng)
    lhs = poisson_bracket(H, jordan(f, g))
    rhs = jordan(poisson_bracket(H, f), g) + jordan(f, poisson_bracket(H, g))
    worst = max(abs(lhs(s) - rhs(s)) for s in _rays_for(H.space, samples, rng))
    return Report("leibniz", [CheckRecord.from_violation("leibniz", worst, tol, samples)])


def check_associator(f, g, h, samples=50, rng=None, tol=1e-8):
    """Associator identity with ``k = hbar^2/4`` for ``{,}`` and ``k = 1/4`` for ``[,]``."""
    rng = as_rng(rng)
    space = f.space
    lhs = jordan(jordan(f, g), h) - jordan(f, jordan(g, h))
    raw = poisson_bracket(poisson_bracket(f, h), g)
    resc = lie_bracket(lie_bracket(f, h), g)
    w_raw = w_resc = 0.0
    for s in _rays_for(space, samples, rng):
        k = space.hbar[s.sector] ** 2 / 4.0
        left = lhs(s)
        w_raw = max(w_raw, abs(left - k * raw(s)))
        w_resc = max(w_resc, abs(left - 0.25 * resc(s)))
    return Report(
        "associator",
        [
            CheckRecord.from_violation("associator_hbar2_over_4", w_raw, tol, samples),
            CheckRecord.from_violation("associator_rescaled_quarter", w_resc, tol, samples),
        ],
    )


def check_jacobi(f, g, h, samples=50, rng=None, tol=1e-9):
    rng = as_rng(rng)
    J = (
        poisson_bracket(f, poisson_bracket(g, h))
        + poisson_bracket(g, poisson_bracket(h, f))
        + poisson_bracket(h, poisson_bracket(f, g))
    )
    worst = max(abs(J(s)) for s in _rays_for(f.space, samples, rng))
    anti = max(
        abs(commutator_bracket(f, g, s) + commutator_bracket(g, f, s))
        for s in _rays_for(f.space, samples, rng)
    )
    return Report(
        "lie",
        [
            CheckRecord.from_violation("jacobi", worst, tol, samples),
            CheckRecord.from_violation("antisymmetry", anti, tol, samples),
        ],
    )


def _relative(a, b, floor):
    return abs(a - b) / max(abs(b), floor)


def check_dual_bracket(space, samples=100, rng=None, tol=1e-6, method="analytic", sectors=None):
    """Chart (Fubini-Study) bracket against ``i<[A,B]>/hbar`` at random (f, g, rho).

    The error is relative to ``max(|reference|, 1e-8 * ||{f, g}||)`` so that
    accidental near-zeros of the reference do not blow up the ratio.
    """
    rng = as_rng(rng)
    if sectors is None:
        sectors = [a for a, d in enumerate(space.sectors) if d > 1]
    worst = 0.0
    for k in range(samples):
        a = sectors[k % len(sectors)]
        f, g = random_observable(space, rng), random_observable(space, rng)
        rho = space.random_ray(rng, a)
        ref = commutator_bracket(f, g, rho)
        scale = max(float(np.linalg.norm(C, 2)) for C in commutator_blocks(f, g) if C.size)
        val = chart_bracket(f, g, rho, method=method)
        worst = max(worst, _relative(val, ref, max(1e-8 * scale, 1e-300)))
    return Report(
        "dual-bracket",
        [CheckRecord.from_violation(f"chart_vs_commutator_{method}", worst, tol, samples, hbar=list(space.hbar))],
    )


def check_flow_bracket(H, f, rho0, tol=1e-5, step=1e-4):
    """``d/dt f(rho(t))`` at 0 (central difference of the exact flow) equals ``{H, f}(rho0)``."""
    fwd = hamiltonian_flow(H, rho0, step, 1).final
    bwd = hamiltonian_flow(H, rho0, -step, 1).final
    deriv = (f(fwd) - f(bwd)) / (2 * step)
    return CheckRecord.from_violation(
        "flow_bracket", abs(deriv - commutator_bracket(H, f, rho0)), tol
    )


def evolve_function(f, H, t):
    """``alpha_t(f) = f o Phi_t``: move each term ray backwards along the flow."""
    terms = []
    for c, r in f.terms:
        U = exact_propagator(H, r.sector, t)
        terms.append((c, Ray.from_vector(U.conj().T @ r.vector, r.sector)))
    return ObservableFunction(f.space, terms)


def check_square_covariance(H, f, t, samples=50, rng=None, tol=1e-10):
    """``alpha_t(f^2) = alpha_t(f)^2`` pointwise under the exact flow."""
    rng = as_rng(rng)
    f2 = square(f)
    at_f2 = square(evolve_function(f, H, t))
    worst = 0.0
    for s in _rays_for(f.space, samples, rng):
        moved = hamiltonian_flow(H, s, t, 1).final
        worst = max(worst, abs(f2(moved) - at_f2(s)))
    return CheckRecord.from_violation("square_covariance", worst, tol, samples)


def random_bounded_hamiltonian(space, rng=None, bound=5.0):
    """Random observable with sup-norm at most ``bound``."""
    rng = as_rng(rng)
    blocks = [random_hermitian(rng, d) for d in space.sectors]
    s = max(float(np.linalg.norm(B, 2)) for B in blocks)
    scale = bound * rng.uniform(0.2, 1.0) / s if s > 0 else 0.0
    return ObservableFunction.from_blocks(space, [scale * B for B in blocks])
