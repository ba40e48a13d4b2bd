"""The associative product assembled from the Jordan product and the bracket,
states on the block algebra, and the infimum formula for transition
probabilities.

For self-adjoint ``f, g`` the product is ``f . g = f o g - (i/2) [f, g]`` with
the rescaled bracket ``[f, g] = hbar {f, g}``; it is extended to ``f + i g``
by complex bilinearity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PureStateSpace, Ray, transition_probability
from .errors import PreconditionError, StructuralError
from .lattice import bloch_vector
from .poisson import poisson_bracket
from .reports import CheckRecord, Report
from .sampling import as_rng, random_unit_vector
from .spectral import ObservableFunction, jordan, random_observable, sup_norm

PSD_TOL = 1e-10


class ComplexObservable:
    """``f + i g`` with ``f``, ``g`` real observable functions."""

    def __init__(self, re, im=None):
        if im is None:
            im = ObservableFunction.zero(re.space)
        if re.space.sectors != im.space.sectors:
            raise StructuralError("real and imaginary parts live on different spaces")
        self.re = re
        self.im = im

    @property
    def space(self):
        return self.re.space

    @classmethod
    def unit(cls, space):
        return cls(ObservableFunction.unit(space))

    @classmethod
    def zero(cls, space):
        return cls(ObservableFunction.zero(space))

    @classmethod
    def from_blocks(cls, space, blocks):
        """Split complex blocks into Hermitian real and imaginary parts."""
        blocks = [np.asarray(M, dtype=complex) for M in blocks]
        re = [0.5 * (M + M.conj().T) for M in blocks]
        im = [-0.5j * (M - M.conj().T) for M in blocks]
        return cls(
            ObservableFunction.from_blocks(space, re), ObservableFunction.from_blocks(space, im)
        )

    def blocks(self):
        return [A + 1j * B for A, B in zip(self.re.blocks(), self.im.blocks())]

    def adjoint(self):
        return ComplexObservable(self.re, -self.im)

    @property
    def is_self_adjoint(self):
        return self.im.norm() == 0.0

    def norm(self):
        """Operator norm: the largest singular value over all sector blocks."""
        return sup_norm(self.blocks())

    def __add__(self, other):
        return ComplexObservable(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        return ComplexObservable(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return ComplexObservable(-self.re, -self.im)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        c = complex(c)
        return ComplexObservable(
            c.real * self.re - c.imag * self.im, c.imag * self.re + c.real * self.im
        )

    __rmul__ = __mul__

    def __repr__(self):
        return f"ComplexObservable(sectors={self.space.sectors})"


def rescaled_bracket(f, g):
    """``[f, g] = hbar {f, g}`` built from the hbar-dependent bracket."""
    pb = poisson_bracket(f, g)
    blocks = [h * B for h, B in zip(f.space.hbar, pb.blocks())]
    return ObservableFunction.from_blocks(f.space, blocks)


def _real_product(f, g, sign):
    """Real and imaginary parts of ``f o g + sign * (i/2)[f, g]``."""
    return jordan(f, g), (0.5 * sign) * rescaled_bracket(f, g)


def _assemble(a, b, sign):
    if a.space.sectors != b.space.sectors:
        raise StructuralError("operands live on different spaces")
    re = ObservableFunction.zero(a.space)
    im = ObservableFunction.zero(a.space)
    # (ar + i ai)(br + i bi), each real product split as x + i y
    for x, y, phase in ((a.re, b.re, 1), (a.im, b.im, -1), (a.re, b.im, 1j), (a.im, b.re, 1j)):
        if not x.terms or not y.terms:
            continue
        pr, pi = _real_product(x, y, sign)
        if phase == 1:
            re, im = re + pr, im + pi
        elif phase == -1:
            re, im = re - pr, im - pi
        else:
            re, im = re - pi, im + pr
    return ComplexObservable(re.simplified(), im.simplified())


def cstar_product(a, b):
    """``a . b`` from the Jordan product and the rescaled bracket."""
    return _assemble(a, b, -1)


def opposite_product(a, b):
    """The product with ``+ (i/2)[f, g]``: the opposite algebra."""
    return _assemble(a, b, 1)


def conjugate_parts(a):
    """Entrywise complex conjugation of the Hermitian parts in the standard basis.

    On matrices this is the transpose, a linear anti-isomorphism onto the
    opposite algebra.
    """
    return ComplexObservable(
        ObservableFunction.from_blocks(a.space, [A.conj() for A in a.re.blocks()]),
        ObservableFunction.from_blocks(a.space, [B.conj() for B in a.im.blocks()]),
    )


def random_complex_observable(space, rng=None, max_terms=5):
    rng = as_rng(rng)
    return ComplexObservable(
        random_observable(space, rng, max_terms), random_observable(space, rng, max_terms)
    )


# states ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StateFunctional:
    """Per-sector density blocks, PSD with unit total trace."""

    space: PureStateSpace
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(np.asarray(D, dtype=complex) for D in self.blocks)
        if len(blocks) != len(self.space.sectors):
            raise StructuralError("one density block per sector is required")
        total = 0.0
        for D, d in zip(blocks, self.space.sectors):
            if D.shape != (d, d):
                raise StructuralError(f"density block of shape {D.shape} in a {d}-dim sector")
            if np.max(np.abs(D - D.conj().T), initial=0.0) > PSD_TOL:
                raise PreconditionError("density block is not Hermitian")
            if np.linalg.eigvalsh(D)[0] < -PSD_TOL:
                raise PreconditionError("density block is not positive semidefinite")
            total += float(np.trace(D).real)
        if abs(total - 1.0) > PSD_TOL:
            raise PreconditionError(f"total trace {total} != 1")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_ray(cls, space, ray):
        space.validate_ray(ray)
        blocks = [np.zeros((d, d), dtype=complex) for d in space.sectors]
        blocks[ray.sector] = ray.projector()
        return cls(space, tuple(blocks))

    @classmethod
    def mixture(cls, space, weighted_rays):
        blocks = [np.zeros((d, d), dtype=complex) for d in space.sectors]
        for w, r in weighted_rays:
            blocks[r.sector] = blocks[r.sector] + w * r.projector()
        return cls(space, tuple(blocks))

    def rank(self, tol=1e-9):
        return sum(int(np.sum(np.linalg.eigvalsh(D) > tol)) for D in self.blocks)

    @property
    def is_pure(self):
        return self.rank() == 1

    def to_ray(self):
        """The ray of a pure state (rank-1 test)."""
        if not self.is_pure:
            raise PreconditionError("state is not pure")
        for a, D in enumerate(self.blocks):
            w, U = np.linalg.eigh(D)
            if w[-1] > 0.5:
                return Ray.from_vector(U[:, -1], a)
        raise AssertionError("unreachable: a pure state has an eigenvalue 1")


def state_eval(omega, a):
    """``omega(a) = sum_alpha tr(D_alpha A_alpha)``."""
    if omega.space.sectors != a.space.sectors:
        raise StructuralError("state and observable live on different spaces")
    return complex(sum(np.trace(D @ A) for D, A in zip(omega.blocks, a.blocks())))


def trace_distance(rho, sigma):
    """Trace norm of the difference, which is the dual of the operator norm."""
    total = 0.0
    for D, E in zip(rho.blocks, sigma.blocks):
        if D.size:
            total += float(np.sum(np.abs(np.linalg.eigvalsh(D - E))))
    return total


def tp_from_state_norm(rho, sigma):
    """``p = 1 - ||rho - sigma||^2 / 4`` for pure states."""
    if not (rho.is_pure and sigma.is_pure):
        raise PreconditionError("transition probabilities are defined for pure states")
    return 1.0 - 0.25 * trace_distance(rho, sigma) ** 2


def _feasible_operator(rng, space, sigma):
    """Random block operator A with 0 <= A <= 1 and <sigma, A sigma> = 1."""
    blocks = []
    for a, d in enumerate(space.sectors):
        X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        U, _ = np.linalg.qr(X)
        B = (U * rng.uniform(0.0, 1.0, size=d)) @ U.conj().T
        if a == sigma.sector:
            P = sigma.projector()
            C = np.eye(d) - P
            B = P + C @ B @ C
        blocks.append(B)
    return blocks


def mtp_infimum_check(rho, sigma, space, trials=500, rng=None, tol=1e-10):
    """Infimum of ``rho(A)`` over ``0 <= A <= 1`` with ``sigma(A) = 1``.

    ``A = P_sigma`` attains the transition probability; random feasible
    operators must never go below it.
    """
    rng = as_rng(rng)
    space.validate_ray(rho)
    space.validate_ray(sigma)
    p = transition_probability(rho, sigma)
    attained = (
        float(np.vdot(rho.vector, sigma.projector() @ rho.vector).real)
        if rho.sector == sigma.sector
        else 0.0
    )
    below = 0.0
    infeasible = 0.0
    smallest = np.inf
    for _ in range(trials):
        A = _feasible_operator(rng, space, sigma)
        s = float(np.vdot(sigma.vector, A[sigma.sector] @ sigma.vector).real)
        eigs = np.concatenate([np.linalg.eigvalsh(B) for B in A])
        infeasible = max(infeasible, abs(s - 1.0), -eigs.min(), eigs.max() - 1.0)
        val = float(np.vdot(rho.vector, A[rho.sector] @ rho.vector).real)
        smallest = min(smallest, val)
        below = max(below, p - val)
    report = Report("mielnik-infimum", meta={"p": p, "sample_minimum": float(smallest)})
    report.add(CheckRecord.from_violation("attainment", abs(attained - p), tol))
    report.add(CheckRecord.from_violation("lower_bound", max(below, 0.0), tol, trials))
    report.add(CheckRecord.from_violation("feasibility", infeasible, tol, trials))
    return report


def pure_state_roundtrip(space, samples=50, rng=None, tol=1e-10):
    """Pure states of the block algebra are exactly the rays, with the same p."""
    rng = as_rng(rng)
    ray_to_state = 0.0
    state_to_ray = 0.0
    mixed_accepted = 0
    tp_gap = 0.0
    mtp_gap = 0.0
    bloch = 0.0
    for _ in range(samples):
        r = space.random_ray(rng)
        s = space.random_ray(rng)
        wr = StateFunctional.from_ray(space, r)
        if not wr.is_pure:
            ray_to_state = max(ray_to_state, 1.0)
        # a pure state drawn independently of any Ray: rank-1 projector on a random vector
        a = int(rng.integers(len(space.sectors)))
        v = random_unit_vector(rng, space.sectors[a])
        blocks = [np.zeros((d, d), dtype=complex) for d in space.sectors]
        blocks[a] = np.outer(v, v.conj())
        w = StateFunctional(space, tuple(blocks))
        back = w.to_ray()
        state_to_ray = max(state_to_ray, 1.0 - transition_probability(back, Ray(a, v)))
        if space.sectors[a] == 2:
            bloch = max(bloch, abs(float(np.linalg.norm(bloch_vector(v))) - 1.0))
        # a genuine mixture of two distinct rays must be rejected
        t = space.random_ray(rng)
        if not t == r:
            lam = rng.uniform(0.2, 0.8)
            mixed_accepted += int(StateFunctional.mixture(space, [(lam, r), (1 - lam, t)]).is_pure)
        p = transition_probability(r, s)
        tp_gap = max(tp_gap, abs(tp_from_state_norm(wr, StateFunctional.from_ray(space, s)) - p))
        m = mtp_infimum_check(r, s, space, trials=20, rng=rng, tol=tol)
        mtp_gap = max(mtp_gap, m.max_violation)
    report = Report(
        "pure-state-roundtrip",
        meta={
            "sectors": list(space.sectors),
            "pure_states_are_finite": space.is_classical,
            "pure_state_count": len(space.sectors) if space.is_classical else None,
        },
    )
    report.add(CheckRecord.from_violation("ray_to_pure_state", ray_to_state, 0.0, samples))
    report.add(CheckRecord.from_violation("pure_state_to_ray", state_to_ray, tol, samples))
    report.add(CheckRecord.from_violation("mixed_rejected", mixed_accepted, 0.0, samples))
    report.add(CheckRecord.from_violation("norm_formula", tp_gap, tol, samples))
    report.add(CheckRecord.from_violation("infimum_formula", mtp_gap, tol, samples))
    if 2 in space.sectors:
        report.add(CheckRecord.from_violation("bloch_sphere", bloch, tol, samples))
    return report


def check_cstar_axioms(space, trials=100, rng=None, tol=1e-9, hbar_tol=1e-12):
    """Randomized checks of the assembled product and its C*-identities."""
    rng = as_rng(rng)
    worst = dict.fromkeys(
        ["matrix_product", "associativity", "cstar_identity", "submultiplicative",
         "involution", "unit", "opposite_product", "anti_isomorphism"],
        0.0,
    )
    hbar_gap = 0.0
    one = ComplexObservable.unit(space)
    flat = space.with_hbar((1.0,) * len(space.sectors))
    for _ in range(trials):
        a = random_complex_observable(space, rng)
        b = random_complex_observable(space, rng)
        c = random_complex_observable(space, rng)
        ab = cstar_product(a, b)
        A, B = a.blocks(), b.blocks()
        worst["matrix_product"] = max(
            worst["matrix_product"], _gap(ab.blocks(), [X @ Y for X, Y in zip(A, B)])
        )
        worst["associativity"] = max(
            worst["associativity"],
            _gap(cstar_product(ab, c).blocks(), cstar_product(a, cstar_product(b, c)).blocks()),
        )
        sa = cstar_product(a.adjoint(), a)
        worst["cstar_identity"] = max(worst["cstar_identity"], abs(sa.norm() - a.norm() ** 2))
        worst["submultiplicative"] = max(
            worst["submultiplicative"], ab.norm() - a.norm() * b.norm()
        )
        worst["involution"] = max(
            worst["involution"],
            _gap(ab.adjoint().blocks(), cstar_product(b.adjoint(), a.adjoint()).blocks()),
        )
        worst["unit"] = max(
            worst["unit"],
            _gap(cstar_product(one, a).blocks(), A),
            _gap(cstar_product(a, one).blocks(), A),
        )
        f, g = ComplexObservable(a.re), ComplexObservable(b.re)
        worst["opposite_product"] = max(
            worst["opposite_product"],
            _gap(opposite_product(f, g).blocks(), cstar_product(g, f).blocks()),
        )
        worst["anti_isomorphism"] = max(
            worst["anti_isomorphism"],
            _gap(
                conjugate_parts(ab).blocks(),
                opposite_product(conjugate_parts(a), conjugate_parts(b)).blocks(),
            ),
        )
        # same terms on a space with every hbar = 1
        a1 = ComplexObservable(ObservableFunction(flat, a.re.terms), ObservableFunction(flat, a.im.terms))
        b1 = ComplexObservable(ObservableFunction(flat, b.re.terms), ObservableFunction(flat, b.im.terms))
        hbar_gap = max(hbar_gap, _gap(ab.blocks(), cstar_product(a1, b1).blocks()))
    report = Report(
        "cstar-axioms",
        meta={"sectors": list(space.sectors), "hbar": list(space.hbar), "trials": trials},
    )
    for name, v in worst.items():
        report.add(CheckRecord.from_violation(name, v, tol, trials))
    report.add(CheckRecord.from_violation("hbar_independence", hbar_gap, hbar_tol, trials))
    return report


def _gap(X, Y):
    return max((float(np.max(np.abs(x - y))) for x, y in zip(X, Y) if x.size), default=0.0)
