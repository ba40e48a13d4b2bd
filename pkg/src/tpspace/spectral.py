"""Functions built from transition probabilities, their spectral resolutions,
and the Jordan product obtained from squares.

An :class:`ObservableFunction` is a finite combination ``sum_i c_i p_{rho_i}``
and is evaluated exactly that way.  Its operator realization (one Hermitian
block per sector) is used only where a spectral decomposition is needed and
as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import PureStateSpace, Ray, transition_probability
from .errors import StructuralError
from .lattice import SubspaceElement, join
from .reports import CheckRecord, Report
from .sampling import as_rng

MERGE_TOL = 1e-9


class ObservableFunction:
    """``f = sum_i c_i p_{rho_i}`` over a :class:`PureStateSpace`."""

    def __init__(self, space, terms=()):
        self.space = space
        clean = []
        for c, r in terms:
            space.validate_ray(r)
            clean.append((float(c), r))
        self.terms = tuple(clean)

    # constructors -------------------------------------------------------

    @classmethod
    def p(cls, space, ray, c=1.0):
        """The single transition-probability function ``c * p_ray``."""
        return cls(space, [(c, ray)])

    @classmethod
    def unit(cls, space):
        """The constant function 1, as the sum of p_e over a basis of each sector."""
        return cls(space, [(1.0, r) for a in range(len(space.sectors)) for r in space.basis_rays(a)])

    @classmethod
    def zero(cls, space):
        return cls(space, ())

    @classmethod
    def from_blocks(cls, space, blocks):
        """Express Hermitian sector blocks as a term list via their eigenvectors."""
        terms = []
        for a, A in enumerate(blocks):
            A = np.asarray(A, dtype=complex)
            if A.shape != (space.sectors[a],) * 2:
                raise StructuralError(f"block {a} has shape {A.shape}")
            w, U = np.linalg.eigh(0.5 * (A + A.conj().T))
            for lam, j in zip(w, range(U.shape[1])):
                if lam != 0.0:
                    terms.append((lam, Ray.from_vector(U[:, j], a)))
        return cls(space, terms)

    # evaluation ---------------------------------------------------------

    def __call__(self, sigma):
        return float(sum(c * transition_probability(r, sigma) for c, r in self.terms))

    @cached_property
    def _blocks(self):
        blocks = [np.zeros((d, d), dtype=complex) for d in self.space.sectors]
        for c, r in self.terms:
            blocks[r.sector] += c * np.outer(r.vector, r.vector.conj())
        for B in blocks:
            B.setflags(write=False)
        return tuple(blocks)

    def blocks(self):
        """Per-sector Hermitian operators ``sum c_i |rho_i><rho_i|``."""
        return self._blocks

    def gelfand(self, sigma):
        """``<sigma, A sigma>`` from the operator blocks."""
        v = sigma.vector
        return float(np.vdot(v, self._blocks[sigma.sector] @ v).real)

    def norm(self):
        """Sup-norm over the pure state space (largest |eigenvalue| of any block)."""
        return sup_norm(self._blocks)

    def simplified(self):
        """Same function with at most ``d_a`` terms per sector."""
        return ObservableFunction.from_blocks(self.space, self._blocks)

    # linear structure ---------------------------------------------------

    def _same(self, other):
        if other.space.sectors != self.space.sectors:
            raise StructuralError("functions live on different spaces")

    def __add__(self, other):
        self._same(other)
        return ObservableFunction(self.space, self.terms + other.terms)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, a):
        if not np.isscalar(a):
            return NotImplemented
        return ObservableFunction(self.space, [(a * c, r) for c, r in self.terms])

    __rmul__ = __mul__

    def __repr__(self):
        return f"ObservableFunction({len(self.terms)} terms on sectors {self.space.sectors})"


def sup_norm(blocks):
    return max(
        (float(np.linalg.norm(B, 2)) for B in blocks if B.size),
        default=0.0,
    )


def p_Q(Q, sigma):
    """The function p_Q: sum of p(e_i, sigma) over an orthonormal basis of Q."""
    return float(sum(transition_probability(e, sigma) for e in Q.atoms()))


@dataclass
class SpectralResolution:
    """``f = sum_j lambda_j p_{Q_j}`` with orthogonal Q_j summing to the unit."""

    space: PureStateSpace
    pairs: list

    @property
    def values(self):
        return [lam for lam, _ in self.pairs]

    @property
    def projections(self):
        return [Q for _, Q in self.pairs]

    def __call__(self, sigma):
        return float(sum(lam * Q.p_value(sigma) for lam, Q in self.pairs))

    def to_function(self):
        """A term-list representative (basis columns of each Q_j weighted by lambda_j)."""
        terms = [(lam, r) for lam, Q in self.pairs for r in Q.atoms() if lam != 0.0]
        return ObservableFunction(self.space, terms)

    def blocks(self):
        blocks = [np.zeros((d, d), dtype=complex) for d in self.space.sectors]
        for lam, Q in self.pairs:
            for a in range(len(blocks)):
                blocks[a] += lam * Q.projector(a)
        return blocks

    def completeness_error(self):
        """Max deviation of sum_j P_{Q_j} from the identity, per sector."""
        worst = 0.0
        for a, d in enumerate(self.space.sectors):
            S = sum(Q.projector(a) for Q in self.projections)
            worst = max(worst, float(np.max(np.abs(S - np.eye(d)))))
        return worst

    def orthogonality_error(self):
        worst = 0.0
        Qs = self.projections
        for i in range(len(Qs)):
            for j in range(i + 1, len(Qs)):
                for a in range(len(self.space.sectors)):
                    M = Qs[i].blocks[a].conj().T @ Qs[j].blocks[a]
                    if M.size:
                        worst = max(worst, float(np.max(np.abs(M))))
        return worst

    def to_dict(self):
        return {
            "values": [float(v) for v in self.values],
            "sector_dims": [list(Q.sector_dims) for Q in self.projections],
        }


def _group(items, tol):
    """Group (value, sector, vector) triples sorted by decreasing value."""
    groups = []
    for lam, a, v in items:
        if groups and groups[-1][0] - lam <= tol * max(1.0, abs(groups[-1][0])):
            groups[-1][1].append((lam, a, v))
        else:
            groups.append((lam, [(lam, a, v)]))
    return groups


def _resolution_from_eig(space, items, tol):
    # stable sort keeps (sector, index) order for ties, so grouping is deterministic
    items = sorted(items, key=lambda t: -t[0])
    pairs = []
    for _, members in _group(items, tol):
        spans = [[] for _ in space.sectors]
        for _, a, v in members:
            spans[a].append(v)
        Q = SubspaceElement.from_spans(
            space.sectors, [np.stack(s, axis=1) if s else None for s in spans]
        )
        pairs.append((float(np.mean([m[0] for m in members])), Q))
    return SpectralResolution(space, pairs)


def spectral_resolution(f, merge_tol=MERGE_TOL):
    """Unique spectral resolution of ``f`` (eigenvalues merged across sectors)."""
    items = []
    for a, A in enumerate(f.blocks()):
        w, U = np.linalg.eigh(A)
        for j in range(len(w)):
            items.append((float(w[j]), a, U[:, j]))
    return _resolution_from_eig(f.space, items, merge_tol)


def square(f, merge_tol=MERGE_TOL):
    """``f^2 = sum_j lambda_j^2 p_{Q_j}``, returned as a spectral resolution."""
    res = spectral_resolution(f, merge_tol)
    squared = sorted(((lam * lam, Q) for lam, Q in res.pairs), key=lambda t: -t[0])
    pairs = []
    for mu, Q in squared:
        if pairs and pairs[-1][0] - mu <= merge_tol * max(1.0, pairs[-1][0]):
            pairs[-1] = (pairs[-1][0], join(pairs[-1][1], Q))
        else:
            pairs.append((mu, Q))
    return SpectralResolution(f.space, pairs)


def jordan(f, g):
    """``f o g = ((f+g)^2 - (f-g)^2) / 4`` with squares taken spectrally.

    One-dimensional sectors are scalars, where polarization reduces to the
    product; it is taken directly there so the classical case carries no
    rounding.
    """
    pol = 0.25 * (square(f + g).to_function() - square(f - g).to_function())
    dims = f.space.sectors
    if all(d > 1 for d in dims):
        return pol
    terms = [(c, r) for c, r in pol.terms if dims[r.sector] > 1]
    for a, d in enumerate(dims):
        if d == 1:
            e = Ray(a, np.ones(1))
            terms.append((f(e) * g(e), e))
    return ObservableFunction(f.space, terms)


def anticommutator_blocks(f, g):
    return [0.5 * (A @ B + B @ A) for A, B in zip(f.blocks(), g.blocks())]


def random_observable(space, rng=None, max_terms=5, scale=1.0):
    """Random element of A00 with 1..max_terms terms and N(0, scale) coefficients."""
    rng = as_rng(rng)
    n = int(rng.integers(1, max_terms + 1))
    return ObservableFunction(
        space, [(scale * rng.normal(), space.random_ray(rng)) for _ in range(n)]
    )


def check_jb_axioms(space, trials=100, rng=None, tol=1e-8, points=10):
    """Randomized JB-algebra checks for the spectrally defined Jordan product."""
    rng = as_rng(rng)
    worst = dict.fromkeys(
        ["bilinearity", "anticommutator", "jordan_identity", "submultiplicative",
         "square_norm", "square_monotone", "symmetry"],
        0.0,
    )
    for _ in range(trials):
        f = random_observable(space, rng)
        g = random_observable(space, rng)
        h = random_observable(space, rng)
        a, b = rng.normal(size=2)
        fg = jordan(f, g)
        f2 = square(f).to_function()
        g2 = square(g).to_function()
        lhs = jordan(a * f + b * g, h)
        fh, gh = jordan(f, h), jordan(g, h)
        ji = jordan(f2, jordan(f, g)) - jordan(f, jordan(f2, g))
        gf = jordan(g, f)
        ac = anticommutator_blocks(f, g)
        for _ in range(points):
            s = space.random_ray(rng)
            worst["bilinearity"] = max(worst["bilinearity"], abs(lhs(s) - a * fh(s) - b * gh(s)))
            vs = s.vector
            worst["anticommutator"] = max(
                worst["anticommutator"], abs(fg(s) - np.vdot(vs, ac[s.sector] @ vs).real)
            )
            worst["symmetry"] = max(worst["symmetry"], abs(fg(s) - gf(s)))
        worst["jordan_identity"] = max(worst["jordan_identity"], ji.norm())
        worst["submultiplicative"] = max(
            worst["submultiplicative"], fg.norm() - f.norm() * g.norm()
        )
        worst["square_norm"] = max(worst["square_norm"], abs(f2.norm() - f.norm() ** 2))
        worst["square_monotone"] = max(
            worst["square_monotone"], f2.norm() - (f2 + g2).norm()
        )
    report = Report("jb-axioms", meta={"sectors": list(space.sectors), "trials": trials})
    for name, v in worst.items():
        report.add(CheckRecord.from_violation(name, v, tol, trials))
    return report


def check_classical_pointwise(space, trials=20, rng=None, tol=0.0):
    """On spaces with only 1-dim sectors the Jordan product is the pointwise product."""
    rng = as_rng(rng)
    worst = 0.0
    pts = [Ray(a, np.ones(1)) for a, d in enumerate(space.sectors) if d == 1]
    for _ in range(trials):
        f = random_observable(space, rng)
        g = random_observable(space, rng)
        fg = jordan(f, g)
        for s in pts:
            worst = max(worst, abs(fg(s) - f(s) * g(s)))
    return CheckRecord.from_violation("classical_pointwise", worst, tol, trials)
