"""Finite transition probability spaces.

A pure state space here is a disjoint union of projective spaces
``P(C^{d_a})``, one per sector.  Points are :class:`Ray` objects; a finite
sample of points yields a :class:`TransitionKernel`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from ._backend import kernels
from .errors import EmptyKernelError, StructuralError
from .reports import CheckRecord, Report
from .sampling import as_rng, random_unit_vector

RAY_EQ_EPS = 1e-10
SECTOR_EPS = 1e-12
NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Ray:
    """A pure state: a unit vector of ``C^d`` tagged with its sector.

    Two rays compare equal when they differ by a unit complex scalar.
    """

    sector: int
    vector: np.ndarray

    def __post_init__(self):
        v = np.array(self.vector, dtype=complex).reshape(-1)
        if v.size == 0:
            raise StructuralError("a ray needs dimension >= 1")
        if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
            raise StructuralError(f"ray vector has norm {np.linalg.norm(v)!r}, expected 1")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)
        object.__setattr__(self, "sector", int(self.sector))

    @classmethod
    def from_vector(cls, vector, sector=0):
        """Normalize ``vector`` and wrap it as a ray."""
        v = np.asarray(vector, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise StructuralError("cannot build a ray from the zero vector")
        return cls(sector, v / n)

    @property
    def dim(self):
        return self.vector.shape[0]

    def projector(self):
        return np.outer(self.vector, self.vector.conj())

    def __eq__(self, other):
        if not isinstance(other, Ray):
            return NotImplemented
        if self.sector != other.sector or self.dim != other.dim:
            return False
        return abs(np.vdot(self.vector, other.vector)) ** 2 > 1.0 - RAY_EQ_EPS

    __hash__ = None

    def __repr__(self):
        return f"Ray(sector={self.sector}, vector={np.array2string(self.vector, precision=4)})"


@dataclass(frozen=True)
class PureStateSpace:
    """Sector table ``(d_1, ..., d_m)``, per-sector hbar, optional sample points."""

    sectors: tuple
    hbar: tuple = None
    points: tuple = field(default=())

    def __post_init__(self):
        dims = tuple(int(d) for d in self.sectors)
        if not dims or any(d < 1 for d in dims):
            raise StructuralError(f"sector dimensions must be >= 1, got {self.sectors!r}")
        hbar = tuple(float(h) for h in self.hbar) if self.hbar is not None else (1.0,) * len(dims)
        if len(hbar) != len(dims):
            raise StructuralError("hbar needs one entry per sector")
        for d, h in zip(dims, hbar):
            if d > 1 and not h > 0:
                raise StructuralError("hbar must be positive in every sector of dimension > 1")
        object.__setattr__(self, "sectors", dims)
        object.__setattr__(self, "hbar", hbar)
        object.__setattr__(self, "points", tuple(self.points))
        for pt in self.points:
            self.validate_ray(pt)

    @classmethod
    def classical(cls, n):
        """``n`` one-dimensional sectors, each holding its single point."""
        pts = [Ray(a, np.ones(1)) for a in range(n)]
        return cls((1,) * n, points=pts)

    @property
    def dim(self):
        return sum(self.sectors)

    @property
    def is_classical(self):
        return all(d == 1 for d in self.sectors)

    def validate_ray(self, ray):
        if not 0 <= ray.sector < len(self.sectors):
            raise StructuralError(f"sector index {ray.sector} out of range")
        if ray.dim != self.sectors[ray.sector]:
            raise StructuralError(
                f"ray of dimension {ray.dim} in sector {ray.sector} of dimension "
                f"{self.sectors[ray.sector]}"
            )
        return ray

    def with_points(self, points):
        return PureStateSpace(self.sectors, self.hbar, tuple(points))

    def with_hbar(self, hbar):
        return PureStateSpace(self.sectors, tuple(hbar), self.points)

    def random_ray(self, rng=None, sector=None):
        rng = as_rng(rng)
        if sector is None:
            sector = int(rng.integers(len(self.sectors)))
        return Ray(sector, random_unit_vector(rng, self.sectors[sector]))

    def basis_rays(self, sector):
        d = self.sectors[sector]
        return [Ray(sector, np.eye(d)[:, i]) for i in range(d)]


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """Matrix of pairwise transition probabilities over ``n`` listed points."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise StructuralError(f"kernel must be square, got shape {p.shape}")
        if p.shape[0] == 0:
            raise EmptyKernelError("kernel has no points")
        if not np.all(np.isfinite(p)):
            raise StructuralError("kernel entries must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def n(self):
        return self.p.shape[0]

    def block(self, indices):
        idx = np.asarray(indices)
        return TransitionKernel(self.p[np.ix_(idx, idx)])


def transition_probability(rho, sigma):
    """``|<rho, sigma>|^2`` within a sector, 0 across sectors."""
    if rho.sector != sigma.sector:
        return 0.0
    if rho.dim != sigma.dim:
        raise StructuralError(
            f"rays in sector {rho.sector} have dimensions {rho.dim} and {sigma.dim}"
        )
    if rho.dim == 1:
        return 1.0  # C^1 has a single ray; skip the rounding of |<v, w>|^2
    return float(min(1.0, abs(np.vdot(rho.vector, sigma.vector)) ** 2))


def kernel_from_points(space):
    """Kernel of ``space.points``; computed sector by sector."""
    pts = space.points
    if not pts:
        raise EmptyKernelError("space carries no points")
    n = len(pts)
    p = np.zeros((n, n))
    by_sector = {}
    for i, pt in enumerate(pts):
        space.validate_ray(pt)
        by_sector.setdefault(pt.sector, []).append(i)
    for idx in by_sector.values():
        V = np.ascontiguousarray(np.stack([pts[i].vector for i in idx], axis=1))
        p[np.ix_(idx, idx)] = np.minimum(kernels.overlap_matrix(V), 1.0)
    np.fill_diagonal(p, 1.0)
    return TransitionKernel(p)


def check_tps_axioms(K, tol=1e-12):
    """Check the kernel-level transition probability axioms.

    Records: ``range`` (values in [0, 1], unit diagonal), ``identity``
    (p = 1 only between points with identical rows), ``orthogonality_symmetry``
    (p_ij = 0 iff p_ji = 0) and ``symmetry``.
    """
    p = K.p
    n = K.n
    report = Report("tps-axioms", meta={"n": n})

    out_of_range = max(float(np.max(-p, initial=0.0)), float(np.max(p - 1.0, initial=0.0)))
    diag = float(np.max(np.abs(np.diag(p) - 1.0)))
    report.add(CheckRecord.from_violation("range", max(out_of_range, diag), tol, n * n))

    ident = 0.0
    off = ~np.eye(n, dtype=bool)
    for i, j in zip(*np.nonzero((p >= 1.0 - tol) & off)):
        ident = max(ident, float(np.max(np.abs(p[i] - p[j]))))
    report.add(CheckRecord.from_violation("identity", ident, tol, n * n))

    zi = p <= tol
    mismatch = zi != zi.T
    zs = float(np.max(np.where(mismatch, np.abs(p), 0.0), initial=0.0))
    report.add(CheckRecord.from_violation("orthogonality_symmetry", zs, tol, n * n))

    report.add(CheckRecord.from_violation("symmetry", float(np.max(np.abs(p - p.T))), tol, n * n))
    return report


def sectors(K, eps=SECTOR_EPS):
    """Partition point indices into sectors: components of the graph ``p_ij > eps``."""
    adj = (K.p > eps) | (K.p.T > eps)
    ncomp, labels = connected_components(adj, directed=False)
    blocks = [[] for _ in range(ncomp)]
    for i, lab in enumerate(labels):
        blocks[lab].append(i)
    return sorted(blocks, key=lambda b: b[0])
