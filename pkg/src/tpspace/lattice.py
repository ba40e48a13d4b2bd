"""The lattice of orthoclosed subsets, realized as per-sector subspaces.

In a Hilbert-modeled space every orthoclosed subset is the set of rays in a
closed subspace of ``C^{d_1} + ... + C^{d_m}`` that splits along the
sectors, so a :class:`SubspaceElement` stores one orthonormal basis matrix
per sector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .core import PureStateSpace, Ray, transition_probability
from .errors import DegenerateProjectionError, PreconditionError, StructuralError
from .reports import CheckRecord, Report
from .sampling import as_rng, random_unit_vector

ORTHO_TOL = 1e-10
RANK_RTOL = 1e-10


def _dims_of(space_or_dims):
    if isinstance(space_or_dims, PureStateSpace):
        return space_or_dims.sectors
    return tuple(int(d) for d in space_or_dims)


def _orthonormal_span(M, d, rtol=RANK_RTOL):
    """Orthonormal basis of the column span of ``M`` (d x k)."""
    if M.size == 0:
        return np.zeros((d, 0), dtype=complex)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((d, 0), dtype=complex)
    # absolute floor: unit-vector inputs, so a leading value ~1 is the normal case
    r = int(np.sum(s > rtol * max(s[0], 1.0)))
    return U[:, :r]


def _null_space(M, d, rtol=RANK_RTOL):
    """Orthonormal basis of the null space of ``M`` (rows x d)."""
    if M.size == 0:
        return np.eye(d, dtype=complex)
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    lead = s[0] if s.size else 0.0
    r = int(np.sum(s > rtol * max(lead, 1.0)))
    return Vh[r:].conj().T


@dataclass(frozen=True, eq=False)
class SubspaceElement:
    """One orthonormal basis matrix per sector (``d_a x k_a``, ``k_a`` may be 0)."""

    dims: tuple
    blocks: tuple

    def __post_init__(self):
        dims = _dims_of(self.dims)
        if len(self.blocks) != len(dims):
            raise StructuralError("need one block per sector")
        blocks = []
        for d, B in zip(dims, self.blocks):
            B = np.array(B, dtype=complex).reshape(d, -1)
            k = B.shape[1]
            if k and np.max(np.abs(B.conj().T @ B - np.eye(k))) > ORTHO_TOL:
                raise StructuralError("block columns are not orthonormal")
            B.setflags(write=False)
            blocks.append(B)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "blocks", tuple(blocks))

    # construction -------------------------------------------------------

    @classmethod
    def from_spans(cls, space, spans):
        """Build from arbitrary spanning columns per sector (``None`` = empty)."""
        dims = _dims_of(space)
        blocks = []
        for d, M in zip(dims, spans):
            M = np.zeros((d, 0), dtype=complex) if M is None else np.asarray(M, dtype=complex).reshape(d, -1)
            blocks.append(_orthonormal_span(M, d))
        return cls(dims, tuple(blocks))

    @classmethod
    def zero(cls, space):
        dims = _dims_of(space)
        return cls(dims, tuple(np.zeros((d, 0), dtype=complex) for d in dims))

    @classmethod
    def unit(cls, space):
        dims = _dims_of(space)
        return cls(dims, tuple(np.eye(d, dtype=complex) for d in dims))

    @classmethod
    def atom(cls, space, ray):
        dims = _dims_of(space)
        spans = [None] * len(dims)
        spans[ray.sector] = ray.vector[:, None]
        return cls.from_spans(dims, spans)

    # queries ------------------------------------------------------------

    @property
    def sector_dims(self):
        return tuple(B.shape[1] for B in self.blocks)

    @property
    def dim(self):
        return sum(self.sector_dims)

    @property
    def is_atom(self):
        return self.dim == 1

    def projector(self, sector):
        B = self.blocks[sector]
        return B @ B.conj().T

    def projectors(self):
        return [self.projector(a) for a in range(len(self.dims))]

    def p_value(self, ray):
        """``<ray, P_Q ray>``, i.e. the sum of p(e_i, ray) over a basis of Q."""
        B = self.blocks[ray.sector]
        if B.shape[1] == 0:
            return 0.0
        c = B.conj().T @ ray.vector
        return float(np.vdot(c, c).real)

    def contains(self, ray, tol=ORTHO_TOL):
        return self.p_value(ray) >= 1.0 - tol

    def orthogonal_to(self, ray, tol=ORTHO_TOL):
        return self.p_value(ray) <= tol

    def atoms(self):
        """The atoms spanned by the stored basis columns."""
        return [
            Ray.from_vector(B[:, i], a)
            for a, B in enumerate(self.blocks)
            for i in range(B.shape[1])
        ]

    def random_ray(self, rng=None):
        """A random ray inside this element (uniform over nonempty sectors, then Haar)."""
        rng = as_rng(rng)
        nonempty = [a for a, k in enumerate(self.sector_dims) if k]
        if not nonempty:
            raise PreconditionError("the zero element contains no rays")
        a = nonempty[int(rng.integers(len(nonempty)))]
        B = self.blocks[a]
        return Ray.from_vector(B @ random_unit_vector(rng, B.shape[1]), a)

    def __repr__(self):
        return f"SubspaceElement(dims={self.dims}, sector_dims={self.sector_dims})"


def _check_same(Q, R):
    if Q.dims != R.dims:
        raise StructuralError(f"elements live in different spaces {Q.dims} vs {R.dims}")


def distance(Q, R):
    """Largest operator-norm difference of the sector projectors."""
    _check_same(Q, R)
    return max(
        float(np.linalg.norm(Q.projector(a) - R.projector(a), 2)) if d else 0.0
        for a, d in enumerate(Q.dims)
    )


def leq(Q, R, tol=1e-9):
    _check_same(Q, R)
    return all(
        np.max(np.abs(R.projector(a) @ Q.blocks[a] - Q.blocks[a]), initial=0.0) <= tol
        for a in range(len(Q.dims))
    )


def orthoplement(Q):
    return SubspaceElement(
        Q.dims, tuple(_null_space(B.conj().T, d) for d, B in zip(Q.dims, Q.blocks))
    )


def orthoclosure(rays, space):
    """Smallest orthoclosed element containing ``rays`` (per-sector span)."""
    dims = _dims_of(space)
    cols = [[] for _ in dims]
    for r in rays:
        if not 0 <= r.sector < len(dims) or r.dim != dims[r.sector]:
            raise StructuralError(f"ray {r!r} does not fit sectors {dims}")
        cols[r.sector].append(r.vector)
    spans = [np.stack(c, axis=1) if c else None for c in cols]
    return SubspaceElement.from_spans(dims, spans)


def join(Q, R):
    _check_same(Q, R)
    return SubspaceElement.from_spans(
        Q.dims, [np.hstack([A, B]) for A, B in zip(Q.blocks, R.blocks)]
    )


def meet(Q, R):
    """Intersection via the null space of the stacked complement projectors."""
    _check_same(Q, R)
    blocks = []
    for a, d in enumerate(Q.dims):
        M = np.vstack([np.eye(d) - Q.projector(a), np.eye(d) - R.projector(a)])
        blocks.append(_null_space(M, d))
    return SubspaceElement(Q.dims, tuple(blocks))


def sasaki_project(sigma, Q):
    """Project ``sigma`` onto Q and renormalize."""
    P = Q.projector(sigma.sector)
    v = P @ sigma.vector
    n = np.linalg.norm(v)
    if n ** 2 <= ORTHO_TOL:
        raise DegenerateProjectionError("ray is orthogonal to the subspace")
    return Ray(sigma.sector, v / n)


def random_element(space, rng=None, sector_dims=None):
    """Random element; ``sector_dims`` fixes the dimension per sector."""
    rng = as_rng(rng)
    dims = _dims_of(space)
    if sector_dims is None:
        sector_dims = [int(rng.integers(0, d + 1)) for d in dims]
    spans = []
    for d, k in zip(dims, sector_dims):
        X = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
        spans.append(X)
    return SubspaceElement.from_spans(dims, spans)


def random_subelement(R, rng=None):
    """Random Q <= R."""
    rng = as_rng(rng)
    blocks = []
    for B in R.blocks:
        k = B.shape[1]
        j = int(rng.integers(0, k + 1))
        X = rng.normal(size=(k, j)) + 1j * rng.normal(size=(k, j))
        blocks.append(B @ X)
    return SubspaceElement.from_spans(R.dims, blocks)


# structural checks ------------------------------------------------------


def check_orthomodularity(space, trials=100, rng=None, tol=1e-9, pairs=None):
    """Q <= R implies R = Q v (R ^ Q-perp), over random nested pairs."""
    rng = as_rng(rng)
    if pairs is None:
        pairs = []
        for _ in range(trials):
            R = random_element(space, rng)
            pairs.append((random_subelement(R, rng), R))
    worst = 0.0
    for Q, R in pairs:
        if not leq(Q, R):
            raise PreconditionError("orthomodularity needs Q <= R")
        worst = max(worst, distance(R, join(Q, meet(R, orthoplement(Q)))))
    return Report(
        "orthomodularity",
        [CheckRecord.from_violation("orthomodular_law", worst, tol, len(pairs))],
    )


def check_covering(rho, Q, tol=1e-9):
    """Covering property at ``rho``: (rho v Q) ^ Q-perp is an atom, dim grows by one."""
    if Q.contains(rho):
        raise PreconditionError("covering check needs rho outside Q")
    A = SubspaceElement.atom(Q.dims, rho)
    J = join(A, Q)
    top = meet(J, orthoplement(Q))
    dim_ok = J.dim == Q.dim + 1
    report = Report("covering", meta={"dim_join": J.dim, "dim_q": Q.dim, "dim_meet": top.dim})
    report.add(CheckRecord.from_violation("dimension_step", 0.0 if dim_ok else 1.0, tol))
    report.add(CheckRecord.from_violation("atom", 0.0 if top.is_atom else 1.0, tol))
    if top.is_atom:
        # the atom must be the Sasaki image of rho on Q-perp
        s = sasaki_project(rho, orthoplement(Q))
        dev = distance(top, SubspaceElement.atom(Q.dims, s))
        report.add(CheckRecord.from_violation("atom_is_projection", dev, tol))
    return report


def bloch_vector(c):
    """Bloch coordinates (x, y, z) of a unit vector in C^2.

    Density matrix parametrization: rho = 1/2 [[1+x, y+iz], [y-iz, 1-x]].
    """
    rho = np.outer(c, c.conj())
    return np.array(
        [(rho[0, 0] - rho[1, 1]).real, 2.0 * rho[0, 1].real, 2.0 * rho[0, 1].imag]
    )


def check_two_sphere(rho, sigma, samples=50, rng=None, tol=1e-10, pairs=None):
    """Points of the plane rho v sigma map to S^2 with p = (1 + cos theta)/2."""
    rng = as_rng(rng)
    if rho.sector != sigma.sector:
        raise PreconditionError("two-sphere property concerns rays in one sector")
    if rho == sigma:
        raise PreconditionError("two-sphere property needs distinct rays")
    B = _orthonormal_span(np.stack([rho.vector, sigma.vector], axis=1), rho.dim)
    if B.shape[1] != 2:
        raise PreconditionError("rho v sigma is not a plane")
    if pairs is None:
        pairs = [(random_unit_vector(rng, 2), random_unit_vector(rng, 2)) for _ in range(samples)]
    worst = 0.0
    for cz, cw in pairs:
        z = Ray.from_vector(B @ cz, rho.sector)
        w = Ray.from_vector(B @ cw, rho.sector)
        p = transition_probability(z, w)
        bz, bw = bloch_vector(cz / np.linalg.norm(cz)), bloch_vector(cw / np.linalg.norm(cw))
        cos_t = float(np.clip(bz @ bw, -1.0, 1.0))
        worst = max(worst, abs(p - 0.5 * (1.0 + cos_t)))
    return Report(
        "two-sphere", [CheckRecord.from_violation("two_sphere", worst, tol, len(pairs))]
    )


def check_double_complement(Q, tol=1e-10):
    return CheckRecord.from_violation(
        "double_complement", distance(orthoplement(orthoplement(Q)), Q), tol
    )


def check_de_morgan(Q, R, tol=1e-9):
    a = distance(orthoplement(join(Q, R)), meet(orthoplement(Q), orthoplement(R)))
    b = distance(orthoplement(meet(Q, R)), join(orthoplement(Q), orthoplement(R)))
    return CheckRecord.from_violation("de_morgan", max(a, b), tol)


def check_sasaki_factorization(sigma, Q, samples=20, rng=None, tol=1e-10):
    """p(sigma, rho) = p(sigma, phi(sigma)) p(phi(sigma), rho) for rho in Q."""
    rng = as_rng(rng)
    phi = sasaki_project(sigma, Q)
    p0 = transition_probability(sigma, phi)
    worst = 0.0
    for _ in range(samples):
        r = Q.random_ray(rng)
        worst = max(
            worst,
            abs(transition_probability(sigma, r) - p0 * transition_probability(phi, r)),
        )
    return CheckRecord.from_violation("sasaki_factorization", worst, tol, samples)


def check_atomisticity(Q, tol=1e-10):
    atoms = Q.atoms()
    J = SubspaceElement.zero(Q.dims)
    for r in atoms:
        J = join(J, SubspaceElement.atom(Q.dims, r))
    dev = distance(J, Q) if len(atoms) == Q.dim else 1.0
    return CheckRecord.from_violation("atomisticity", dev, tol)


def _nudge(Q, rng, eps):
    """Rotate every sector block by ``exp(i eps H)`` with ``||H|| = 1``."""
    blocks = []
    for d, B in zip(Q.dims, Q.blocks):
        X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        H = X + X.conj().T
        H /= np.linalg.norm(H, 2)
        blocks.append(expm(1j * eps * H) @ B)
    return SubspaceElement.from_spans(Q.dims, blocks)


def check_join_meet_continuity(space, trials=100, rng=None, eps=1e-7, tol=1e-4):
    """Rotating generic Q, R by ``eps`` moves Q v R and Q ^ R by O(eps).

    Only spot-checks generic pairs; at non-transversal pairs the meet jumps.
    """
    rng = as_rng(rng)
    wj = wm = 0.0
    for _ in range(trials):
        Q, R = random_element(space, rng), random_element(space, rng)
        Q2, R2 = _nudge(Q, rng, eps), _nudge(R, rng, eps)
        wj = max(wj, distance(join(Q, R), join(Q2, R2)))
        wm = max(wm, distance(meet(Q, R), meet(Q2, R2)))
    return Report(
        "continuity",
        [
            CheckRecord.from_violation("join_continuity", wj, tol, trials, eps=eps),
            CheckRecord.from_violation("meet_continuity", wm, tol, trials, eps=eps),
        ],
    )


def check_lattice_suite(space, trials=100, rng=None, tol=1e-9):
    """Every randomized lattice law over ``trials`` instances each."""
    rng = as_rng(rng)
    report = Report("lattice", meta={"sectors": list(_dims_of(space)), "trials": trials})
    report.extend(check_orthomodularity(space, trials, rng, tol))
    dm = dc = at = cov = sas = 0.0
    for _ in range(trials):
        Q, R = random_element(space, rng), random_element(space, rng)
        dm = max(dm, check_de_morgan(Q, R, tol).violation)
        dc = max(dc, check_double_complement(Q, tol).violation)
        at = max(at, check_atomisticity(Q, tol).violation)
        # covering: need a ray outside a proper element
        Qp = Q
        while Qp.dim == sum(Qp.dims):
            Qp = random_element(space, rng)
        rho = SubspaceElement.unit(space).random_ray(rng)
        while Qp.contains(rho, 1e-6):
            rho = SubspaceElement.unit(space).random_ray(rng)
        cov = max(cov, check_covering(rho, Qp, tol).max_violation)
        # Sasaki: sigma not orthogonal to a nonzero element
        Qn = Q
        while Qn.dim == 0:
            Qn = random_element(space, rng)
        sigma = SubspaceElement.unit(space).random_ray(rng)
        while Qn.p_value(sigma) < 1e-3:
            sigma = SubspaceElement.unit(space).random_ray(rng)
        sas = max(sas, check_sasaki_factorization(sigma, Qn, 20, rng, tol).violation)
    for name, v in [
        ("de_morgan", dm),
        ("double_complement", dc),
        ("atomisticity", at),
        ("covering", cov),
        ("sasaki_factorization", sas),
    ]:
        report.add(CheckRecord.from_violation(name, v, tol, trials))
    report.extend(check_join_meet_continuity(space, trials, rng))
    return report


# bases ------------------------------------------------------------------


@dataclass
class BasisReport:
    is_basis: bool
    rank_criterion: bool
    sum_criterion: bool
    max_sum_deviation: float
    size: int
    ambient_dim: int


def basis_report(rays, ambient, samples=100, rng=None, tol=1e-10):
    """Compare the two basis criteria for an orthogonal family in ``ambient``.

    The rank criterion is ``len(rays) == dim(ambient)``; the sum criterion
    checks ``sum_b p(b, sigma) = 1`` at ``samples`` random rays sigma of the
    ambient element plus its own basis columns.
    """
    rng = as_rng(rng)
    rays = list(rays)
    for i, r in enumerate(rays):
        if not ambient.contains(r):
            raise PreconditionError(f"ray {i} lies outside the ambient element")
        for s in rays[:i]:
            if transition_probability(r, s) > tol:
                raise PreconditionError("rays are not pairwise orthogonal")
    probes = ambient.atoms() + [ambient.random_ray(rng) for _ in range(samples if ambient.dim else 0)]
    worst = 0.0
    for sig in probes:
        worst = max(worst, abs(1.0 - sum(transition_probability(b, sig) for b in rays)))
    rank_ok = len(rays) == ambient.dim
    sum_ok = worst <= max(tol, 1e-9)
    return BasisReport(rank_ok and sum_ok, rank_ok, sum_ok, worst, len(rays), ambient.dim)


def basis_check(rays, ambient, samples=100, rng=None, tol=1e-10):
    """True iff ``rays`` is a basis of ``ambient``; both criteria must agree."""
    rep = basis_report(rays, ambient, samples, rng, tol)
    if rep.rank_criterion != rep.sum_criterion:
        raise RuntimeError(
            f"basis criteria disagree (rank {rep.rank_criterion}, sum {rep.sum_criterion})"
        )
    return rep.is_basis


def greedy_orthogonal_family(ambient, rng=None, start=()):
    """Extend ``start`` by random orthogonal rays of ``ambient`` until maximal."""
    rng = as_rng(rng)
    chosen = list(start)
    while True:
        rest = meet(ambient, orthoplement(orthoclosure(chosen, ambient.dims))) if chosen else ambient
        if rest.dim == 0:
            return chosen
        chosen.append(rest.random_ray(rng))
