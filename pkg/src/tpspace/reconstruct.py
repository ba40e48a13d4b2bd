"""Recover a minimal-rank Hilbert-space model from a raw transition kernel.

For an irreducible kernel block ``p`` we look for unit vectors ``v_1..v_n`` in
``C^d`` with ``|<v_i, v_j>|^2 = p_ij``, minimizing

    L(v) = sum_{i<j} (|<v_i, v_j>|^2 - p_ij)^2

by Riemannian gradient descent on the product of unit spheres, trying
``d = 1, 2, ...`` and returning the first rank that fits.  Odd-numbered restarts are
warmed up on the amplitude loss ``sum (|<v_i, v_j>| - sqrt(p_ij))^2``, and
every restart escapes local minima by basin hopping: all rays are perturbed,
the descent is rerun and the result is kept only if the loss drops.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from ._backend import kernels
from .core import PureStateSpace, Ray, TransitionKernel, sectors
from .errors import PreconditionError, ReducibleBlockError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReconstructionConfig:
    max_rank: int = 6
    restarts: int = 20
    max_iterations: int = 20000
    tolerance: float = 1e-9
    grad_tolerance: float = 1e-12
    armijo: float = 1e-4
    backtrack: float = 0.5
    initial_step: float = 0.05
    seed: int = 0
    # give up on a restart when the loss drops by less than this fraction over a window
    stall_ratio: float = 1e-6
    stall_window: int = 200
    warmup_iterations: int = 3000
    # basin hopping inside each restart: perturb all rays, re-descend, keep if better
    kicks: int = 100
    kick_scale: float = 0.3
    kick_patience: int = 30
    kick_iterations: int = 1500
    # kicks shared by all restarts at one rank, so ranks that cannot fit fail fast
    kick_budget: int = 300

    def __post_init__(self):
        for name in ("max_rank", "restarts", "max_iterations", "tolerance", "initial_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("warmup_iterations", "kicks", "kick_patience", "kick_iterations", "kick_budget"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not self.kick_scale >= 0:
            raise ValueError("kick_scale must be nonnegative")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack must lie in (0, 1)")


@dataclass
class ReconstructionResult:
    rays: list
    rank: int
    residual: float
    iterations: int
    converged: bool
    gradient_norm: float = 0.0
    restart: int = 0
    real: bool = False
    loss_history: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "rank": self.rank,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "gradient_norm": self.gradient_norm,
            "restart": self.restart,
            "real": self.real,
        }


def embedding_residual(p, rays):
    """RMS of ``|<v_i, v_j>|^2 - p_ij`` over pairs ``i < j``."""
    p = np.asarray(p.p if isinstance(p, TransitionKernel) else p, dtype=float)
    V = _as_matrix(rays)
    n = V.shape[1]
    if n != p.shape[0]:
        raise PreconditionError(f"{n} rays for a {p.shape[0]}-point kernel")
    if n < 2:
        return 0.0
    R = kernels.overlap_matrix(V) - p
    iu = np.triu_indices(n, 1)
    return float(np.sqrt(np.mean(R[iu] ** 2)))


def _as_matrix(rays):
    if isinstance(rays, np.ndarray):
        return np.ascontiguousarray(rays, dtype=complex)
    return np.ascontiguousarray(
        np.stack([r.vector if isinstance(r, Ray) else np.asarray(r) for r in rays], axis=1),
        dtype=complex,
    )


def gauge_canonicalize(rays, tol=1e-12):
    """Canonical representative modulo phases of each ray and a global unitary.

    Each ray is rephased so its first non-negligible overlap with an earlier
    ray is real and nonnegative; then a global unitary brings the family to
    upper-trapezoidal form with nonnegative real diagonal (so the first ray
    becomes ``e_1``).
    """
    if len(rays) == 0:
        raise PreconditionError("nothing to canonicalize")
    sector = rays[0].sector if isinstance(rays[0], Ray) else 0
    V = _as_matrix(rays).copy()
    d, n = V.shape
    for j in range(1, n):
        for i in range(j):
            ov = np.vdot(V[:, i], V[:, j])
            if abs(ov) > tol:
                V[:, j] *= abs(ov) / ov
                break
    Q, R = np.linalg.qr(V, mode="complete")
    for k in range(min(d, n)):
        if abs(R[k, k]) > tol:
            R[k, :] *= abs(R[k, k]) / R[k, k]
    # the first ray may carry a leftover phase on e_1 when it is the only column
    if abs(R[0, 0]) > tol:
        R[:, 0] *= abs(R[0, 0]) / R[0, 0]
    return [Ray.from_vector(R[:, j], sector) for j in range(n)]


def is_real_configuration(rays, tol=1e-8):
    canon = gauge_canonicalize(rays)
    return max(float(np.max(np.abs(r.vector.imag))) for r in canon) < tol


def orthogonal_clique_size(p, eps=1e-12):
    """Size of a greedily grown mutually orthogonal subset: a lower bound on rank."""
    p = np.asarray(p)
    n = p.shape[0]
    best = 1 if n else 0
    for start in range(n):
        chosen = [start]
        for k in range(n):
            if k not in chosen and all(p[k, c] <= eps for c in chosen):
                chosen.append(k)
        best = max(best, len(chosen))
    return best


def gram_rank_bound(p, tol=1e-9):
    """Lower bound on rank from ``rank(p) <= d^2``.

    ``p_ij = tr(rho_i rho_j)`` is a Gram matrix of vectors in the d^2-dimensional
    space of Hermitian d x d matrices.
    """
    w = np.linalg.eigvalsh(np.asarray(p, dtype=float))
    r = int(np.sum(w > tol * max(1.0, float(w[-1])) * len(w)))
    return max(1, int(np.ceil(np.sqrt(r) - 1e-12)))


def _check_block(p):
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] == 0:
        raise PreconditionError("kernel block must be a nonempty square matrix")
    if np.max(np.abs(p - p.T)) > 1e-12 or np.max(np.abs(np.diag(p) - 1.0)) > 1e-12:
        raise PreconditionError("kernel block must be symmetric with unit diagonal")
    if len(sectors(TransitionKernel(p))) > 1:
        raise ReducibleBlockError("block is reducible; split it with sectors() first")
    return p


def _rgrad(V, G):
    # project each column onto the tangent space of its sphere
    radial = np.real(np.sum(V.conj() * G, axis=0))
    return G - V * radial


def _riemannian_descent(P, V, cfg):
    """Monotone Riemannian GD with BB step and Armijo backtracking."""
    n = V.shape[1]
    npairs = n * (n - 1) / 2
    target = 0.5 * (cfg.tolerance ** 2) * npairs * 1e-4  # polish below the acceptance level
    loss, G = kernels.recon_loss_grad(V, P)
    g = _rgrad(V, G)
    gnorm2 = float(np.sum(np.abs(g) ** 2))
    step = cfg.initial_step
    history = [loss]
    it = 0
    prev_V = prev_g = None
    while it < cfg.max_iterations:
        if loss <= target or np.sqrt(gnorm2) <= cfg.grad_tolerance:
            break
        if prev_V is not None:
            s = V - prev_V
            y = g - prev_g
            sy = float(np.real(np.vdot(s, y)))
            if sy > 0:
                step = float(np.real(np.vdot(s, s))) / sy
        step = min(max(step, 1e-8), 1e3)
        while True:
            W = V - step * g
            W /= np.linalg.norm(W, axis=0)
            new_loss, new_G = kernels.recon_loss_grad(W, P)
            if new_loss <= loss - cfg.armijo * step * gnorm2:
                break
            step *= cfg.backtrack
            if step < 1e-14:
                # no descent available: a critical point up to rounding
                return V, loss, np.sqrt(gnorm2), it, history
        prev_V, prev_g = V, g
        V, loss = np.ascontiguousarray(W), new_loss
        g = _rgrad(V, new_G)
        gnorm2 = float(np.sum(np.abs(g) ** 2))
        history.append(loss)
        it += 1
        w = cfg.stall_window
        if it > w and history[-w - 1] - loss < cfg.stall_ratio * history[-w - 1] and loss > target * 1e4:
            break
    return V, loss, float(np.sqrt(gnorm2)), it, history


def _amplitude_loss_grad(V, M):
    G = V.conj().T @ V
    A = np.abs(G)
    np.fill_diagonal(A, 1.0)
    D = A - M
    np.fill_diagonal(D, 0.0)
    return 0.5 * float(np.sum(D * D)), 2.0 * V @ (D / np.maximum(A, 1e-12) * G)


def _amplitude_warmup(M, V, cfg):
    loss, G = _amplitude_loss_grad(V, M)
    g = _rgrad(V, G)
    step = cfg.initial_step
    prev_V = prev_g = None
    for _ in range(cfg.warmup_iterations):
        gnorm2 = float(np.sum(np.abs(g) ** 2))
        if gnorm2 < 1e-26:
            break
        if prev_V is not None:
            s, y = V - prev_V, g - prev_g
            sy = float(np.real(np.vdot(s, y)))
            if sy > 0:
                step = float(np.real(np.vdot(s, s))) / sy
        step = min(max(step, 1e-8), 1e3)
        while True:
            W = V - step * g
            W /= np.linalg.norm(W, axis=0)
            new_loss, new_G = _amplitude_loss_grad(W, M)
            if new_loss <= loss - cfg.armijo * step * gnorm2:
                break
            step *= cfg.backtrack
            if step < 1e-14:
                return V
        prev_V, prev_g = V, g
        V, loss, g = W, new_loss, _rgrad(W, new_G)
    return np.ascontiguousarray(V)


def _basin_hop(P, V, loss, cfg, rng, kicks):
    """Perturb every ray, re-descend, keep improvements; returns (V, loss, kicks used)."""
    n = V.shape[1]
    target = 0.5 * (cfg.tolerance ** 2) * n * (n - 1) / 2 * 1e-4
    inner = replace(cfg, max_iterations=cfg.kick_iterations)
    idle = 0
    for k in range(kicks):
        if loss <= target or idle >= cfg.kick_patience:
            return V, loss, k
        noise = rng.normal(size=V.shape) + 1j * rng.normal(size=V.shape)
        W = V + cfg.kick_scale * noise
        W = np.ascontiguousarray(W / np.linalg.norm(W, axis=0))
        W, w_loss, *_ = _riemannian_descent(P, W, inner)
        if w_loss < loss * (1 - 1e-6):
            V, loss, idle = W, w_loss, 0
        else:
            idle += 1
    return V, loss, kicks


def _random_start(rng, d, n):
    V = rng.normal(size=(d, n)) + 1j * rng.normal(size=(d, n))
    return np.ascontiguousarray(V / np.linalg.norm(V, axis=0))


def reconstruct_sector(p, cfg=None, sector=0):
    """Minimal-rank unit vectors reproducing one irreducible kernel block."""
    cfg = cfg or ReconstructionConfig()
    p = _check_block(p.p if isinstance(p, TransitionKernel) else p)
    n = p.shape[0]
    P = np.ascontiguousarray(p)
    if n == 1:
        return ReconstructionResult([Ray(sector, np.ones(1))], 1, 0.0, 0, True, real=True)
    best = None
    lower = max(orthogonal_clique_size(p), gram_rank_bound(p))
    M = np.sqrt(np.clip(P, 0.0, None))
    for d in range(1, cfg.max_rank + 1):
        if d < lower:
            continue
        budget = cfg.kick_budget
        for restart in range(cfg.restarts):
            rng = np.random.default_rng([cfg.seed, d, restart])
            V0 = _random_start(rng, d, n)
            # alternate: neither start family dominates across kernels
            if cfg.warmup_iterations and d > 1 and restart % 2 == 1:
                V0 = _amplitude_warmup(M, V0, cfg)
            V, loss, gnorm, its, hist = _riemannian_descent(P, V0, cfg)
            if budget > 0 and d > 1:
                V, loss, used = _basin_hop(P, V, loss, cfg, rng, min(cfg.kicks, budget))
                budget -= used
                hist = hist + [loss]
                gnorm = float(np.linalg.norm(_rgrad(V, kernels.recon_loss_grad(V, P)[1])))
            res = embedding_residual(p, V)
            cand = (res, d, restart, V, gnorm, its, hist)
            # a higher rank must do clearly better to displace a lower one
            if best is None or res < best[0] * (1 - 1e-6):
                best = cand
            if res < cfg.tolerance:
                rays = gauge_canonicalize([Ray.from_vector(V[:, j], sector) for j in range(n)])
                log.debug("rank %d fits after %d restarts (residual %.3g)", d, restart + 1, res)
                return ReconstructionResult(
                    rays, d, embedding_residual(p, rays), its, True, gnorm, restart,
                    is_real_configuration(rays), hist,
                )
        log.debug("rank %d: best residual %.3g", d, best[0])
    res, d, restart, V, gnorm, its, hist = best
    rays = gauge_canonicalize([Ray.from_vector(V[:, j], sector) for j in range(n)])
    return ReconstructionResult(
        rays, d, res, its, False, gnorm, restart, is_real_configuration(rays), hist
    )


@dataclass
class KernelReconstruction:
    space: PureStateSpace
    blocks: list
    results: list

    @property
    def converged(self):
        return all(r.converged for r in self.results)

    @property
    def points(self):
        return self.space.points

    def residual(self, K):
        from .core import kernel_from_points

        R = kernel_from_points(self.space).p - K.p
        iu = np.triu_indices(K.n, 1)
        return float(np.sqrt(np.mean(R[iu] ** 2))) if K.n > 1 else 0.0


def reconstruct(K, cfg=None):
    """Split ``K`` into sectors and reconstruct each block."""
    cfg = cfg or ReconstructionConfig()
    blocks = sectors(K)
    results = []
    points = [None] * K.n
    dims = []
    for a, idx in enumerate(blocks):
        r = reconstruct_sector(K.block(idx).p, cfg, sector=a)
        results.append(r)
        dims.append(r.rank)
        for i, ray in zip(idx, r.rays):
            points[i] = ray
    space = PureStateSpace(tuple(dims), points=points)
    return KernelReconstruction(space, blocks, results)
