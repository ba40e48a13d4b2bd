"""Pure numpy implementations of the inner loops.

These are the reference versions of the routines in ``_kernels.pyx``; the
compiled module must agree with them to rounding error.
"""

import numpy as np

# Normalization of the Fubini-Study Poisson tensor in affine coordinates,
# relative to the Kaehler potential log(1 + |z|^2).  Fitted once against
# i<[A, B]> on CP^1 (see poisson.fit_fs_normalization) and frozen here.
FS_NORMALIZATION = 1.0


def overlap_matrix(V):
    """Return the matrix of squared overlaps ``|<v_i, v_j>|^2``.

    ``V`` holds one unit vector per column.
    """
    G = V.conj().T @ V
    return G.real ** 2 + G.imag ** 2


def recon_loss_grad(V, P):
    """Loss ``sum_{i<j} (|<v_i, v_j>|^2 - p_ij)^2`` and its gradient.

    The gradient is returned as a complex array shaped like ``V`` whose real
    and imaginary parts are the partial derivatives with respect to the real
    and imaginary parts of ``V``.
    """
    G = V.conj().T @ V
    R = G.real ** 2 + G.imag ** 2 - P
    np.fill_diagonal(R, 0.0)
    loss = 0.5 * float(np.sum(R * R))
    grad = 4.0 * (V @ (R * G))
    return loss, grad


def _chart_field(A, z, pivot, scale):
    d = A.shape[0]
    psi = np.empty(d, dtype=complex)
    psi[:pivot] = z[:pivot]
    psi[pivot] = 1.0
    psi[pivot + 1:] = z[pivot:]
    norm2 = float(np.vdot(psi, psi).real)
    row = psi.conj() @ A
    h = float((row @ psi).real) / norm2
    dh = np.delete((row - h * psi.conj()) / norm2, pivot)
    r2 = norm2 - 1.0
    # W = (1 + |z|^2)(I + z z^H); field = -i * scale * W conj(dh)
    cdh = dh.conj()
    w = (1.0 + r2) * (cdh + z * np.vdot(z, cdh))
    return -1j * scale * w


def rk4_segment(A, z0, pivot, hbar, dt, nsteps, max_modulus):
    """Integrate the Hamiltonian vector field of ``<A>`` in one affine chart.

    Classical fixed-step RK4.  Stops early (after the offending step) once a
    coordinate exceeds ``max_modulus`` so the caller can change charts.
    Returns the array of visited coordinates, including ``z0``.
    """
    scale = FS_NORMALIZATION / hbar
    z = np.array(z0, dtype=complex)
    out = np.empty((nsteps + 1, z.shape[0]), dtype=complex)
    out[0] = z
    for n in range(nsteps):
        k1 = _chart_field(A, z, pivot, scale)
        k2 = _chart_field(A, z + 0.5 * dt * k1, pivot, scale)
        k3 = _chart_field(A, z + 0.5 * dt * k2, pivot, scale)
        k4 = _chart_field(A, z + dt * k3, pivot, scale)
        z = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[n + 1] = z
        if z.shape[0] and np.max(np.abs(z)) > max_modulus:
            return out[: n + 2]
    return out
