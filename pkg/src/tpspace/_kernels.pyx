# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.  Same contracts as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

FS_NORMALIZATION = 1.0


cdef inline double abs2(double complex x) nogil:
    return x.real * x.real + x.imag * x.imag


def overlap_matrix(const double complex[:, ::1] V):
    cdef Py_ssize_t d = V.shape[0], n = V.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double complex s
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] P = out
    with nogil:
        for i in range(n):
            P[i, i] = 0.0
            for k in range(d):
                P[i, i] += abs2(V[k, i])
            P[i, i] = P[i, i] * P[i, i]
            for j in range(i + 1, n):
                s = 0.0
                for k in range(d):
                    s = s + V[k, i].conjugate() * V[k, j]
                P[i, j] = abs2(s)
                P[j, i] = P[i, j]
    return out


def recon_loss_grad(const double complex[:, ::1] V, const double[:, ::1] P):
    cdef Py_ssize_t d = V.shape[0], n = V.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double complex g
    cdef double r, loss = 0.0
    grad_arr = np.zeros((d, n), dtype=np.complex128)
    cdef double complex[:, ::1] grad = grad_arr
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                g = 0.0
                for k in range(d):
                    g = g + V[k, i].conjugate() * V[k, j]
                r = abs2(g) - P[i, j]
                loss += r * r
                # d/dv_i picks up v_j conj(g); d/dv_j picks up v_i g
                for k in range(d):
                    grad[k, i] = grad[k, i] + 4.0 * r * g.conjugate() * V[k, j]
                    grad[k, j] = grad[k, j] + 4.0 * r * g * V[k, i]
    return loss, grad_arr


cdef void chart_field(const double complex[:, ::1] A, double complex[::1] z,
                      Py_ssize_t pivot, double scale,
                      double complex[::1] psi, double complex[::1] row,
                      double complex[::1] out) nogil:
    cdef Py_ssize_t d = A.shape[0], m = d - 1
    cdef Py_ssize_t i, j, c
    cdef double norm2 = 0.0, h = 0.0
    cdef double complex zc = 0.0, dh
    for i in range(d):
        if i < pivot:
            psi[i] = z[i]
        elif i == pivot:
            psi[i] = 1.0
        else:
            psi[i] = z[i - 1]
        norm2 += abs2(psi[i])
    for j in range(d):
        row[j] = 0.0
        for i in range(d):
            row[j] = row[j] + psi[i].conjugate() * A[i, j]
        h += (row[j] * psi[j]).real
    h /= norm2
    # out <- conj(dh) over non-pivot slots, then apply W = (1+|z|^2)(I + z z^H)
    c = 0
    for j in range(d):
        if j == pivot:
            continue
        dh = (row[j] - h * psi[j].conjugate()) / norm2
        out[c] = dh.conjugate()
        zc = zc + z[c].conjugate() * out[c]
        c += 1
    for c in range(m):
        out[c] = -1j * scale * norm2 * (out[c] + z[c] * zc)


def rk4_segment(const double complex[:, ::1] A, z0, Py_ssize_t pivot, double hbar,
                double dt, Py_ssize_t nsteps, double max_modulus):
    cdef Py_ssize_t d = A.shape[0], m = d - 1
    cdef Py_ssize_t n, c, taken = nsteps
    cdef double scale = FS_NORMALIZATION / hbar, big
    out_arr = np.empty((nsteps + 1, m), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef double complex[::1] z = np.array(z0, dtype=np.complex128)
    cdef double complex[::1] tmp = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] k1 = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] k2 = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] k3 = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] k4 = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] psi = np.empty(d, dtype=np.complex128)
    cdef double complex[::1] row = np.empty(d, dtype=np.complex128)
    with nogil:
        for c in range(m):
            out[0, c] = z[c]
        for n in range(nsteps):
            chart_field(A, z, pivot, scale, psi, row, k1)
            for c in range(m):
                tmp[c] = z[c] + 0.5 * dt * k1[c]
            chart_field(A, tmp, pivot, scale, psi, row, k2)
            for c in range(m):
                tmp[c] = z[c] + 0.5 * dt * k2[c]
            chart_field(A, tmp, pivot, scale, psi, row, k3)
            for c in range(m):
                tmp[c] = z[c] + dt * k3[c]
            chart_field(A, tmp, pivot, scale, psi, row, k4)
            big = 0.0
            for c in range(m):
                z[c] = z[c] + (dt / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c])
                out[n + 1, c] = z[c]
                if sqrt(abs2(z[c])) > big:
                    big = sqrt(abs2(z[c]))
            if m > 0 and big > max_modulus:
                taken = n + 1
                break
    return out_arr[: taken + 1]
