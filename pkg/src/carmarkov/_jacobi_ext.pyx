# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled cyclic Jacobi sweep for complex Hermitian matrices.

Only the two rows touched by a rotation are recomputed; the matching columns
are filled in by Hermitian symmetry.  Eigenvectors are accumulated as rows of
a transposed buffer so every inner loop is contiguous.
"""

import numpy as np

from libc.math cimport sqrt, fabs, hypot

cdef double EPS = 2.220446049250313e-16


def jacobi_eigh(double complex[:, ::1] m, int max_sweeps=100):
    """Row-cyclic Jacobi.  Returns (eigenvalues, eigenvectors, sweeps), unsorted.

    ``sweeps`` is -1 when ``max_sweeps`` was exhausted.
    """
    cdef Py_ssize_t n = m.shape[0]
    a_arr = np.array(m, dtype=np.complex128, copy=True, order="C")
    vt_arr = np.eye(n, dtype=np.complex128)
    cdef double[:, ::1] ar = a_arr.view(np.float64)
    cdef double[:, ::1] vr = vt_arr.view(np.float64)
    cdef Py_ssize_t p, q, k
    cdef double fro = 0.0, floor, g, app, aqq, zeta, t, c, s
    cdef double phr, phi, xr, xi, yr, yi
    cdef int sweep, rotated

    for p in range(n):
        for k in range(2 * n):
            fro += ar[p, k] * ar[p, k]
    fro = sqrt(fro)
    if fro == 0.0:
        return np.zeros(n), vt_arr, 0
    floor = 1e-18 * fro

    for sweep in range(max_sweeps):
        rotated = 0
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = hypot(ar[p, 2 * q], ar[p, 2 * q + 1])
                app = ar[p, 2 * p]
                aqq = ar[q, 2 * q]
                if g <= floor or g <= EPS * sqrt(fabs(app) * fabs(aqq)):
                    continue
                rotated = 1
                zeta = (aqq - app) / (2.0 * g)
                t = 1.0 / (fabs(zeta) + sqrt(1.0 + zeta * zeta))
                if zeta < 0.0:
                    t = -t
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                # s * e^{i phi}
                phr = s * ar[p, 2 * q] / g
                phi = s * ar[p, 2 * q + 1] / g
                for k in range(n):
                    if k == p or k == q:
                        continue
                    xr = ar[p, 2 * k]
                    xi = ar[p, 2 * k + 1]
                    yr = ar[q, 2 * k]
                    yi = ar[q, 2 * k + 1]
                    # row p <- c x - s e^{i phi} y ; row q <- s e^{-i phi} x + c y
                    ar[p, 2 * k] = c * xr - (phr * yr - phi * yi)
                    ar[p, 2 * k + 1] = c * xi - (phr * yi + phi * yr)
                    ar[q, 2 * k] = (phr * xr + phi * xi) + c * yr
                    ar[q, 2 * k + 1] = (phr * xi - phi * xr) + c * yi
                    ar[k, 2 * p] = ar[p, 2 * k]
                    ar[k, 2 * p + 1] = -ar[p, 2 * k + 1]
                    ar[k, 2 * q] = ar[q, 2 * k]
                    ar[k, 2 * q + 1] = -ar[q, 2 * k + 1]
                for k in range(n):
                    # V[:, p] <- c V[:, p] - s e^{-i phi} V[:, q]; V[:, q] <- s e^{i phi} V[:, p] + c V[:, q]
                    xr = vr[p, 2 * k]
                    xi = vr[p, 2 * k + 1]
                    yr = vr[q, 2 * k]
                    yi = vr[q, 2 * k + 1]
                    vr[p, 2 * k] = c * xr - (phr * yr + phi * yi)
                    vr[p, 2 * k + 1] = c * xi - (phr * yi - phi * yr)
                    vr[q, 2 * k] = (phr * xr - phi * xi) + c * yr
                    vr[q, 2 * k + 1] = (phr * xi + phi * xr) + c * yi
                ar[p, 2 * p] = app - t * g
                ar[q, 2 * q] = aqq + t * g
                ar[p, 2 * p + 1] = 0.0
                ar[q, 2 * q + 1] = 0.0
                ar[p, 2 * q] = 0.0
                ar[p, 2 * q + 1] = 0.0
                ar[q, 2 * p] = 0.0
                ar[q, 2 * p + 1] = 0.0
        if not rotated:
            return np.real(np.diag(a_arr)).copy(), vt_arr.T.copy(), sweep + 1
    return np.real(np.diag(a_arr)).copy(), vt_arr.T.copy(), -1
