# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels in ``rfpls._fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, M_PI

cnp.import_array()


cdef Py_ssize_t _find_span(double x, const double[::1] knots, Py_ssize_t order,
                           Py_ssize_t n_basis) noexcept nogil:
    cdef Py_ssize_t lo = order - 1, hi = n_basis, mid
    if x >= knots[n_basis]:
        return n_basis - 1
    if x <= knots[order - 1]:
        return order - 1
    # invariant: knots[lo] <= x < knots[hi]
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if knots[mid] <= x:
            lo = mid
        else:
            hi = mid
    return lo


def bspline_design(x, knots, Py_ssize_t order):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] kv = np.ascontiguousarray(knots, dtype=np.float64)
    cdef Py_ssize_t n_basis = kv.shape[0] - order
    cdef Py_ssize_t npts = xv.shape[0]
    out_arr = np.zeros((npts, n_basis), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] N = np.zeros(order)
    cdef double[::1] left = np.zeros(order)
    cdef double[::1] right = np.zeros(order)
    cdef Py_ssize_t p, i, j, r
    cdef double xp, saved, temp
    with nogil:
        for p in range(npts):
            xp = xv[p]
            i = _find_span(xp, kv, order, n_basis)
            N[0] = 1.0
            for j in range(1, order):
                left[j] = xp - kv[i + 1 - j]
                right[j] = kv[i + j] - xp
                saved = 0.0
                for r in range(j):
                    temp = N[r] / (right[r + 1] + left[j - r])
                    N[r] = saved + right[r + 1] * temp
                    saved = left[j - r] * temp
                N[j] = saved
            for r in range(order):
                out[p, i - order + 1 + r] = N[r]
    return out_arr


def weiszfeld(X, m0, double tol, Py_ssize_t max_iter):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0], K = Xv.shape[1]
    m_arr = np.array(m0, dtype=np.float64)
    cdef double[::1] m = m_arr
    cdef double[::1] R = np.zeros(K)
    cdef double[::1] T = np.zeros(K)
    cdef Py_ssize_t it = 0, i, k, eta
    cdef double d, winv, wsum, r, grad_norm = 1e300, lam, diff
    with nogil:
        while True:
            for k in range(K):
                R[k] = 0.0
                T[k] = 0.0
            wsum = 0.0
            eta = 0
            for i in range(n):
                d = 0.0
                for k in range(K):
                    diff = Xv[i, k] - m[k]
                    d += diff * diff
                d = sqrt(d)
                if d > 1e-12:
                    winv = 1.0 / d
                    wsum += winv
                    for k in range(K):
                        R[k] += (Xv[i, k] - m[k]) * winv
                        T[k] += Xv[i, k] * winv
                else:
                    eta += 1
            r = 0.0
            for k in range(K):
                r += R[k] * R[k]
            r = sqrt(r)
            if eta > 0:
                grad_norm = r - eta if r > eta else 0.0
            else:
                grad_norm = r
            if grad_norm <= tol or it == max_iter or wsum == 0.0:
                break
            if eta > 0:
                lam = eta / r if eta < r else 1.0
                for k in range(K):
                    m[k] = (1.0 - lam) * T[k] / wsum + lam * m[k]
            else:
                for k in range(K):
                    m[k] = T[k] / wsum
            it += 1
    return m_arr, it, grad_norm


def kde_columns(R, bandwidths):
    cdef const double[:, ::1] Rv = np.ascontiguousarray(R, dtype=np.float64)
    cdef const double[::1] bw = np.ascontiguousarray(bandwidths, dtype=np.float64)
    cdef Py_ssize_t n = Rv.shape[0], K = Rv.shape[1], i, j, k
    out_arr = np.empty((n, K), dtype=np.float64)
    acc_arr = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] acc = acc_arr
    cdef double v, z, e, norm, ri
    with nogil:
        for k in range(K):
            v = bw[k]
            norm = n * sqrt(2.0 * M_PI) * v
            for i in range(n):
                acc[i] = 1.0  # the j = i term
            # the kernel is symmetric, so each pair is evaluated once
            for i in range(n):
                ri = Rv[i, k]
                for j in range(i + 1, n):
                    z = (ri - Rv[j, k]) / v
                    e = exp(-0.5 * z * z)
                    acc[i] += e
                    acc[j] += e
            for i in range(n):
                out[i, k] = acc[i] / norm
    return out_arr
