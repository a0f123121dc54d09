"""Pure numpy implementations of the hot kernels.

These mirror ``rfpls._kernels`` one-for-one and are used when the compiled
extension is unavailable or ``RFPLS_PURE_PYTHON`` is set.
"""
import math

import numpy as np

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def find_spans(x, knots, order):
    """Index ``i`` of the knot span ``[knots[i], knots[i+1])`` holding each point.

    The right end of the domain is assigned to the last non-empty span.
    """
    n_basis = len(knots) - order
    spans = np.searchsorted(knots, x, side="right") - 1
    return np.clip(spans, order - 1, n_basis - 1)


def bspline_design(x, knots, order):
    x = np.ascontiguousarray(x, dtype=np.float64)
    knots = np.ascontiguousarray(knots, dtype=np.float64)
    n_basis = len(knots) - order
    spans = find_spans(x, knots, order)
    npts = x.shape[0]
    N = np.zeros((npts, order))
    N[:, 0] = 1.0
    left = np.zeros((npts, order))
    right = np.zeros((npts, order))
    for j in range(1, order):
        left[:, j] = x - knots[spans + 1 - j]
        right[:, j] = knots[spans + j] - x
        saved = np.zeros(npts)
        for r in range(j):
            temp = N[:, r] / (right[:, r + 1] + left[:, j - r])
            N[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        N[:, j] = saved
    out = np.zeros((npts, n_basis))
    rows = np.arange(npts)
    for r in range(order):
        out[rows, spans - order + 1 + r] = N[:, r]
    return out


def weiszfeld(X, m0, tol, max_iter):
    """Weiszfeld iteration with the Vardi-Zhang fix for coincident points.

    Returns ``(median, n_iter, grad_norm)``.
    """
    X = np.asarray(X, dtype=np.float64)
    m = np.array(m0, dtype=np.float64)
    grad_norm = np.inf
    it = 0
    for it in range(max_iter + 1):
        diff = X - m
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        far = d > 1e-12
        eta = X.shape[0] - np.count_nonzero(far)
        inv = 1.0 / d[far]
        R = (diff[far] * inv[:, None]).sum(axis=0)
        r = math.sqrt(float(R @ R))
        grad_norm = max(r - eta, 0.0) if eta else r
        if grad_norm <= tol or it == max_iter or inv.size == 0:
            break
        T = (X[far] * inv[:, None]).sum(axis=0) / inv.sum()
        if eta:
            lam = min(1.0, eta / r)
            m = (1.0 - lam) * T + lam * m
        else:
            m = T
    return m, it, grad_norm


def kde_columns(R, bandwidths):
    """Gaussian KDE of each column of ``R`` evaluated at that column's own entries."""
    R = np.asarray(R, dtype=np.float64)
    n, K = R.shape
    out = np.empty((n, K))
    for k in range(K):
        v = bandwidths[k]
        z = (R[:, k][:, None] - R[:, k][None, :]) / v
        out[:, k] = np.exp(-0.5 * z * z).sum(axis=1) / (n * _SQRT_2PI * v)
    return out
