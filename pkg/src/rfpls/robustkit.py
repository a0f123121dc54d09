"""Robust location/scale estimates and weighted-likelihood observation weights."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _backend
from .exceptions import InvalidArgumentError, NumericalError

MAD_CONSISTENCY = 1.4826
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_DELTA_FLOOR = -1.0 + 1e-12


@dataclass(frozen=True)
class L1MedianInfo:
    converged: bool
    n_iter: int
    grad_norm: float


def l1_median(rows, tol: float = 1e-9, max_iter: int = 500, full_output: bool = False):
    """Spatial median: the point minimising the summed Euclidean distance to the rows.

    Weiszfeld iteration started at the coordinatewise median. With
    ``full_output`` also returns an :class:`L1MedianInfo`; a non-converged run
    returns the last (lowest-objective) iterate.
    """
    X = np.ascontiguousarray(rows, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] < 1:
        raise InvalidArgumentError("l1_median needs at least one row")
    if not np.all(np.isfinite(X)):
        raise InvalidArgumentError("l1_median needs finite entries")
    if X.shape[0] == 1:
        m, info = X[0].copy(), L1MedianInfo(True, 0, 0.0)
    else:
        m, n_iter, grad = _backend.weiszfeld(X, np.median(X, axis=0), tol, max_iter)
        info = L1MedianInfo(grad <= tol, int(n_iter), float(grad))
    return (m, info) if full_output else m


def mad_scale(x) -> float:
    """Consistency-scaled median absolute deviation. Returns 0.0 when degenerate."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size < 1:
        raise InvalidArgumentError("mad_scale needs at least one value")
    return MAD_CONSISTENCY * float(np.median(np.abs(x - np.median(x))))


def gaussian_kernel(e, u, v):
    if np.any(np.asarray(v) <= 0):
        raise InvalidArgumentError("kernel bandwidth must be positive")
    z = (np.asarray(e) - u) / v
    return np.exp(-0.5 * z * z) / (_SQRT_2PI * v)


def kde_at_residuals(residuals, v: float) -> np.ndarray:
    """``g*(e_i) = (1/n) sum_j tau(e_i; e_j, v)``."""
    if v <= 0:
        raise InvalidArgumentError("kernel bandwidth must be positive")
    r = np.asarray(residuals, dtype=np.float64).reshape(-1, 1)
    if r.shape[0] < 1:
        raise InvalidArgumentError("need at least one residual")
    return _backend.kde_columns(r, np.array([v], dtype=np.float64))[:, 0]


def smoothed_model_density(e, sigma: float, v: float):
    """Gaussian kernel convolved with the N(0, sigma^2) model: N(0, sigma^2 + v^2) density."""
    if sigma <= 0 or v <= 0:
        raise InvalidArgumentError("sigma and v must be positive")
    s = math.sqrt(sigma * sigma + v * v)
    z = np.asarray(e, dtype=np.float64) / s
    return np.exp(-0.5 * z * z) / (_SQRT_2PI * s)


def pearson_residuals(g_star, f_star) -> np.ndarray:
    g_star = np.asarray(g_star, dtype=np.float64)
    f_star = np.asarray(f_star, dtype=np.float64)
    if np.any(f_star <= 0):
        raise NumericalError("smoothed model density must be positive")
    return g_star / f_star


def hellinger_weight(delta, raf: str = "plain"):
    """``min{1, [A(delta) + 1]^+ / (delta + 1)}`` with the Hellinger RAF.

    ``raf="plain"`` uses ``A(d) = 2 (d + 1)^{1/2} - 1``; ``raf="lindsay"`` uses
    ``A(d) = 2 [(d + 1)^{1/2} - 1]``.
    """
    d = np.maximum(np.asarray(delta, dtype=np.float64), _DELTA_FLOOR)
    root = np.sqrt(d + 1.0)
    if raf == "plain":
        A = 2.0 * root - 1.0
    elif raf == "lindsay":
        A = 2.0 * (root - 1.0)
    else:
        raise InvalidArgumentError(f"unknown residual adjustment function {raf!r}")
    w = np.minimum(1.0, np.maximum(A + 1.0, 0.0) / (d + 1.0))
    return float(w) if w.ndim == 0 else w


def observation_weights(residual_matrix, gamma: float = 1.0, raf: str = "plain",
                        return_columns: bool = False):
    """Row weights: per-column Hellinger weights, then the median across columns.

    Column k uses ``sigma_k = MAD(column k)`` and bandwidth ``v_k = sqrt(gamma) sigma_k``.
    Columns with zero MAD carry no information and get weight 1.
    """
    R = np.ascontiguousarray(residual_matrix, dtype=np.float64)
    if R.ndim == 1:
        R = R[:, None]
    n, K = R.shape
    if n < 2:
        raise InvalidArgumentError("observation_weights needs n >= 2")
    if gamma <= 0:
        raise InvalidArgumentError("gamma must be positive")
    sigma = np.array([mad_scale(R[:, k]) for k in range(K)])
    ok = sigma > 0
    if not ok.any():
        raise NumericalError("every residual column has zero MAD")
    if not ok.all():
        warnings.warn(f"{np.count_nonzero(~ok)} residual column(s) with zero MAD get unit weight",
                      RuntimeWarning, stacklevel=2)
    W = np.ones((n, K))
    Rk = np.ascontiguousarray(R[:, ok])
    s = sigma[ok]
    v = np.sqrt(gamma * s * s)
    g = _backend.kde_columns(Rk, v)
    f = np.exp(-0.5 * Rk * Rk / (s * s + v * v)) / (_SQRT_2PI * np.sqrt(s * s + v * v))
    # tail underflow of f means the residual is overwhelmingly discrepant
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        delta = np.where(f > 0, g / np.where(f > 0, f, 1.0), np.inf)
    W[:, ok] = np.nan_to_num(hellinger_weight(np.minimum(delta, 1e300), raf))
    w = np.median(W, axis=1)
    return (w, W) if return_columns else w


def trimmed_mean(x, q: float = 0.8) -> float:
    """Mean of the smallest ``floor(q * n)`` values."""
    if not 0 < q <= 1:
        raise InvalidArgumentError("q must lie in (0, 1]")
    x = np.sort(np.asarray(x, dtype=np.float64).ravel())
    keep = int(math.floor(q * x.size + 1e-9))
    if keep < 1:
        raise InvalidArgumentError("trimming leaves no values")
    return float(x[:keep].mean())
