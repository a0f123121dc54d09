"""SIMPLS and its iteratively reweighted robust variant (IRSIMPLS)."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Literal, Optional

import numpy as np

from .exceptions import InvalidArgumentError, RankError
from .robustkit import l1_median, mad_scale, observation_weights


@dataclass(frozen=True)
class PlsFit:
    """Result of :func:`simpls_fit` or :func:`irsimpls_fit`.

    ``omega_hat`` maps centered (unscaled) predictor rows to centered response
    rows. The per-component arrays live in the scaled, weighted space the last
    SIMPLS pass ran in.
    """

    omega_hat: np.ndarray
    n_components: int
    x_weights: np.ndarray
    x_scores: np.ndarray
    x_loadings: np.ndarray
    y_loadings: np.ndarray
    x_center: np.ndarray
    x_scale: np.ndarray
    y_center: np.ndarray
    obs_weights: np.ndarray
    converged: bool = True
    n_reweight_iters: int = 0
    objective: float = float("nan")
    initial_weights: Optional[np.ndarray] = None
    start_objectives: tuple = ()
    diagnostics: tuple = ()


@dataclass(frozen=True)
class IrsimplsConfig:
    """Tuning constants for :func:`irsimpls_fit`.

    ``subsample_size=None`` means ``max(4 (h + 1), ceil(n / 4))``.
    ``center``, ``scale_x`` and ``fixed_weights`` exist to collapse the
    algorithm onto plain SIMPLS; the defaults follow the robust recipe.
    """

    n_components: int = 1
    gamma: float = 1.0
    subsample_size: Optional[int] = None
    n_starts: int = 5
    convergence_tol: float = 1e-4
    max_reweight_iters: int = 50
    rng_seed: int = 0
    raf: Literal["plain", "lindsay"] = "plain"
    center: Literal["l1", "mean"] = "l1"
    scale_x: bool = True
    fixed_weights: bool = False

    def __post_init__(self):
        if self.n_components < 1:
            raise InvalidArgumentError("n_components must be >= 1")
        if self.gamma <= 0:
            raise InvalidArgumentError("gamma must be positive")
        if self.n_starts < 1:
            raise InvalidArgumentError("n_starts must be >= 1")
        if self.convergence_tol <= 0:
            raise InvalidArgumentError("convergence_tol must be positive")
        if self.max_reweight_iters < 0:
            raise InvalidArgumentError("max_reweight_iters must be >= 0")
        if self.subsample_size is not None and self.subsample_size < 2:
            raise InvalidArgumentError("subsample_size must be >= 2")
        if self.center not in ("l1", "mean"):
            raise InvalidArgumentError(f"unknown centering {self.center!r}")

    def resolved_subsample(self, n: int) -> int:
        if self.subsample_size is not None:
            if self.subsample_size > n:
                raise InvalidArgumentError(f"subsample_size {self.subsample_size} exceeds n={n}")
            return self.subsample_size
        return min(n, max(4 * (self.n_components + 1), math.ceil(n / 4)))


def _dominant_direction(S: np.ndarray) -> np.ndarray:
    """Dominant left singular vector of ``S``, sign fixed so the largest entry is positive."""
    P, Q = S.shape
    if Q <= P:
        _, vecs = np.linalg.eigh(S.T @ S)
        r = S @ vecs[:, -1]
    else:
        _, vecs = np.linalg.eigh(S @ S.T)
        r = vecs[:, -1]
    r = r / np.linalg.norm(r)
    if r[np.argmax(np.abs(r))] < 0:
        r = -r
    return r


def _simpls_core(X: np.ndarray, Y: np.ndarray, h: int):
    """de Jong's SIMPLS on already centered data. Returns ``(R, T, P, Q)``."""
    n, nx = X.shape
    ny = Y.shape[1]
    S = X.T @ Y
    s0 = np.linalg.norm(S)
    if s0 == 0 or not np.isfinite(s0):
        raise RankError("cross-covariance matrix X'Y is zero", max_rank=0)
    R = np.zeros((nx, h))
    T = np.zeros((n, h))
    Pl = np.zeros((nx, h))
    Ql = np.zeros((ny, h))
    V = np.zeros((nx, h))
    for a in range(h):
        if np.linalg.norm(S) <= 1e-12 * s0:
            raise RankError(f"only {a} PLS components are achievable, {h} requested", max_rank=a)
        r = _dominant_direction(S)
        t = X @ r
        nt = np.linalg.norm(t)
        if nt <= 1e-12 * max(1.0, np.linalg.norm(X)):
            raise RankError(f"only {a} PLS components are achievable, {h} requested", max_rank=a)
        t /= nt
        r /= nt
        p = X.T @ t
        v = p.copy()
        for _ in range(2):
            v -= V[:, :a] @ (V[:, :a].T @ v)
        v /= np.linalg.norm(v)
        S = S - np.outer(v, v @ S)
        R[:, a], T[:, a], Pl[:, a], Ql[:, a], V[:, a] = r, t, p, Y.T @ t, v
    return R, T, Pl, Ql


def _as_2d(A, name):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise InvalidArgumentError(f"{name} must be a matrix")
    if not np.all(np.isfinite(A)):
        raise InvalidArgumentError(f"{name} contains non-finite values")
    return A


def _check_h(X, h):
    max_h = min(X.shape)
    if h < 1:
        raise InvalidArgumentError("need at least one component")
    if h > max_h:
        raise RankError(f"h={h} exceeds the achievable maximum {max_h}", max_rank=max_h)


def simpls_fit(X, Y, h: int, *, center: bool = False) -> PlsFit:
    """Ordinary SIMPLS with ``h`` components.

    The caller centers ``X`` and ``Y`` unless ``center=True``, in which case
    column means are removed and stored on the fit.
    """
    X, Y = _as_2d(X, "X"), _as_2d(Y, "Y")
    if X.shape[0] != Y.shape[0]:
        raise InvalidArgumentError("X and Y must have the same number of rows")
    if X.shape[0] < 2:
        raise InvalidArgumentError("need n >= 2")
    _check_h(X, h)
    cx = X.mean(axis=0) if center else np.zeros(X.shape[1])
    cy = Y.mean(axis=0) if center else np.zeros(Y.shape[1])
    Xc, Yc = X - cx, Y - cy
    rank = np.linalg.matrix_rank(Xc)
    if h > rank:
        raise RankError(f"h={h} exceeds the achievable maximum {rank}", max_rank=rank)
    R, T, Pl, Ql = _simpls_core(Xc, Yc, h)
    omega = R @ Ql.T
    return PlsFit(
        omega_hat=omega, n_components=h, x_weights=R, x_scores=T, x_loadings=Pl,
        y_loadings=Ql, x_center=cx, x_scale=np.ones(X.shape[1]), y_center=cy,
        obs_weights=np.ones(X.shape[0]),
        objective=float(np.abs(Yc - Xc @ omega).sum()),
    )


def _robust_standardize(E: np.ndarray) -> np.ndarray:
    E = E - l1_median(E)
    s = np.array([mad_scale(E[:, k]) for k in range(E.shape[1])])
    s[s == 0] = 1.0
    return E / s


@dataclass
class _StartResult:
    omega: np.ndarray
    weights: np.ndarray
    parts: tuple
    converged: bool
    n_iter: int
    objective: float = field(default=float("inf"))


def _run_start(Xs, Yc, idx, cfg: IrsimplsConfig) -> _StartResult:
    h = cfg.n_components
    n = Xs.shape[0]
    parts = _simpls_core(Xs[idx], Yc[idx], h)
    omega = parts[0] @ parts[3].T
    w = np.ones(n)
    converged = cfg.max_reweight_iters == 0
    it = 0
    for it in range(1, cfg.max_reweight_iters + 1):
        E = Yc - Xs @ omega
        if not cfg.fixed_weights:
            w = observation_weights(_robust_standardize(E), cfg.gamma, cfg.raf)
        sw = np.sqrt(w)[:, None]
        parts = _simpls_core(Xs * sw, Yc * sw, h)
        new = parts[0] @ parts[3].T
        change = np.max(np.abs(new - omega))
        omega = new
        if change < cfg.convergence_tol:
            converged = True
            break
    return _StartResult(omega, w, parts, converged, it)


def irsimpls_fit(X, Y, config: IrsimplsConfig) -> PlsFit:
    """Robust SIMPLS by iterative reweighting from random subsample starts.

    Rows are centered by the L1 median, predictors scaled by MAD, and each of
    ``config.n_starts`` starts runs SIMPLS on a random subsample followed by
    weighted-likelihood reweighting until the coefficient matrix changes by
    less than ``convergence_tol``. The start with the smallest total absolute
    residual on the full sample wins (ties go to the lowest start index).
    """
    X, Y = _as_2d(X, "X"), _as_2d(Y, "Y")
    n, nx = X.shape
    if Y.shape[0] != n:
        raise InvalidArgumentError("X and Y must have the same number of rows")
    if n < 2:
        raise InvalidArgumentError("need n >= 2")
    cfg = config
    _check_h(X, cfg.n_components)
    diagnostics = []

    if cfg.center == "l1":
        cx, cy = l1_median(X), l1_median(Y)
    else:
        cx, cy = X.mean(axis=0), Y.mean(axis=0)
    Xc, Yc = X - cx, Y - cy
    if cfg.scale_x:
        sx = np.array([mad_scale(Xc[:, j]) for j in range(nx)])
        bad = sx <= 0
        if bad.any():
            diagnostics.append(f"{int(bad.sum())} predictor column(s) with zero MAD left unscaled")
            sx[bad] = 1.0
    else:
        sx = np.ones(nx)
    Xs = Xc / sx

    initial = None
    if not cfg.fixed_weights:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            try:
                initial = observation_weights(Yc if cfg.center == "l1" else Y - l1_median(Y),
                                              cfg.gamma, cfg.raf)
            except Exception as exc:  # degenerate response; weights are diagnostic only
                diagnostics.append(f"initial weights unavailable: {exc}")

    n_r = cfg.resolved_subsample(n)
    seeds = np.random.SeedSequence(cfg.rng_seed).spawn(cfg.n_starts)
    best: Optional[_StartResult] = None
    objectives = []
    for s, seq in enumerate(seeds):
        rng = np.random.default_rng(seq)
        idx = np.sort(rng.choice(n, size=n_r, replace=False))
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                res = _run_start(Xs, Yc, idx, cfg)
        except RankError as exc:
            diagnostics.append(f"start {s} failed: {exc}")
            objectives.append(float("inf"))
            continue
        res.objective = float(np.abs(Yc - Xs @ res.omega).sum())
        objectives.append(res.objective)
        if best is None or res.objective < best.objective:
            best = res
    if best is None:
        raise RankError("every IRSIMPLS start failed: " + "; ".join(diagnostics))

    R, T, Pl, Ql = best.parts
    return PlsFit(
        omega_hat=best.omega / sx[:, None], n_components=cfg.n_components,
        x_weights=R, x_scores=T, x_loadings=Pl, y_loadings=Ql,
        x_center=cx, x_scale=sx, y_center=cy, obs_weights=best.weights,
        converged=best.converged, n_reweight_iters=best.n_iter,
        objective=best.objective, initial_weights=initial,
        start_objectives=tuple(objectives), diagnostics=tuple(diagnostics),
    )


def pls_predict(fit: PlsFit, X_new) -> np.ndarray:
    X_new = _as_2d(X_new, "X_new")
    if X_new.shape[1] != fit.omega_hat.shape[0]:
        raise InvalidArgumentError(
            f"X_new has {X_new.shape[1]} columns, the fit expects {fit.omega_hat.shape[0]}"
        )
    return (X_new - fit.x_center) @ fit.omega_hat + fit.y_center


def with_components(config: IrsimplsConfig, h: int) -> IrsimplsConfig:
    return replace(config, n_components=h)
