"""Nonparametric bootstrap prediction bands and their evaluation scores."""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Literal, Optional

import numpy as np

from .exceptions import InvalidArgumentError, NumericalError, RfplsError
from .fflr import ModelSpec, predict_response, select_ncomp_tmape
from .funcdata import FunctionalSample, Grid, evaluate_basis, smooth_curves


@dataclass(frozen=True)
class PredictionBand:
    t_grid: Grid
    lower: np.ndarray
    upper: np.ndarray
    alpha: float
    B: int
    replicates: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise InvalidArgumentError("alpha must be in (0, 1)")
        if self.B < 2:
            raise InvalidArgumentError("need B >= 2")
        if np.any(self.lower > self.upper):
            raise InvalidArgumentError("lower bound exceeds upper bound")


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("RFPLS_THREADS", "1")))
    except ValueError:
        return 1


def band_from_replicates(replicates, alpha: float, t_grid: Grid) -> PredictionBand:
    """Pointwise inverse-ECDF quantiles at ``alpha/2`` and ``1 - alpha/2`` over axis 0."""
    reps = np.asarray(replicates, dtype=np.float64)
    if not 0 < alpha < 1:
        raise InvalidArgumentError("alpha must be in (0, 1)")
    lower, upper = np.quantile(reps, [alpha / 2, 1 - alpha / 2], axis=0, method="inverted_cdf")
    return PredictionBand(t_grid, lower, upper, alpha, reps.shape[0], reps)


def bootstrap_bands(spec: ModelSpec, Y_train: FunctionalSample, X_train, X_test, alpha: float = 0.05,
                    B: int = 200, seed: int = 0,
                    residuals: Literal["smoothed", "raw"] = "smoothed",
                    reselect_h: bool = False, H_max: int = 10, q: float = 0.8,
                    n_jobs: Optional[int] = None, keep_replicates: bool = False) -> PredictionBand:
    """Pairs bootstrap of the fit plus resampled whole residual curves.

    Residual curves are training responses minus fitted curves; with
    ``residuals="smoothed"`` the responses are first projected onto the
    response basis, so measurement noise is not counted twice.
    """
    if not 0 < alpha < 1:
        raise InvalidArgumentError("alpha must be in (0, 1)")
    if B < 2:
        raise InvalidArgumentError("need B >= 2")
    if isinstance(X_train, FunctionalSample):
        X_train = [X_train]
    if isinstance(X_test, FunctionalSample):
        X_test = [X_test]
    t_grid = Y_train.grid
    n = Y_train.n

    ref = spec.fit(Y_train, X_train)
    fitted = predict_response(ref, X_train, t_grid).values
    if residuals == "smoothed":
        observed = smooth_curves(Y_train, ref.y_basis).coefs @ evaluate_basis(ref.y_basis, t_grid).T
    elif residuals == "raw":
        observed = Y_train.values
    else:
        raise InvalidArgumentError(f"unknown residual mode {residuals!r}")
    eps = observed - fitted

    def replicate(seq):
        rng = np.random.default_rng(seq)
        attempts = 0
        while attempts <= 2 * B:
            attempts += 1
            idx = rng.integers(0, n, size=n)
            fit_seed = int(rng.integers(0, 2**31 - 1))
            Yb = Y_train.subset(idx)
            Xb = [x.subset(idx) for x in X_train]
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    sb = spec
                    if reselect_h and spec.method != "ls":
                        h, _ = select_ncomp_tmape(Yb, Xb, spec.method, H_max, q, fit_seed,
                                                  k_y=spec.k_y, k_x=spec.k_x, order=spec.order,
                                                  irsimpls=spec.irsimpls, seed=fit_seed)
                        sb = replace(spec, n_components=h)
                    model = sb.fit(Yb, Xb, seed=fit_seed)
                pred = predict_response(model, X_test, t_grid).values
            except (RfplsError, np.linalg.LinAlgError):
                continue
            return pred + eps[rng.integers(0, n)], attempts
        return None, attempts

    seqs = np.random.SeedSequence(seed).spawn(B)
    jobs = n_jobs or thread_count()
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(replicate, seqs))
    else:
        results = [replicate(s) for s in seqs]
    total = sum(a for _, a in results)
    if any(r is None for r, _ in results) or total > 3 * B:
        raise NumericalError(f"bootstrap refits failed too often ({total} attempts for B={B})")
    band = band_from_replicates(np.stack([r for r, _ in results]), alpha, t_grid)
    return band if keep_replicates else replace(band, replicates=None)


def _check(band: PredictionBand, Y_test: FunctionalSample):
    if Y_test.grid != band.t_grid or Y_test.values.shape != band.lower.shape:
        raise InvalidArgumentError("band and test curves are not aligned")
    return Y_test.values


def coverage(band: PredictionBand, Y_test: FunctionalSample) -> float:
    y = _check(band, Y_test)
    return float(np.mean((y >= band.lower) & (y <= band.upper)))


def cpd(band: PredictionBand, Y_test: FunctionalSample) -> float:
    """``|alpha - non-coverage|`` with non-coverage averaged over curves and grid points."""
    y = _check(band, Y_test)
    miss = (band.lower > y) | (band.upper < y)
    return float(abs(band.alpha - miss.mean()))


def interval_score(band: PredictionBand, Y_test: FunctionalSample) -> float:
    y = _check(band, Y_test)
    lo, up, a = band.lower, band.upper, band.alpha
    f = (up - lo) + (2 / a) * (lo - y) * (y < lo) + (2 / a) * (y - up) * (y > up)
    norms = np.sqrt((f * f) @ band.t_grid.riemann_weights())
    return float(norms.mean())
