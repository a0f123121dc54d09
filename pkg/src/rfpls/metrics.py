"""Prediction accuracy metrics for response curves."""
from __future__ import annotations

import numpy as np

from .exceptions import InvalidArgumentError
from .funcdata import FunctionalSample, Grid

DENOMINATOR_FLOOR = 1e-8


def _norms(values, grid: Grid) -> np.ndarray:
    return np.sqrt((values * values) @ grid.riemann_weights())


def ape_per_curve(y, y_hat, grid: Grid, floor: float = DENOMINATOR_FLOOR) -> np.ndarray:
    """L2 norm over t of ``|y_hat - y| / |y|`` for every curve."""
    y, y_hat = np.atleast_2d(y), np.atleast_2d(y_hat)
    ratio = np.abs(y_hat - y) / np.maximum(np.abs(y), floor)
    return _norms(ratio, grid)


def _pair(Y, Y_hat):
    if not isinstance(Y, FunctionalSample) or not isinstance(Y_hat, FunctionalSample):
        raise InvalidArgumentError("metrics take FunctionalSample arguments")
    if Y.grid != Y_hat.grid:
        raise InvalidArgumentError("observed and predicted curves are on different grids")
    if Y.n != Y_hat.n:
        raise InvalidArgumentError("observed and predicted samples differ in size")
    return Y.values, Y_hat.values, Y.grid


def mape(Y: FunctionalSample, Y_hat: FunctionalSample) -> float:
    y, yh, g = _pair(Y, Y_hat)
    return float(ape_per_curve(y, yh, g).mean())


def mdape(Y: FunctionalSample, Y_hat: FunctionalSample) -> float:
    """Median over curves of the L2 norm of the absolute error curve."""
    y, yh, g = _pair(Y, Y_hat)
    return float(np.median(_norms(np.abs(y - yh), g)))


def r2(Y: FunctionalSample, Y_hat: FunctionalSample) -> float:
    y, yh, g = _pair(Y, Y_hat)
    sse = np.sum(_norms(y - yh, g) ** 2)
    sst = np.sum(_norms(y - y.mean(axis=0), g) ** 2)
    return float(1.0 - sse / sst)


def mse_trimmed(Y: FunctionalSample, Y_hat: FunctionalSample, flags, contamination: float = 0.2) -> float:
    """Squared L2 error over unflagged curves, normalised by ``(1 - contamination) n``."""
    y, yh, g = _pair(Y, Y_hat)
    flags = np.asarray(flags, dtype=bool)
    if flags.shape != (y.shape[0],):
        raise InvalidArgumentError("one outlier flag per curve required")
    if not 0 <= contamination < 1:
        raise InvalidArgumentError("contamination must be in [0, 1)")
    err = _norms(yh - y, g) ** 2
    return float(np.sum(err[~flags]) / ((1.0 - contamination) * y.shape[0]))
