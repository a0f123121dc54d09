"""Function-on-function linear regression fitted in basis-coefficient space."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Literal, Optional, Sequence, Union

import numpy as np

from .exceptions import InvalidArgumentError, RankError
from .funcdata import (
    BasisCoefficients,
    BsplineBasis,
    FunctionalSample,
    GramMatrix,
    Grid,
    evaluate_basis,
    gram_matrix,
    make_bspline_basis,
    smooth_curves,
)
from .metrics import ape_per_curve
from .robustkit import trimmed_mean
from .simpls import IrsimplsConfig, PlsFit, irsimpls_fit, simpls_fit

Method = Literal["ls", "simpls", "irsimpls"]
METHODS = ("ls", "simpls", "irsimpls")


@dataclass(frozen=True)
class DesignPair:
    """Response-side ``lambda_`` (n x K_Y) and stacked predictor-side ``pi`` (n x sum K_X)."""

    lambda_: np.ndarray
    pi: np.ndarray
    block_index: tuple

    def __post_init__(self):
        stops = [b[1] for b in self.block_index]
        starts = [b[0] for b in self.block_index]
        if starts and (starts[0] != 0 or stops[-1] != self.pi.shape[1]
                       or any(a != b for a, b in zip(starts[1:], stops[:-1]))):
            raise InvalidArgumentError("block ranges must partition the columns of pi")


def build_design(y_coefs: BasisCoefficients, x_coefs: Sequence[BasisCoefficients],
                 y_gram: GramMatrix = None, x_grams: Sequence[GramMatrix] = None) -> DesignPair:
    """``lambda = C Phi^{1/2}`` and ``pi = [D_1 Psi_1^{1/2}, ..., D_M Psi_M^{1/2}]``."""
    n = y_coefs.coefs.shape[0]
    if any(xc.coefs.shape[0] != n for xc in x_coefs):
        raise InvalidArgumentError("all coefficient sets must have the same number of rows")
    if y_gram is None:
        y_gram = gram_matrix(y_coefs.basis)
    if x_grams is None:
        x_grams = [gram_matrix(xc.basis) for xc in x_coefs]
    lam = y_coefs.coefs @ y_gram.sqrt
    blocks, cols, start = [], [], 0
    for xc, g in zip(x_coefs, x_grams):
        cols.append(xc.coefs @ g.sqrt)
        blocks.append((start, start + xc.coefs.shape[1]))
        start += xc.coefs.shape[1]
    return DesignPair(lam, np.hstack(cols), tuple(blocks))


@dataclass(frozen=True)
class FflrModel:
    """A fitted model; ``omega`` acts on centered design rows, ``beta_coef`` on bases."""

    method: str
    n_components: Optional[int]
    y_basis: BsplineBasis
    x_bases: tuple
    y_gram: GramMatrix
    x_grams: tuple
    omega: np.ndarray
    x_center: np.ndarray
    y_center: np.ndarray
    beta_coef: np.ndarray
    block_index: tuple
    y_grid: Grid
    fit: Optional[PlsFit] = None
    config: dict = field(default_factory=dict)

    @property
    def n_predictors(self) -> int:
        return len(self.x_bases)

    def coef_block(self, m: int) -> np.ndarray:
        if not 1 <= m <= self.n_predictors:
            raise InvalidArgumentError(f"predictor index must be in 1..{self.n_predictors}")
        a, b = self.block_index[m - 1]
        return self.beta_coef[a:b]

    def to_dict(self) -> dict:
        def gram(g):
            return {"matrix": g.matrix.tolist(), "sqrt": g.sqrt.tolist(), "inv_sqrt": g.inv_sqrt.tolist()}

        d = {
            "format": "rfpls-model",
            "version": 1,
            "method": self.method,
            "n_components": self.n_components,
            "y_basis": self.y_basis.to_dict(),
            "x_bases": [b.to_dict() for b in self.x_bases],
            "y_gram": gram(self.y_gram),
            "x_grams": [gram(g) for g in self.x_grams],
            "omega": self.omega.tolist(),
            "x_center": self.x_center.tolist(),
            "y_center": self.y_center.tolist(),
            "beta_coef": self.beta_coef.tolist(),
            "block_index": [list(b) for b in self.block_index],
            "y_grid": self.y_grid.points.tolist(),
            "config": self.config,
        }
        if self.fit is not None:
            d["fit"] = {
                "obs_weights": self.fit.obs_weights.tolist(),
                "converged": self.fit.converged,
                "n_reweight_iters": self.fit.n_reweight_iters,
                "objective": self.fit.objective,
                "x_scale": self.fit.x_scale.tolist(),
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FflrModel":
        if d.get("format") != "rfpls-model":
            raise InvalidArgumentError("not an rfpls model document")

        def gram(g):
            return GramMatrix(np.asarray(g["matrix"]), np.asarray(g["sqrt"]), np.asarray(g["inv_sqrt"]))

        return cls(
            method=d["method"],
            n_components=d["n_components"],
            y_basis=BsplineBasis.from_dict(d["y_basis"]),
            x_bases=tuple(BsplineBasis.from_dict(b) for b in d["x_bases"]),
            y_gram=gram(d["y_gram"]),
            x_grams=tuple(gram(g) for g in d["x_grams"]),
            omega=np.asarray(d["omega"], dtype=np.float64),
            x_center=np.asarray(d["x_center"], dtype=np.float64),
            y_center=np.asarray(d["y_center"], dtype=np.float64),
            beta_coef=np.asarray(d["beta_coef"], dtype=np.float64),
            block_index=tuple(tuple(b) for b in d["block_index"]),
            y_grid=Grid(np.asarray(d["y_grid"])),
            config=d.get("config", {}),
        )


def _per_predictor(value, M, name):
    if np.ndim(value) == 0:
        return [int(value)] * M
    value = [int(v) for v in value]
    if len(value) != M:
        raise InvalidArgumentError(f"{name} needs one entry per predictor ({M})")
    return value


@dataclass(frozen=True)
class _Prepared:
    """Smoothed training data shared by every fit on the same inputs."""

    y_basis: BsplineBasis
    x_bases: tuple
    y_gram: GramMatrix
    x_grams: tuple
    design: DesignPair
    y_grid: Grid
    settings: dict

    def rows(self, index) -> "_Prepared":
        d = self.design
        return replace(self, design=DesignPair(d.lambda_[index], d.pi[index], d.block_index))


def _check_inputs(Y: FunctionalSample, X):
    if isinstance(X, FunctionalSample):
        X = [X]
    X = list(X)
    if not X:
        raise InvalidArgumentError("at least one functional predictor is required")
    if any(x.n != Y.n for x in X):
        raise InvalidArgumentError("response and predictors must have the same number of curves")
    return X


def prepare(Y: FunctionalSample, X, k_y: int = 10, k_x=10, order: int = 4) -> _Prepared:
    X = _check_inputs(Y, X)
    kx = _per_predictor(k_x, len(X), "k_x")
    y_basis = make_bspline_basis(k_y, order, Y.grid.domain)
    x_bases = tuple(make_bspline_basis(k, order, x.grid.domain) for k, x in zip(kx, X))
    y_gram = gram_matrix(y_basis)
    x_grams = tuple(gram_matrix(b) for b in x_bases)
    design = build_design(smooth_curves(Y, y_basis),
                          [smooth_curves(x, b) for x, b in zip(X, x_bases)], y_gram, x_grams)
    settings = {"k_y": int(k_y), "k_x": kx, "order": int(order)}
    return _Prepared(y_basis, x_bases, y_gram, x_grams, design, Y.grid, settings)


def _ls_coefficients(pi, lam):
    cx, cy = pi.mean(axis=0), lam.mean(axis=0)
    A, B = pi - cx, lam - cy
    omega, _, rank, _ = np.linalg.lstsq(A, B, rcond=None)
    if rank < A.shape[1]:
        warnings.warn(
            f"LS design has rank {rank} < {A.shape[1]} columns; using the minimum-norm "
            "(pseudo-inverse) solution", RuntimeWarning, stacklevel=3)
    return omega, cx, cy


def _fit_prepared(prep: _Prepared, method: str, h: Optional[int],
                  irsimpls: Optional[IrsimplsConfig], seed: int) -> FflrModel:
    d = prep.design
    fit = None
    if method == "ls":
        omega, cx, cy = _ls_coefficients(d.pi, d.lambda_)
        h = None
    elif method == "simpls":
        if h is None:
            raise InvalidArgumentError("simpls needs n_components")
        fit = simpls_fit(d.pi, d.lambda_, h, center=True)
        omega, cx, cy = fit.omega_hat, fit.x_center, fit.y_center
    elif method == "irsimpls":
        if h is None:
            raise InvalidArgumentError("irsimpls needs n_components")
        cfg = replace(irsimpls or IrsimplsConfig(), n_components=h, rng_seed=seed)
        fit = irsimpls_fit(d.pi, d.lambda_, cfg)
        omega, cx, cy = fit.omega_hat, fit.x_center, fit.y_center
    else:
        raise InvalidArgumentError(f"unknown method {method!r}; choose from {METHODS}")

    beta = np.empty_like(omega)
    for (a, b), g in zip(d.block_index, prep.x_grams):
        beta[a:b] = g.inv_sqrt @ omega[a:b]
    beta = beta @ prep.y_gram.inv_sqrt
    config = dict(prep.settings, method=method, n_components=h, seed=int(seed))
    if method == "irsimpls":
        config["irsimpls"] = {k: v for k, v in asdict(cfg).items()
                              if k not in ("n_components", "rng_seed")}
    return FflrModel(method, h, prep.y_basis, prep.x_bases, prep.y_gram, prep.x_grams,
                     omega, cx, cy, beta, d.block_index, prep.y_grid, fit, config)


def fit_fflr(Y: FunctionalSample, X, method: Method = "irsimpls", n_components: Optional[int] = None,
             *, k_y: int = 10, k_x: Union[int, Sequence[int]] = 10, order: int = 4,
             irsimpls: Optional[IrsimplsConfig] = None, seed: int = 0) -> FflrModel:
    """Smooth, build the coefficient-space design and regress it by ``method``.

    ``ls`` is ordinary least squares on mean-centered designs, ``simpls`` is
    ordinary SIMPLS, ``irsimpls`` the robust reweighted variant. ``seed``
    drives the IRSIMPLS subsample starts.
    """
    return _fit_prepared(prepare(Y, X, k_y, k_x, order), method, n_components, irsimpls, seed)


def _smooth_predictors(model: FflrModel, X_new) -> np.ndarray:
    if isinstance(X_new, FunctionalSample):
        X_new = [X_new]
    if len(X_new) != model.n_predictors:
        raise InvalidArgumentError(
            f"model has {model.n_predictors} predictors, got {len(X_new)}")
    n = X_new[0].n
    if any(x.n != n for x in X_new):
        raise InvalidArgumentError("all predictors must have the same number of curves")
    return np.hstack([smooth_curves(x, b).coefs @ g.sqrt
                      for x, b, g in zip(X_new, model.x_bases, model.x_grams)])


def predict_coefficients(model: FflrModel, X_new) -> np.ndarray:
    """Response basis coefficients for new predictor curves."""
    pi = _smooth_predictors(model, X_new)
    lam = (pi - model.x_center) @ model.omega + model.y_center
    return lam @ model.y_gram.inv_sqrt


def predict_response(model: FflrModel, X_new, t_grid: Optional[Grid] = None) -> FunctionalSample:
    t_grid = model.y_grid if t_grid is None else t_grid
    coefs = predict_coefficients(model, X_new)
    values = coefs @ evaluate_basis(model.y_basis, t_grid).T
    first = X_new if isinstance(X_new, FunctionalSample) else X_new[0]
    return FunctionalSample(t_grid, values, "prediction", first.ids)


def coefficient_surface(model: FflrModel, m: int, s_grid, t_grid) -> np.ndarray:
    """``beta_m(s, t) = Psi_m(s)' A_m Phi(t)`` on the outer product grid (rows follow ``s``)."""
    A = model.coef_block(m)
    return evaluate_basis(model.x_bases[m - 1], s_grid) @ A @ evaluate_basis(model.y_basis, t_grid).T


def select_ncomp_tmape(Y: FunctionalSample, X, method: Method = "irsimpls", H_max: int = 10,
                       q: float = 0.8, split_seed: int = 0, *, k_y: int = 10, k_x=10,
                       order: int = 4, irsimpls: Optional[IrsimplsConfig] = None,
                       seed: int = 0, _prepared: Optional[_Prepared] = None):
    """Choose the number of components by trimmed MAPE on a random half split.

    Returns ``(h_best, tmape)`` where ``tmape[h - 1]`` is the criterion for
    ``h`` components (``inf`` when ``h`` is not achievable). Ties go to the
    smaller ``h``.
    """
    if method not in ("simpls", "irsimpls"):
        raise InvalidArgumentError("component selection applies to simpls and irsimpls")
    if H_max < 1:
        raise InvalidArgumentError("H_max must be >= 1")
    X = _check_inputs(Y, X)
    n = Y.n
    if n < 4:
        raise InvalidArgumentError("component selection needs n >= 4")
    prep = _prepared if _prepared is not None else prepare(Y, X, k_y, k_x, order)
    perm = np.random.default_rng(split_seed).permutation(n)
    n_fit = math.ceil(n / 2)
    fit_idx, val_idx = np.sort(perm[:n_fit]), np.sort(perm[n_fit:])
    half = prep.rows(fit_idx)
    pi_val = prep.design.pi[val_idx]
    B_eval = evaluate_basis(prep.y_basis, Y.grid)
    y_val = Y.values[val_idx]

    tmape = np.full(H_max, np.inf)
    for h in range(1, H_max + 1):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                model = _fit_prepared(half, method, h, irsimpls, seed)
        except RankError:
            break
        lam = (pi_val - model.x_center) @ model.omega + model.y_center
        pred = lam @ prep.y_gram.inv_sqrt @ B_eval.T
        tmape[h - 1] = trimmed_mean(ape_per_curve(y_val, pred, Y.grid), q)
    if not np.isfinite(tmape).any():
        raise RankError("no component count could be fitted on the selection half", max_rank=0)
    return int(np.argmin(tmape)) + 1, tmape


@dataclass(frozen=True)
class ModelSpec:
    """Everything needed to refit the same model on resampled data."""

    method: Method = "irsimpls"
    n_components: Optional[int] = None
    k_y: int = 10
    k_x: Union[int, tuple] = 10
    order: int = 4
    irsimpls: Optional[IrsimplsConfig] = None
    seed: int = 0

    def fit(self, Y: FunctionalSample, X, seed: Optional[int] = None) -> FflrModel:
        return fit_fflr(Y, X, self.method, self.n_components, k_y=self.k_y, k_x=self.k_x,
                        order=self.order, irsimpls=self.irsimpls,
                        seed=self.seed if seed is None else seed)
