"""Monte Carlo data-generating processes for function-on-function regression."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Literal, Optional

import numpy as np

from .exceptions import InvalidArgumentError, NumericalError
from .funcdata import FunctionalSample, Grid

N_PREDICTORS = 5


@dataclass(frozen=True)
class ScenarioConfig:
    """Settings for the five-predictor simulation.

    ``ou_params`` is ``(rho, theta, sigma)``: mean-reversion level, rate and
    diffusion of the contaminating Ornstein-Uhlenbeck curves.
    """

    n: int = 500
    n_train: int = 200
    grid_size: int = 100
    scenario: Literal["independent", "lagged"] = "independent"
    lag: int = 4
    contamination_rate: float = 0.0
    ou_params: tuple = (0.0, 5.0, 2.0)
    noise_sd: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.grid_size < 2:
            raise InvalidArgumentError("grid_size must be >= 2")
        if not 0 <= self.contamination_rate < 0.5:
            raise InvalidArgumentError("contamination_rate must be in [0, 0.5)")
        if not 1 <= self.n_train <= self.n:
            raise InvalidArgumentError("need 1 <= n_train <= n")
        if self.scenario not in ("independent", "lagged"):
            raise InvalidArgumentError(f"unknown scenario {self.scenario!r}")
        if self.lag < 0:
            raise InvalidArgumentError("lag must be >= 0")
        if self.noise_sd < 0:
            raise InvalidArgumentError("noise_sd must be >= 0")
        object.__setattr__(self, "ou_params", tuple(float(v) for v in self.ou_params))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ou_params"] = list(self.ou_params)
        return d


@dataclass(frozen=True)
class GeneratedDataset:
    Y_train: FunctionalSample
    X_train: list
    flags: np.ndarray
    Y_test: Optional[FunctionalSample] = None
    X_test: Optional[list] = None
    true_betas: tuple = ()
    Y_train_clean: Optional[FunctionalSample] = None
    config: dict = field(default_factory=dict)


def se_covariance(s, s2=None, scale: float = 100.0) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    s2 = s if s2 is None else np.asarray(s2, dtype=np.float64)
    return np.exp(-scale * (s[:, None] - s2[None, :]) ** 2)


def _cholesky(C: np.ndarray) -> np.ndarray:
    jitter = 1e-10
    eye = np.eye(C.shape[0])
    while jitter <= 1e-4:
        try:
            return np.linalg.cholesky(C + jitter * eye)
        except np.linalg.LinAlgError:
            jitter *= 10
    raise NumericalError("Cholesky factorisation failed even with 1e-4 diagonal jitter")


def gen_gp(n: int, grid: Grid, rng: np.random.Generator, label: str = "V") -> FunctionalSample:
    """``n`` mean-zero Gaussian-process draws with covariance ``exp(-100 (s - s')^2)``."""
    L = _cholesky(se_covariance(grid.points))
    Z = rng.standard_normal((n, len(grid)))
    return FunctionalSample(grid, Z @ L.T, label)


def gen_predictors(config: ScenarioConfig, rng: np.random.Generator, grid: Optional[Grid] = None,
                   latent: Optional[np.ndarray] = None) -> list:
    """Five predictors ``10 + V_m`` (independent) or ``10 + sum_{j=0}^{lag} V_{m+j} / sqrt(lag + 1)``.

    ``latent`` (shape ``(n_latent, n, p)``) replaces the GP draws, mostly for tests.
    """
    grid = grid or Grid.uniform(0.0, 1.0, config.grid_size)
    n_latent = N_PREDICTORS if config.scenario == "independent" else N_PREDICTORS + config.lag
    if latent is None:
        L = _cholesky(se_covariance(grid.points))
        latent = np.stack([rng.standard_normal((config.n, len(grid))) @ L.T for _ in range(n_latent)])
    if config.scenario == "independent":
        curves = [10.0 + latent[m] for m in range(N_PREDICTORS)]
    else:
        norm = math.sqrt(config.lag + 1)
        curves = [10.0 + latent[m:m + config.lag + 1].sum(axis=0) / norm for m in range(N_PREDICTORS)]
    return [FunctionalSample(grid, c, f"X{m + 1}") for m, c in enumerate(curves)]


def _beta1(s, t):
    return (1 - s) ** 2 * (t - 0.5) ** 2


def _beta2(s, t):
    return np.exp(-3 * (s - 1) ** 2) * np.exp(-5 * (t - 0.5) ** 2)


def _beta3(s, t):
    return np.exp(-5 * (s - 0.5) ** 2 - 5 * (t - 0.5) ** 2) + 8 * np.exp(-5 * (s - 1.5) ** 2 - 5 * (t - 0.5) ** 2)


def _beta4(s, t):
    return np.sin(1.5 * np.pi * s) * np.sin(np.pi * t)


def _beta5(s, t):
    return np.sqrt(s * t)


def _beta2_mod(s, t):
    return np.exp(-3 * (s - 1) ** 2) * np.exp(-3 * (t - 0.5) ** 2)


def _beta3_mod(s, t):
    return 6 * np.exp(-5 * (s + 0.5) ** 2 - 5 * (t - 0.5) ** 2) + 4 * np.exp(-5 * (s - 1.5) ** 2 - 5 * (t - 0.5) ** 2)


def _beta4_mod(s, t):
    return 6 * np.cos(6 * np.pi * s) * np.cos(np.pi * t)


TRUE_BETAS = (_beta1, _beta2, _beta3, _beta4, _beta5)
CONTAMINATED_BETAS = (_beta1, _beta2_mod, _beta3_mod, _beta4_mod, _beta5)


def true_beta(m: int, s, t):
    if not 1 <= m <= N_PREDICTORS:
        raise InvalidArgumentError("m must be in 1..5")
    return TRUE_BETAS[m - 1](np.asarray(s, dtype=float), np.asarray(t, dtype=float))


def contaminated_beta(m: int, s, t):
    if not 1 <= m <= N_PREDICTORS:
        raise InvalidArgumentError("m must be in 1..5")
    return CONTAMINATED_BETAS[m - 1](np.asarray(s, dtype=float), np.asarray(t, dtype=float))


def gen_response(X: list, betas, t_grid: Optional[Grid] = None, noise_sd: float = 0.0,
                 rng: Optional[np.random.Generator] = None) -> FunctionalSample:
    """``Y(t) = sum_m int X_m(s) beta_m(s, t) ds`` by the Riemann rule, plus i.i.d. noise."""
    t_grid = t_grid or X[0].grid
    t = t_grid.points
    Y = np.zeros((X[0].n, len(t)))
    for x, beta in zip(X, betas):
        s = x.grid.points
        surface = beta(s[:, None], t[None, :])
        Y += (x.values * x.grid.riemann_weights()) @ surface
    if noise_sd > 0:
        if rng is None:
            raise InvalidArgumentError("noise requires an rng")
        Y = Y + noise_sd * rng.standard_normal(Y.shape)
    return FunctionalSample(t_grid, Y, "Y")


def ou_curve(grid: Grid, rho: float, theta: float, sigma: float, rng: np.random.Generator,
             x0: Optional[float] = None) -> np.ndarray:
    """Ornstein-Uhlenbeck path sampled exactly on ``grid``.

    ``dX = theta (rho - X) ds + sigma dW`` started at ``x0`` (a standard normal
    draw when omitted) at the first grid point.
    """
    if theta <= 0 or sigma < 0:
        raise InvalidArgumentError("theta must be positive and sigma non-negative")
    s = grid.points
    out = np.empty(s.size)
    out[0] = rng.standard_normal() if x0 is None else float(x0)
    decay = np.exp(-theta * np.diff(s))
    sd = sigma * np.sqrt((1.0 - decay * decay) / (2.0 * theta))
    z = rng.standard_normal(s.size - 1)
    for j in range(1, s.size):
        out[j] = rho + (out[j - 1] - rho) * decay[j - 1] + sd[j - 1] * z[j - 1]
    return out


def contaminate(X: list, Y: FunctionalSample, n_train: int, rate: float, ou_params,
                rng: np.random.Generator):
    """Replace ``floor(rate * n_train)`` random training rows by OU-shifted outliers.

    Flagged predictors become ``X_m + OU``; their responses are regenerated from
    the shifted predictors through the modified coefficient surfaces.
    Returns ``(X, Y, flags)`` where ``flags`` covers the training rows.
    """
    n_out = int(math.floor(rate * n_train + 1e-9))
    flags = np.zeros(n_train, dtype=bool)
    if n_out == 0:
        if rate > 0:
            warnings.warn("contamination rate yields zero outliers", RuntimeWarning, stacklevel=2)
        return list(X), Y, flags
    idx = np.sort(rng.choice(n_train, size=n_out, replace=False))
    flags[idx] = True
    rho, theta, sigma = ou_params
    new_X = []
    for x in X:
        vals = x.values.copy()
        for i in idx:
            vals[i] += ou_curve(x.grid, rho, theta, sigma, rng)
        new_X.append(x.with_values(vals))
    outliers = gen_response([x.subset(idx) for x in new_X], CONTAMINATED_BETAS, Y.grid)
    y_vals = Y.values.copy()
    y_vals[idx] = outliers.values
    return new_X, Y.with_values(y_vals), flags


def generate_case(config: ScenarioConfig) -> GeneratedDataset:
    """Five-predictor dataset: first ``n_train`` curves (contaminated, noisy) train, the rest test."""
    rng = np.random.default_rng(config.seed)
    grid = Grid.uniform(0.0, 1.0, config.grid_size)
    X = gen_predictors(config, rng, grid)
    Y = gen_response(X, TRUE_BETAS, grid)
    tr = np.arange(config.n_train)
    te = np.arange(config.n_train, config.n)
    X_tr = [x.subset(tr) for x in X]
    Y_tr = Y.subset(tr)
    X_tr, Y_tr, flags = contaminate(X_tr, Y_tr, config.n_train, config.contamination_rate,
                                    config.ou_params, rng)
    clean = Y_tr
    if config.noise_sd > 0:
        X_tr = [x.with_values(x.values + config.noise_sd * rng.standard_normal(x.values.shape))
                for x in X_tr]
        Y_tr = Y_tr.with_values(Y_tr.values + config.noise_sd * rng.standard_normal(Y_tr.values.shape))
    X_te = [x.subset(te) for x in X] if te.size else None
    Y_te = Y.subset(te) if te.size else None
    return GeneratedDataset(Y_tr, X_tr, flags, Y_te, X_te, TRUE_BETAS, clean, config.to_dict())


# FPC-based single-predictor design

def fpc_mean_x(s):
    return -10 * (s - 0.5) ** 2 + 2


def fpc_mean_y(t):
    return 60 * np.exp(-(t - 1) ** 2)


def fpc_eigen_x(s) -> np.ndarray:
    c = math.sqrt(2.0)
    return np.stack([c * np.sin(np.pi * s), c * np.sin(7 * np.pi * s), c * np.cos(7 * np.pi * s)])


def fpc_eigen_y(t) -> np.ndarray:
    c = math.sqrt(2.0)
    return np.stack([c * np.sin(12 * np.pi * t), c * np.sin(5 * np.pi * t), c * np.cos(2 * np.pi * t)])


FPC_SCORE_VARIANCES = (40.0, 10.0, 1.0)


def cubic_bump(t, start: float, width: float = 0.1) -> np.ndarray:
    """Cardinal cubic B-spline supported on ``[start, start + width]`` scaled to unit peak."""
    u = 4.0 * (np.asarray(t, dtype=float) - start) / width
    out = np.zeros_like(u)
    for lo, poly in ((0, lambda x: x ** 3 / 6),
                     (1, lambda x: (-3 * x ** 3 + 12 * x ** 2 - 12 * x + 4) / 6),
                     (2, lambda x: (3 * x ** 3 - 24 * x ** 2 + 60 * x - 44) / 6),
                     (3, lambda x: (4 - x) ** 3 / 6)):
        mask = (u >= lo) & (u < lo + 1)
        out[mask] = poly(u[mask])
    return out / (2.0 / 3.0)


def gen_fpc_dataset(scenario: Literal["S1", "S2"] = "S1", n: int = 200, grid_size: int = 200,
                    seed: int = 0, contamination_rate: float = 0.2,
                    scores: Optional[np.ndarray] = None, B: Optional[np.ndarray] = None) -> GeneratedDataset:
    """Single-predictor design built from three eigenfunctions per variable.

    ``S1`` outliers use ``B + R``; ``S2`` outliers add a localized cubic
    B-spline bump loaded through an extra column of ``N(2, 1)`` draws.
    ``scores`` and ``B`` override the random draws (tests).
    """
    if scenario not in ("S1", "S2"):
        raise InvalidArgumentError("scenario must be 'S1' or 'S2'")
    if n < 2:
        raise InvalidArgumentError("need n >= 2")
    rng = np.random.default_rng(seed)
    grid = Grid.uniform(0.0, 1.0, grid_size)
    s = grid.points
    iota_x, iota_y = fpc_eigen_x(s), fpc_eigen_y(s)
    xi = rng.standard_normal((n, 3)) * np.sqrt(FPC_SCORE_VARIANCES) if scores is None else np.asarray(scores)
    Xc = xi @ iota_x
    if B is None:
        B = rng.uniform(-3.0, 3.0, size=(3, 3))
    proj = (Xc * grid.riemann_weights()) @ iota_x.T  # int (X - mu_X) iota_x ds
    Y = fpc_mean_y(s) + proj @ B @ iota_y

    q = rng.normal(0.0, math.sqrt(0.1), size=(n, 3))
    d = rng.normal(0.0, math.sqrt(0.1), size=(n, 1))
    Y = Y + q @ iota_y + d

    n_out = int(math.floor(contamination_rate * n + 1e-9))
    flags = np.zeros(n, dtype=bool)
    if n_out:
        idx = np.sort(rng.choice(n, size=n_out, replace=False))
        flags[idx] = True
        if scenario == "S1":
            B1 = B + rng.normal(0.0, math.sqrt(0.5), size=B.shape)
            Y[idx] = fpc_mean_y(s) + proj[idx] @ B1 @ iota_y + q[idx] @ iota_y + d[idx]
        else:
            extra = rng.normal(2.0, 1.0, size=(3, 1))
            B2 = np.hstack([B, extra])
            bump = cubic_bump(s, rng.uniform(0.0, 0.9))
            basis_y = np.vstack([iota_y, bump])
            Y[idx] = fpc_mean_y(s) + proj[idx] @ B2 @ basis_y + q[idx] @ iota_y + d[idx]
    X = FunctionalSample(grid, fpc_mean_x(s) + Xc, "X")
    config = {"generator": "fpc", "scenario": scenario, "n": n, "grid_size": grid_size,
              "seed": seed, "contamination_rate": contamination_rate}
    return GeneratedDataset(FunctionalSample(grid, Y, "Y"), [X], flags, config=config)
