"""Discretized functional data and B-spline machinery."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _backend
from .exceptions import DomainError, InvalidArgumentError, NumericalError, RankError


@dataclass(frozen=True)
class Grid:
    """Strictly increasing, finite evaluation points."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).ravel()
        if pts.size < 2:
            raise InvalidArgumentError("a grid needs at least two points")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgumentError("grid points must be finite")
        if np.any(np.diff(pts) <= 0):
            raise InvalidArgumentError("grid points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, lower: float, upper: float, size: int) -> "Grid":
        return cls(np.linspace(lower, upper, size))

    def __len__(self):
        return self.points.size

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.points[0]), float(self.points[-1])

    def riemann_weights(self) -> np.ndarray:
        """Midpoint weights ``(t[j+1] - t[j-1]) / 2`` with half intervals at the ends."""
        t = self.points
        w = np.empty_like(t)
        w[1:-1] = 0.5 * (t[2:] - t[:-2])
        w[0] = 0.5 * (t[1] - t[0])
        w[-1] = 0.5 * (t[-1] - t[-2])
        return w

    def __eq__(self, other):
        return isinstance(other, Grid) and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())


@dataclass(frozen=True)
class FunctionalSample:
    """``n`` curves observed on a common grid; ``values[i, j]`` is curve i at point j."""

    grid: Grid
    values: np.ndarray
    label: str = ""
    ids: tuple = field(default=None, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim == 1:
            vals = vals[None, :]
        if vals.ndim != 2 or vals.shape[0] < 1:
            raise InvalidArgumentError("values must be an n x p matrix with n >= 1")
        if vals.shape[1] != len(self.grid):
            raise InvalidArgumentError(
                f"values have {vals.shape[1]} columns but the grid has {len(self.grid)} points"
            )
        if not np.all(np.isfinite(vals)):
            raise InvalidArgumentError(f"sample {self.label!r} contains non-finite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        ids = self.ids
        if ids is None:
            ids = tuple(str(i + 1) for i in range(vals.shape[0]))
        elif len(ids) != vals.shape[0]:
            raise InvalidArgumentError("one id per curve required")
        object.__setattr__(self, "ids", tuple(ids))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def subset(self, index) -> "FunctionalSample":
        index = np.asarray(index)
        return FunctionalSample(
            self.grid, self.values[index], self.label, tuple(np.asarray(self.ids)[index])
        )

    def with_values(self, values) -> "FunctionalSample":
        return FunctionalSample(self.grid, values, self.label, self.ids)


@dataclass(frozen=True, eq=False)
class BsplineBasis:
    """B-spline basis of a given order (degree + 1) on ``[lower, upper]``."""

    order: int
    num_basis: int
    domain: tuple[float, float]
    interior_knots: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.interior_knots, dtype=np.float64).ravel()
        lo, hi = map(float, self.domain)
        if self.order < 1:
            raise InvalidArgumentError("order must be >= 1")
        if self.num_basis != knots.size + self.order:
            raise InvalidArgumentError("num_basis must equal interior knots + order")
        if not lo < hi:
            raise InvalidArgumentError(f"degenerate domain [{lo}, {hi}]")
        if knots.size and (knots[0] <= lo or knots[-1] >= hi or np.any(np.diff(knots) <= 0)):
            raise InvalidArgumentError("interior knots must be increasing and strictly inside the domain")
        knots.setflags(write=False)
        object.__setattr__(self, "interior_knots", knots)
        object.__setattr__(self, "domain", (lo, hi))

    def __eq__(self, other):
        return (isinstance(other, BsplineBasis) and self.order == other.order
                and self.num_basis == other.num_basis and self.domain == other.domain
                and np.array_equal(self.interior_knots, other.interior_knots))

    def __hash__(self):
        return hash((self.order, self.num_basis, self.domain, self.interior_knots.tobytes()))

    @property
    def knots(self) -> np.ndarray:
        """Full knot vector with ``order``-fold boundary knots."""
        lo, hi = self.domain
        return np.concatenate([np.full(self.order, lo), self.interior_knots, np.full(self.order, hi)])

    def breakpoints(self) -> np.ndarray:
        lo, hi = self.domain
        return np.concatenate([[lo], self.interior_knots, [hi]])

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "num_basis": self.num_basis,
            "domain": list(self.domain),
            "interior_knots": self.interior_knots.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BsplineBasis":
        return cls(int(d["order"]), int(d["num_basis"]), tuple(d["domain"]), np.asarray(d["interior_knots"]))


@dataclass(frozen=True)
class BasisCoefficients:
    coefs: np.ndarray
    basis: BsplineBasis

    def evaluate(self, grid: Grid) -> np.ndarray:
        return self.coefs @ evaluate_basis(self.basis, grid).T


@dataclass(frozen=True)
class GramMatrix:
    matrix: np.ndarray
    sqrt: np.ndarray
    inv_sqrt: np.ndarray


def make_bspline_basis(K: int, order: int = 4, domain: Sequence[float] = (0.0, 1.0)) -> BsplineBasis:
    """Basis with ``K - order`` equally spaced interior knots."""
    K, order = int(K), int(order)
    if order < 1:
        raise InvalidArgumentError("order must be >= 1")
    if K < order:
        raise InvalidArgumentError(f"K={K} is smaller than the spline order {order}")
    lo, hi = map(float, domain)
    if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
        raise InvalidArgumentError(f"degenerate domain [{lo}, {hi}]")
    n_interior = K - order
    interior = lo + (hi - lo) * np.arange(1, n_interior + 1) / (n_interior + 1)
    return BsplineBasis(order, K, (lo, hi), interior)


def _as_points(grid) -> np.ndarray:
    if isinstance(grid, Grid):
        return grid.points
    return np.atleast_1d(np.asarray(grid, dtype=np.float64))


def evaluate_basis(basis: BsplineBasis, grid) -> np.ndarray:
    """``p x K`` matrix of basis values; row j holds all functions at point j."""
    x = _as_points(grid)
    lo, hi = basis.domain
    tol = 1e-12 * max(1.0, hi - lo)
    if np.any(x < lo - tol) or np.any(x > hi + tol):
        raise DomainError(f"evaluation points outside the basis domain [{lo}, {hi}]")
    return _backend.bspline_design(np.clip(x, lo, hi), basis.knots, basis.order)


def smooth_curves(sample: FunctionalSample, basis: BsplineBasis) -> BasisCoefficients:
    """Least-squares projection of every curve onto the basis."""
    B = evaluate_basis(basis, sample.grid)
    p, K = B.shape
    if p < K:
        raise RankError(f"{p} grid points cannot determine {K} basis coefficients", max_rank=p)
    cond = np.linalg.cond(B)
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericalError(f"basis design matrix is numerically singular (condition {cond:.3g})", cond)
    coefs, *_ = np.linalg.lstsq(B, sample.values.T, rcond=None)
    return BasisCoefficients(np.ascontiguousarray(coefs.T), basis)


def gram_matrix(basis: BsplineBasis) -> GramMatrix:
    """Inner products of the basis functions by per-span Gauss-Legendre quadrature."""
    nodes, weights = np.polynomial.legendre.leggauss(basis.order)
    bp = basis.breakpoints()
    a, b = bp[:-1], bp[1:]
    half = 0.5 * (b - a)
    x = (0.5 * (a + b))[:, None] + half[:, None] * nodes[None, :]
    w = half[:, None] * weights[None, :]
    Bq = evaluate_basis(basis, x.ravel())
    G = Bq.T @ (Bq * w.ravel()[:, None])
    G = 0.5 * (G + G.T)
    sqrt, inv_sqrt = symmetric_sqrt(G)
    return GramMatrix(G, sqrt, inv_sqrt)


def symmetric_sqrt(G: np.ndarray, floor: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric square root and its inverse from an eigendecomposition.

    Eigenvalues are floored at ``floor * max eigenvalue``.
    """
    lam, V = np.linalg.eigh(G)
    if lam[-1] <= 0:
        raise NumericalError("Gram matrix is not positive definite")
    lam = np.maximum(lam, floor * lam[-1])
    root = np.sqrt(lam)
    S = (V * root) @ V.T
    S_inv = (V / root) @ V.T
    return 0.5 * (S + S.T), 0.5 * (S_inv + S_inv.T)


def riemann_l2_norm(values, grid: Grid) -> float:
    values = np.asarray(values, dtype=np.float64)
    if values.shape[-1] != len(grid):
        raise InvalidArgumentError("values and grid lengths differ")
    return np.sqrt((values * values) @ grid.riemann_weights())


def center_functions(sample: FunctionalSample) -> tuple[FunctionalSample, np.ndarray]:
    mean = sample.values.mean(axis=0)
    return sample.with_values(sample.values - mean), mean


def gcv_select_nbasis(sample: FunctionalSample, candidates: Sequence[int], order: int = 4):
    """Pick the number of basis functions minimising GCV.

    Unpenalized LS smoothing has hat-matrix trace ``K``, so
    ``GCV(K) = p * RSS(K) / (n * (p - K)^2)`` summed over curves.

    Returns ``(best_K, {K: gcv})``.
    """
    p = len(sample.grid)
    scores = {}
    for K in candidates:
        K = int(K)
        if K >= p:
            continue
        basis = make_bspline_basis(K, order, sample.grid.domain)
        fitted = smooth_curves(sample, basis).evaluate(sample.grid)
        rss = np.sum((sample.values - fitted) ** 2)
        scores[K] = p * rss / (sample.n * (p - K) ** 2)
    if not scores:
        raise InvalidArgumentError("no candidate K smaller than the grid length")
    best = min(scores, key=lambda k: (scores[k], k))
    return best, scores
