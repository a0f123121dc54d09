"""Robust partial least squares for function-on-function linear regression."""
from ._backend import BACKEND
from .bootstrap import PredictionBand, bootstrap_bands, cpd, coverage, interval_score
from .exceptions import DomainError, InvalidArgumentError, NumericalError, RankError, RfplsError
from .fflr import (
    DesignPair,
    FflrModel,
    ModelSpec,
    build_design,
    coefficient_surface,
    fit_fflr,
    predict_response,
    select_ncomp_tmape,
)
from .funcdata import (
    BasisCoefficients,
    BsplineBasis,
    FunctionalSample,
    GramMatrix,
    Grid,
    center_functions,
    evaluate_basis,
    gcv_select_nbasis,
    gram_matrix,
    make_bspline_basis,
    riemann_l2_norm,
    smooth_curves,
)
from .metrics import mape, mdape, mse_trimmed, r2
from .simpls import IrsimplsConfig, PlsFit, irsimpls_fit, pls_predict, simpls_fit

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "PredictionBand", "bootstrap_bands", "cpd", "coverage", "interval_score",
    "DomainError", "InvalidArgumentError", "NumericalError", "RankError", "RfplsError",
    "DesignPair", "FflrModel", "ModelSpec", "build_design", "coefficient_surface", "fit_fflr",
    "predict_response", "select_ncomp_tmape", "BasisCoefficients", "BsplineBasis",
    "FunctionalSample", "GramMatrix", "Grid", "center_functions", "evaluate_basis",
    "gcv_select_nbasis", "gram_matrix", "make_bspline_basis", "riemann_l2_norm", "smooth_curves",
    "mape", "mdape", "mse_trimmed", "r2", "IrsimplsConfig", "PlsFit", "irsimpls_fit",
    "pls_predict", "simpls_fit",
]
