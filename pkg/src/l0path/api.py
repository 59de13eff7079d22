"""Array-in, array-out convenience layer over the solver stack: the same
numerics as the CLI, reachable from a Python session in one call."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .cdsolver import FitOptions, Model
from .data import DataMatrix
from .modelselect import CVResult, Predictions, cross_validate, predict
from .path import FitPath, fit_path

_OPTION_FIELDS = set(FitOptions.__dataclass_fields__)


def _coerce_matrix(x) -> DataMatrix:
    if isinstance(x, DataMatrix):
        return x
    if sp.issparse(x):
        return DataMatrix(csc=x)
    return DataMatrix(dense=np.asarray(x, dtype=np.float64))


def _coerce_options(options: dict) -> FitOptions:
    unknown = set(options) - _OPTION_FIELDS
    if unknown:
        raise TypeError(f"unknown fit option(s): {sorted(unknown)}")
    return FitOptions(**options)


def fit(x, y, penalty: str = "L0", loss: str = "squared", gamma_grid=None,
        box=None, lambda_grid=None, **options) -> FitPath:
    """Fit a regularization path; `x` may be a dense array, a scipy sparse
    matrix, or a DataMatrix. Keyword options map onto FitOptions."""
    X = _coerce_matrix(x)
    opts = _coerce_options(options)
    return fit_path(X, np.asarray(y, dtype=np.float64), loss=loss,
                    kind=penalty, gamma_grid=gamma_grid, opts=opts, box=box,
                    lambda_grid=lambda_grid)


def cvfit(x, y, penalty: str = "L0", loss: str = "squared", n_folds: int = 5,
          seed: int = 0, gamma_grid=None, box=None, **options) -> CVResult:
    """Cross-validated path fit; mirrors `fit` plus fold controls."""
    X = _coerce_matrix(x)
    opts = _coerce_options(options)
    return cross_validate(X, np.asarray(y, dtype=np.float64), loss=loss,
                          kind=penalty, gamma_grid=gamma_grid,
                          n_folds=n_folds, seed=seed, opts=opts, box=box)


def predict_model(model: Model, x_new, loss: str = "squared") -> Predictions:
    return predict(model, _coerce_matrix(x_new), loss=loss)
