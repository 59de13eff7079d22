"""Sparse linear regression and classification with L0-regularized objectives,
solved by cyclic coordinate descent and local combinatorial swap search over
duplicate-free regularization paths."""

from .cdsolver import (CDState, FitOptions, Model, check_stationarity,
                       fit_fixed, greedy_order)
from .data import (DataMatrix, DataError, SyntheticSpec, generate_synthetic,
                   load_csv, load_matrix_market, load_response)
from .objective import (CoordSubproblem, PenaltyConfig, loss_value,
                        majorization_constant, objective_value, solve_coord)

__version__ = "0.1.0"

__all__ = [
    "CDState", "CoordSubproblem", "DataError", "DataMatrix", "FitOptions",
    "Model", "PenaltyConfig", "SyntheticSpec", "check_stationarity",
    "fit", "cvfit", "fit_fixed", "generate_synthetic", "greedy_order",
    "load_csv", "load_matrix_market", "load_response", "loss_value",
    "majorization_constant", "objective_value", "solve_coord", "__version__",
]


def __getattr__(name):
    # fit/cvfit pull in the full solver stack; import lazily to keep
    # `import l0path` light for data-only use
    if name in ("fit", "cvfit", "predict_model"):
        from . import api
        return getattr(api, name)
    raise AttributeError(f"module 'l0path' has no attribute {name!r}")
