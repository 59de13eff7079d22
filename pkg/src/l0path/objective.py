"""Loss functions, penalty configuration, and the exact one-dimensional
coordinate subproblem minimizer that drives every descent step."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .data import DataMatrix

LOSSES = ("squared", "logistic", "squared_hinge")
PENALTIES = ("L0", "L0L1", "L0L2")

_LOSS_CODE = {"squared": K.LOSS_SQUARED, "logistic": K.LOSS_LOGISTIC,
              "squared_hinge": K.LOSS_SQUARED_HINGE}
_PEN_CODE = {"L0": K.PEN_L0, "L0L1": K.PEN_L0L1, "L0L2": K.PEN_L0L2}


def loss_code(loss: str) -> int:
    try:
        return _LOSS_CODE[loss]
    except KeyError:
        raise ValueError(f"unknown loss {loss!r}; expected one of {LOSSES}") from None


def penalty_code(kind: str) -> int:
    try:
        return _PEN_CODE[kind]
    except KeyError:
        raise ValueError(f"unknown penalty {kind!r}; expected one of {PENALTIES}") from None


def is_classification(loss: str) -> bool:
    return loss_code(loss) != K.LOSS_SQUARED


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty kind plus its weights: lam charges each nonzero coefficient,
    gamma weights the continuous |b|^q term (q = 1 for L0L1, q = 2 for L0L2).
    An optional box constrains every coefficient to [lo, hi] with lo <= 0 <= hi
    so that zero stays feasible.
    """
    kind: str
    lam: float
    gamma: float = 0.0
    box: tuple[float, float] | None = None

    def __post_init__(self):
        penalty_code(self.kind)
        if self.lam < 0.0:
            raise ValueError("lam must be nonnegative")
        if self.gamma < 0.0:
            raise ValueError("gamma must be nonnegative")
        if self.kind == "L0" and self.gamma != 0.0:
            raise ValueError("pure L0 penalty requires gamma == 0")
        if self.box is not None:
            lo, hi = self.box
            if not (lo <= 0.0 <= hi):
                raise ValueError("box must satisfy lo <= 0 <= hi")

    @property
    def code(self) -> int:
        return _PEN_CODE[self.kind]

    def box_args(self) -> tuple[float, float, bool]:
        if self.box is None:
            return -np.inf, np.inf, False
        return float(self.box[0]), float(self.box[1]), True

    def with_lam(self, lam: float) -> "PenaltyConfig":
        return PenaltyConfig(self.kind, lam, self.gamma, self.box)

    def term(self, values: np.ndarray) -> float:
        """Penalty contribution of a coefficient vector (zeros contribute 0)."""
        nnz = int(np.count_nonzero(values))
        out = self.lam * nnz
        if self.kind == "L0L1":
            out += self.gamma * float(np.abs(values).sum())
        elif self.kind == "L0L2":
            out += self.gamma * float(np.dot(values, values))
        return out


@dataclass(frozen=True)
class CoordSubproblem:
    """One-dimensional restriction of the objective at a coordinate: curvature
    q > 0 and unpenalized minimizer btilde."""
    q: float
    btilde: float

    def __post_init__(self):
        if self.q <= 0.0:
            raise ValueError("curvature q must be positive")


def loss_value(loss: str, y: np.ndarray, eta: np.ndarray) -> float:
    """Total data-fit term: 0.5 * sum (y - eta)^2 for squared loss,
    sum log(1 + exp(-y*eta)) for logistic, sum max(0, 1 - y*eta)^2 for
    squared hinge."""
    code = loss_code(loss)
    y = np.asarray(y, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    if y.shape != eta.shape:
        raise ValueError("y and eta must have equal length")
    if not np.all(np.isfinite(eta)):
        raise ValueError("linear predictor contains non-finite entries")
    if code == K.LOSS_SQUARED:
        r = y - eta
        return 0.5 * float(np.dot(r, r))
    if code == K.LOSS_LOGISTIC:
        return float(np.logaddexp(0.0, -y * eta).sum())
    m = np.maximum(0.0, 1.0 - y * eta)
    return float(np.dot(m, m))


def objective_value(X: DataMatrix, y: np.ndarray, beta0: float,
                    beta: np.ndarray, loss: str, penalty: PenaltyConfig) -> float:
    """Full regularized objective at a dense coefficient vector; the intercept
    beta0 is never penalized."""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape[0] != X.p:
        raise ValueError("beta length does not match feature count")
    idx = np.flatnonzero(beta)
    eta = X.predict_linear(beta0, idx, beta[idx])
    return loss_value(loss, y, eta) + penalty.term(beta[idx])


def solve_coord(sub: CoordSubproblem, penalty: PenaltyConfig) -> float:
    """Global minimizer of (q/2)(b - btilde)^2 + lam*1[b != 0] + gamma*|b|^q
    over the box; ties between the surviving candidate and zero return zero."""
    lo, hi, has_box = penalty.box_args()
    return float(K.solve_coord_scalar(sub.q, sub.btilde, penalty.lam,
                                      penalty.gamma, penalty.code,
                                      lo, hi, has_box))


def majorization_constant(loss: str, col_sq_norm: float) -> float:
    """Curvature bound for one coordinate: ||x_i||^2 for squared loss,
    ||x_i||^2 / 4 for logistic, 2 ||x_i||^2 for squared hinge."""
    if col_sq_norm <= 0.0:
        raise ValueError("zero-norm column; excluded from descent")
    return K.MAJORIZATION_MULT[loss_code(loss)] * col_sq_norm
