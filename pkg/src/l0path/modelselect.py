"""Cross-validation, validation-set tuning, prediction, and the benchmark
statistical metrics (prediction-error ratio, false positives, support size).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .cdsolver import FitOptions, Model
from .data import DataError, DataMatrix
from .objective import is_classification, loss_value
from .path import FitPath, fit_path


@dataclass
class Predictions:
    """Linear predictor plus, for classification, hard labels and (logistic
    only) class-1 probabilities."""
    eta: np.ndarray
    labels: np.ndarray | None = None
    proba: np.ndarray | None = None


def predict(model: Model, X_new: DataMatrix, loss: str = "squared") -> Predictions:
    """eta = beta0 + X beta; classification adds sign labels (ties to +1) and
    logistic probabilities."""
    if model.indices.size and int(model.indices[-1]) >= X_new.p:
        raise ValueError(f"model references column {int(model.indices[-1])} "
                         f"but matrix has {X_new.p}")
    eta = X_new.predict_linear(model.beta0, model.indices, model.values)
    if not is_classification(loss):
        return Predictions(eta)
    labels = np.where(eta >= 0.0, 1.0, -1.0)
    proba = 1.0 / (1.0 + np.exp(-eta)) if loss == "logistic" else None
    return Predictions(eta, labels, proba)


def mean_validation_loss(model: Model, X_val: DataMatrix, y_val: np.ndarray,
                         loss: str) -> float:
    """Per-sample validation criterion: MSE for regression, mean loss for
    classification."""
    if not X_val.is_sparse and model.indices.size:
        # prediction only; the gathered matmul does not feed solver state
        eta = model.beta0 + X_val.dense[:, model.indices] @ model.values
    else:
        eta = X_val.predict_linear(model.beta0, model.indices, model.values)
    if not is_classification(loss):
        r = y_val - eta
        return float(np.dot(r, r)) / y_val.shape[0]
    return loss_value(loss, y_val, eta) / y_val.shape[0]


def prediction_error(X: DataMatrix, beta_hat: np.ndarray,
                     beta_star: np.ndarray) -> float:
    """||X beta_hat - X beta*||_2 / ||X beta*||_2 (no intercept term)."""
    beta_hat = np.asarray(beta_hat, dtype=np.float64)
    beta_star = np.asarray(beta_star, dtype=np.float64)
    idx = np.flatnonzero(beta_star)
    eta_star = X.predict_linear(0.0, idx, beta_star[idx])
    den = float(np.linalg.norm(eta_star))
    if den == 0.0:
        raise ValueError("X beta* is zero; prediction error undefined")
    idxh = np.flatnonzero(beta_hat)
    eta_hat = X.predict_linear(0.0, idxh, beta_hat[idxh])
    return float(np.linalg.norm(eta_hat - eta_star)) / den


def support_metrics(beta_hat: np.ndarray, beta_star: np.ndarray) -> tuple[int, int]:
    """(false positives, support size) of beta_hat against beta_star;
    'nonzero' means exactly nonzero."""
    beta_hat = np.asarray(beta_hat)
    beta_star = np.asarray(beta_star)
    if beta_hat.shape != beta_star.shape:
        raise ValueError("coefficient vectors must have equal length")
    supp_hat = np.flatnonzero(beta_hat)
    supp_star = set(np.flatnonzero(beta_star).tolist())
    fp = sum(1 for i in supp_hat if int(i) not in supp_star)
    return fp, int(supp_hat.size)


@dataclass
class CVResult:
    """Mean validation loss and its standard error across folds for every
    (gamma, lambda) grid point of the full-data path, plus the selected pair."""
    gammas: np.ndarray
    lambda_grids: list[np.ndarray]
    mean_loss: list[np.ndarray]
    se_loss: list[np.ndarray]
    best_gamma: float
    best_lambda: float
    best_model: Model
    seed: int
    n_folds: int
    full_path: FitPath


def _make_folds(n: int, n_folds: int, seed: int) -> list[np.ndarray]:
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(perm, n_folds)]


def cross_validate(X: DataMatrix, y: np.ndarray, loss: str = "squared",
                   kind: str = "L0", gamma_grid=None, n_folds: int = 5,
                   seed: int = 0, opts: FitOptions | None = None,
                   box=None) -> CVResult:
    """K-fold cross-validation over the full-data (gamma, lambda) grid.

    The grid comes from one path fit on all samples; each fold refits with
    that grid passed through verbatim, so every fold scores the same
    (gamma, lambda) points. Ties in mean loss resolve toward larger lambda.
    """
    if n_folds < 2 or n_folds > X.n:
        raise ValueError("n_folds must lie in [2, n]")
    opts = opts or FitOptions()
    y = np.asarray(y, dtype=np.float64)
    full = fit_path(X, y, loss, kind, gamma_grid, opts, box=box)
    grids = [full.lambdas(g) for g in range(full.gammas.size)]

    folds = _make_folds(X.n, n_folds, seed)
    if is_classification(loss):
        for attempt in range(2):
            bad = any(np.unique(y[np.setdiff1d(np.arange(X.n), f)]).size < 2
                      for f in folds)
            if not bad:
                break
            if attempt == 0:
                warnings.warn("a training fold had constant labels; "
                              "rerandomizing folds once", stacklevel=2)
                folds = _make_folds(X.n, n_folds, seed + 1)
        else:
            raise DataError("could not build folds with both classes present")

    per_fold: list[list[np.ndarray]] = []
    for f_idx in folds:
        train_idx = np.setdiff1d(np.arange(X.n), f_idx)
        X_tr = X.take_rows(train_idx)
        X_va = X.take_rows(f_idx)
        fold_path = fit_path(X_tr, y[train_idx], loss, kind,
                             gamma_grid=list(full.gammas), opts=opts, box=box,
                             lambda_grid=grids)
        fold_losses = []
        for g in range(full.gammas.size):
            vals = np.asarray([mean_validation_loss(m, X_va, y[f_idx], loss)
                               for m in fold_path.models[g]])
            fold_losses.append(vals)
        per_fold.append(fold_losses)

    mean_loss, se_loss = [], []
    for g in range(full.gammas.size):
        stack = np.vstack([pf[g] for pf in per_fold])
        mean_loss.append(stack.mean(axis=0))
        se_loss.append(stack.std(axis=0, ddof=1) / np.sqrt(n_folds))

    best = (np.inf, 0, 0)
    for g in range(full.gammas.size):
        for t in range(grids[g].size):
            if mean_loss[g][t] < best[0]:
                best = (float(mean_loss[g][t]), g, t)
    _, g_best, t_best = best
    return CVResult(full.gammas, grids, mean_loss, se_loss,
                    float(full.gammas[g_best]), float(grids[g_best][t_best]),
                    full.models[g_best][t_best], seed, n_folds, full)


def tune_on_validation(train: tuple[DataMatrix, np.ndarray],
                       valid: tuple[DataMatrix, np.ndarray],
                       loss: str = "squared", kind: str = "L0",
                       gamma_grid=None, opts: FitOptions | None = None,
                       box=None, path: FitPath | None = None):
    """Fit the path on the training split and pick the (gamma, lambda) with
    the smallest validation criterion (MSE for regression); ties resolve
    toward larger lambda. Returns (best model, metrics table, path)."""
    X_tr, y_tr = train
    X_va, y_va = valid
    if X_va.p != X_tr.p:
        raise ValueError("train and validation feature counts differ")
    if path is None:
        path = fit_path(X_tr, y_tr, loss, kind, gamma_grid, opts, box=box)
    rows = []
    best = (np.inf, None)
    for g in range(path.gammas.size):
        for m in path.models[g]:
            v = mean_validation_loss(m, X_va, y_va, loss)
            rows.append({"gamma": float(path.gammas[g]), "lam": m.lam,
                         "support_size": m.support_size,
                         "objective": m.objective, "val_loss": v})
            if v < best[0]:
                best = (v, m)
    if best[1] is None:
        raise ValueError("empty path; nothing to select")
    return best[1], rows, path
