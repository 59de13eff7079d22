"""Regularization-path driver: data-dependent duplicate-free lambda grids,
descending gamma chains, warm starts, and correlation screening.

Each gamma chain keeps one live CDState across its whole lambda sequence.
The stationarity probe that certifies a fit also yields, at no extra cost,
the entry threshold of every excluded coordinate at the new fixed point; the
next lambda is set from those thresholds so that at least one excluded
coordinate strictly enters at the warm start, which is what keeps
consecutive supports distinct.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .cdsolver import (CDState, FitOptions, Model, _STAT_TOL, _fit_core,
                       _order_by_score)
from .data import DataMatrix
from .objective import PenaltyConfig, loss_code, majorization_constant
from .swaps import local_search


@dataclass
class ChainInfo:
    gamma: float
    termination: str
    n_fits: int
    seconds: float
    sweeps: int


@dataclass
class FitPath:
    """Fitted models over a (gamma, lambda) grid: gammas descending, lambdas
    strictly decreasing within each gamma, consecutive supports distinct on
    the data-dependent grid."""
    gammas: np.ndarray
    models: list[list[Model]]
    loss: str
    kind: str
    opts: FitOptions
    chain_info: list[ChainInfo] = field(default_factory=list)

    def lambdas(self, g: int) -> np.ndarray:
        return np.asarray([m.lam for m in self.models[g]])

    def iter_models(self):
        for g, chain in enumerate(self.models):
            for m in chain:
                yield float(self.gammas[g]), m

    def n_models(self) -> int:
        return sum(len(chain) for chain in self.models)


def entry_threshold(X: DataMatrix, i: int, residual: np.ndarray, gamma: float,
                    kind: str, loss: str = "squared") -> float:
    """Lambda at which excluded coordinate i first enters, from the residual
    (squared loss) or negative-gradient vector at the current fixed point."""
    qn = float(X.col_sq_norms[i])
    if qn <= 0.0:
        raise ValueError(f"column {i} has zero norm and is excluded")
    q = majorization_constant(loss, qn)
    c = q * (X.column_dot(i, residual) / q)
    pen = PenaltyConfig(kind, 0.0, gamma if kind != "L0" else 0.0)
    return float(K.entry_threshold_scalar(c, q, pen.gamma, pen.code))


def lambda_max(X: DataMatrix, y: np.ndarray, loss: str = "squared",
               gamma: float = 0.0, kind: str = "L0") -> float:
    """Smallest lambda at which the fitted model is empty, evaluated at the
    null model (beta = 0, intercept at its loss-minimizing value)."""
    if not np.any(X.col_sq_norms > 0.0):
        raise ValueError("all columns have zero norm; lambda_max undefined")
    pen = PenaltyConfig(kind, 0.0, gamma if kind != "L0" else 0.0)
    st = CDState(X, y, loss, pen)
    cand = np.arange(X.p, dtype=np.int64)
    c_raw = np.empty(X.p)
    X.batch_dot(st.neg_grad(), cand, c_raw)
    thr = st.entry_thresholds(cand, c_raw)
    return float(thr.max())


def next_lambda(X: DataMatrix, residual: np.ndarray, model: Model,
                gamma: float, kind: str, alpha: float = 0.98,
                loss: str = "squared") -> float | None:
    """Next grid value after a fixed point: alpha times the largest entry
    threshold among excluded coordinates, capped at alpha times the current
    lambda. None signals support saturation."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    all_p = np.arange(X.p, dtype=np.int64)
    c = np.empty(X.p)
    X.batch_dot(np.ascontiguousarray(residual, dtype=np.float64), all_p, c)
    q_eff = K.MAJORIZATION_MULT[loss_code(loss)] * X.col_sq_norms
    beta = model.to_dense(X.p)
    pen = PenaltyConfig(kind, model.lam, gamma if kind != "L0" else 0.0)
    thr = np.empty(X.p)
    K.batch_threshold(c, q_eff, beta, all_p, pen.gamma, pen.code, thr)
    excluded = beta == 0.0
    max_bar = float(thr[excluded].max()) if np.any(excluded) else 0.0
    if max_bar <= 0.0:
        return None
    return alpha * min(model.lam, max_bar)


def screen(X: DataMatrix, residual: np.ndarray, K_size: int,
           support: np.ndarray | None = None) -> np.ndarray:
    """The K coordinates most correlated with the residual, by
    |<x_i, r>| / ||x_i||, always unioned with the given support. Screening
    only bounds the work per fit: the full stationarity probe afterwards
    restores any violator, so final models are unchanged."""
    if K_size < 1:
        raise ValueError("K must be at least 1")
    cand = np.arange(X.p, dtype=np.int64)
    if K_size >= X.p:
        out = cand
    else:
        c = np.empty(X.p)
        X.batch_dot(np.ascontiguousarray(residual, dtype=np.float64), cand, c)
        out = np.sort(_order_by_score(cand, c, X.col_sq_norms)[:K_size])
    if support is not None and np.asarray(support).size:
        out = np.union1d(out, np.asarray(support, dtype=np.int64))
    return out


def _screen_from_dots(st: CDState, c_full: np.ndarray, K_size: int) -> np.ndarray:
    all_p = np.arange(st.X.p, dtype=np.int64)
    top = np.sort(_order_by_score(all_p, c_full, st.X.col_sq_norms)[:K_size])
    return np.union1d(top, st.support())


def _fit_at(st: CDState, opts: FitOptions, all_p: np.ndarray, k_screen: int,
            c_full: np.ndarray) -> tuple[Model, np.ndarray]:
    """One warm-started fit at st.penalty, certified stationary over all p.

    c_full holds <x_i, w> for every coordinate at the warm-start point and is
    returned refreshed at the new fixed point, so consecutive lambda steps
    and the grid construction share a single full probe per fit.
    """
    p = all_p.shape[0]
    lo, hi, has_box = st.penalty.box_args()
    newval_full = np.empty(p)
    sweeps = 0
    converged = True
    termination = "converged"
    for _ in range(50):
        K.batch_newval(c_full, st.q_eff, st.beta, all_p, st.penalty.lam,
                       st.penalty.gamma, st.penalty.code, lo, hi, has_box,
                       newval_full)
        movers = all_p[np.abs(newval_full - st.beta) > _STAT_TOL]
        if movers.size == 0:
            break
        if k_screen < p:
            cand = np.union1d(_screen_from_dots(st, c_full, k_screen), movers)
            pos = np.searchsorted(all_p, cand)
        else:
            cand, pos = all_p, all_p
        info = _fit_core(st, opts, candidates=cand,
                         cached_check=(c_full[pos].copy(), newval_full[pos].copy()))
        sweeps += info["sweeps"]
        converged = info["converged"]
        termination = info["termination"]
        moved_by_swaps = False
        if opts.local_search:
            model = st.extract_model(sweeps, converged, termination)
            improved = local_search(st.X, st.y, model, st.loss, st.penalty,
                                    opts, candidates=cand if k_screen < p else None)
            if improved is not model:
                st2 = CDState(st.X, st.y, st.loss, st.penalty, model=improved)
                st.beta, st.beta0, st.state = st2.beta, st2.beta0, st2.state
                moved_by_swaps = True
        if cand.shape[0] == p and not moved_by_swaps and info["converged"]:
            # the core loop's certifying probe covered every coordinate at
            # the final point; reuse it instead of re-running the kernel
            c_full[:] = info["c_raw"]
            break
        st.X.batch_dot(st.neg_grad(), all_p, c_full)
        if not info["converged"]:
            break  # sweep budget exhausted; return the best iterate
    model = st.extract_model(sweeps, converged, termination)
    return model, c_full


def _chain(X: DataMatrix, y: np.ndarray, loss: str, kind: str, gamma: float,
           opts: FitOptions, box, lambda_grid: np.ndarray | None
           ) -> tuple[list[Model], ChainInfo]:
    """One descending-lambda chain at fixed gamma, from the empty model."""
    t0 = time.perf_counter()
    p = X.p
    all_p = np.arange(p, dtype=np.int64)
    k_screen = opts.resolved_screening(p)
    max_supp = opts.resolved_max_support(X.n, p)
    gamma_eff = gamma if kind != "L0" else 0.0
    st = CDState(X, y, loss, PenaltyConfig(kind, 0.0, gamma_eff, box))
    st.update_intercept()

    c_full = np.empty(p)
    X.batch_dot(st.neg_grad(), all_p, c_full)
    models: list[Model] = []
    termination = "n_lambda"

    lam_seq: list[float] | None = None
    if lambda_grid is not None:
        lam_seq = [float(v) for v in np.asarray(lambda_grid, dtype=np.float64)]
        lam = lam_seq[0] if lam_seq else 0.0
    else:
        thr = st.entry_thresholds(all_p, c_full)
        lam = float(thr.max())
        if lam <= 0.0:
            m = st.extract_model()
            return [m], ChainInfo(gamma, "saturated", 1,
                                  time.perf_counter() - t0, st.sweep_count)

    prev_support: tuple | None = None
    fits = 0
    fit_cap = len(lam_seq) if lam_seq is not None else 3 * opts.n_lambda
    step = 0
    while True:
        if lam_seq is not None:
            if step >= len(lam_seq):
                termination = "grid_exhausted"
                break
            lam = lam_seq[step]
            step += 1
        elif len(models) >= opts.n_lambda:
            break
        elif fits >= fit_cap:
            termination = "stalled"
            break
        st.penalty = PenaltyConfig(kind, lam, gamma_eff, box)
        model, c_full = _fit_at(st, opts, all_p, k_screen, c_full)
        fits += 1
        if lam_seq is not None:
            models.append(model)
        else:
            key = tuple(model.indices.tolist())
            if key != prev_support:
                models.append(model)
                prev_support = key
            if model.support_size >= max_supp:
                termination = "max_support"
                break
            thr = st.entry_thresholds(all_p, c_full)
            excluded = st.beta == 0.0
            max_bar = float(thr[excluded].max()) if np.any(excluded) else 0.0
            if max_bar <= 0.0:
                termination = "saturated"
                break
            lam = opts.alpha * min(lam, max_bar)
    return models, ChainInfo(gamma, termination, fits,
                             time.perf_counter() - t0, st.sweep_count)


def fit_path(X: DataMatrix, y: np.ndarray, loss: str = "squared",
             kind: str = "L0", gamma_grid=None, opts: FitOptions | None = None,
             box: tuple[float, float] | None = None,
             lambda_grid=None) -> FitPath:
    """Fit the regularization surface: for each gamma (descending), a
    warm-started chain from the empty model at lambda_max down a
    data-dependent grid with no duplicate consecutive supports.

    lambda_grid, when given (one array, or one array per gamma), is used
    verbatim instead of the data-dependent grid; the no-duplicate guarantee
    then no longer applies.
    """
    opts = opts or FitOptions()
    if gamma_grid is None:
        gamma_grid = [0.0] if kind == "L0" else np.geomspace(1e2, 1e-2, 10)
    gammas = np.sort(np.asarray(list(gamma_grid), dtype=np.float64))[::-1].copy()
    if gammas.size == 0:
        raise ValueError("gamma_grid must be nonempty")
    if np.any(gammas < 0.0):
        raise ValueError("gamma values must be nonnegative")
    if kind == "L0" and np.any(gammas != 0.0):
        raise ValueError("pure L0 penalty requires gamma_grid == [0]")

    grids: list
    if lambda_grid is None:
        grids = [None] * gammas.size
    elif isinstance(lambda_grid, (list, tuple)) and len(lambda_grid) and \
            np.ndim(lambda_grid[0]) >= 1:
        if len(lambda_grid) != gammas.size:
            raise ValueError("need one lambda grid per gamma")
        grids = [np.asarray(g, dtype=np.float64) for g in lambda_grid]
    else:
        grids = [np.asarray(lambda_grid, dtype=np.float64)] * gammas.size

    results: list = [None] * gammas.size
    threads = opts.threads if opts.threads is not None else (os.cpu_count() or 1)
    if threads > 1 and gammas.size > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as ex:
            futs = {ex.submit(_chain, X, y, loss, kind, float(g), opts, box,
                              grids[i]): i for i, g in enumerate(gammas)}
            for fut, i in futs.items():
                results[i] = fut.result()
    else:
        for i, g in enumerate(gammas):
            results[i] = _chain(X, y, loss, kind, float(g), opts, box, grids[i])
    return FitPath(gammas, [r[0] for r in results], loss, kind, opts,
                   [r[1] for r in results])
