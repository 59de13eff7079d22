"""Brute-force reference solvers.

These are deliberately independent of the descent machinery: the subset
oracle enumerates supports and solves restricted normal equations, and the
1-D oracle evaluates the coordinate objective on a fine grid. They ship with
the library so reference values in the docs and tests are reproducible.
"""
from __future__ import annotations

import itertools

import numpy as np

from .data import DataMatrix


def _coord_g(b, q, btilde, lam, gamma, kind):
    val = 0.5 * q * (b - btilde) ** 2
    if b != 0.0:
        val += lam
        if kind == "L0L1":
            val += gamma * abs(b)
        elif kind == "L0L2":
            val += gamma * b * b
    return val


def _golden_min(f, a, b, iters=80):
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = b - phi * (b - a)
    x2 = a + phi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - phi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + phi * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def brute_force_1d(q: float, btilde: float, lam: float, gamma: float,
                   kind: str, box: tuple[float, float] | None = None) -> float:
    """Grid-search minimizer of the 1-D coordinate objective.

    Scans [-M, M] with M = max(10, 3|btilde|) at step 1e-4, refines around the
    best grid point by golden section, and compares the result against zero
    and the clipped closed-form candidate by direct objective evaluation.
    """
    if q <= 0.0:
        raise ValueError("q must be positive")
    lo, hi = (-np.inf, np.inf) if box is None else box

    def g(b):
        if b < lo or b > hi:
            return np.inf
        return _coord_g(b, q, btilde, lam, gamma, kind)

    m = max(10.0, 3.0 * abs(btilde))
    grid = np.arange(-m, m + 1e-4, 1e-4)
    if box is not None:
        grid = grid[(grid >= lo) & (grid <= hi)]
    vals = 0.5 * q * (grid - btilde) ** 2
    nz = grid != 0.0
    vals[nz] += lam
    if kind == "L0L1":
        vals[nz] += gamma * np.abs(grid[nz])
    elif kind == "L0L2":
        vals[nz] += gamma * grid[nz] ** 2
    best = grid[int(np.argmin(vals))]
    refined = _golden_min(g, best - 1e-4, best + 1e-4)

    # closed-form candidate, clipped
    if kind == "L0L1":
        a = abs(btilde) - gamma / q
        v = np.sign(btilde) * max(a, 0.0)
    elif kind == "L0L2":
        v = q * btilde / (q + 2.0 * gamma)
    else:
        v = btilde
    v = min(max(v, lo), hi)

    # below the evaluation resolution of g the argmin is ill-posed; prefer the
    # (independently computed) closed-form candidate over the grid refinement
    # on sub-resolution ties, and zero over any nonzero candidate on ties
    gv, gr = g(v), g(refined)
    nonzero = v if gv <= gr + 1e-12 * max(1.0, abs(gv)) else refined
    if g(nonzero) < g(0.0) and nonzero != 0.0:
        return float(nonzero)
    return 0.0


def _solve_normal(G, rhs):
    try:
        return np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        # smallest-norm solution of the (possibly singular) normal equations
        return np.linalg.pinv(G) @ rhs


def brute_force_subset(X: DataMatrix, y: np.ndarray, lam: float, gamma: float,
                       kind: str, max_p: int = 20):
    """Exhaustive best-subset solver for the squared-error objective.

    Enumerates all 2^p supports (p <= max_p <= 20); each restricted problem is
    solved exactly via the normal equations of [1, X_S] (ridge for L0L2,
    sign-pattern sub-enumeration for L0L1, p <= 10 in that case). The Gram
    matrix is formed once so each subset costs O(|S|^3). Returns
    (objective, support tuple, dense beta, beta0); ties prefer the
    lexicographically smallest support.
    """
    p = X.p
    if p > min(max_p, 20):
        raise ValueError(f"p = {p} too large for exhaustive enumeration")
    if kind == "L0L1" and p > 10:
        raise ValueError("L0L1 sub-enumeration limited to p <= 10")
    Xd = X.to_dense().dense
    y = np.asarray(y, dtype=np.float64)
    A = np.hstack([np.ones((X.n, 1)), Xd])
    G = A.T @ A
    rhs_full = A.T @ y
    yy = float(y @ y)

    def subset_obj(supp, signs=None):
        cols = np.concatenate([[0], np.asarray(supp, dtype=np.int64) + 1])
        Gs = G[np.ix_(cols, cols)].copy()
        rhs = rhs_full[cols].copy()
        if kind == "L0L2" and len(supp):
            Gs[1:, 1:] += 2.0 * gamma * np.eye(len(supp))
        if signs is not None:
            rhs[1:] -= gamma * signs
        theta = _solve_normal(Gs, rhs)
        # 0.5 ||y - A theta||^2 via the Gram expansion
        quad = float(theta @ (G[np.ix_(cols, cols)] @ theta))
        fit = 0.5 * (yy - 2.0 * float(theta @ rhs_full[cols]) + quad)
        return theta, fit

    best = (np.inf, (), np.zeros(p), float(np.mean(y)))
    for size in range(p + 1):
        for supp in itertools.combinations(range(p), size):
            if kind == "L0L1" and supp:
                for signs in itertools.product((-1.0, 1.0), repeat=size):
                    s = np.asarray(signs)
                    theta, fit = subset_obj(supp, s)
                    b = theta[1:]
                    if np.any(np.sign(b) * s < 0.0):
                        continue
                    obj = fit + lam * size + gamma * float(np.abs(b).sum())
                    if obj < best[0] - 1e-15:
                        beta = np.zeros(p)
                        beta[list(supp)] = b
                        best = (obj, supp, beta, float(theta[0]))
            else:
                theta, fit = subset_obj(supp)
                obj = fit + lam * size
                if kind == "L0L2" and supp:
                    obj += gamma * float(theta[1:] @ theta[1:])
                if obj < best[0] - 1e-15:
                    beta = np.zeros(p)
                    if supp:
                        beta[list(supp)] = theta[1:]
                    best = (obj, supp, beta, float(theta[0]))
    return best
