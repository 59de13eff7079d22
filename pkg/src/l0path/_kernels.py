"""Compiled inner loops shared by the dense and sparse fitting paths.

Every per-column reduction here accumulates into four lanes keyed by row
index mod 4, combined as (a0 + a1) + (a2 + a3). Entries that are exactly
zero contribute exactly nothing to an IEEE sum, so a dense matrix and its
CSC counterpart produce bit-identical dots and therefore bit-identical
solver trajectories, while the four independent chains keep the loop off
the floating-point add latency path. Do not replace these loops with BLAS
calls and do not enable fastmath: either would change summation order and
break the dense/sparse equivalence.
"""
from __future__ import annotations

import numpy as np
from numba import njit, prange

LOSS_SQUARED = 0
LOSS_LOGISTIC = 1
LOSS_SQUARED_HINGE = 2

PEN_L0 = 0
PEN_L0L1 = 1
PEN_L0L2 = 2

# curvature multiplier on ||x_i||^2 per loss (Lipschitz bound on d2L/deta2)
MAJORIZATION_MULT = (1.0, 0.25, 2.0)


@njit(cache=True, nogil=True, inline="always")
def entry_threshold_scalar(c, q, gamma, pen):
    """Largest lam at which a coordinate with linear term c = q*btilde and
    curvature q survives the 1-D keep/kill comparison."""
    if pen == PEN_L0L1:
        a = abs(c) - gamma
        if a <= 0.0:
            return 0.0
        return a * a / (2.0 * q)
    if pen == PEN_L0L2:
        return c * c / (2.0 * (q + 2.0 * gamma))
    return c * c / (2.0 * q)


@njit(cache=True, nogil=True, inline="always")
def solve_coord_scalar(q, btilde, lam, gamma, pen, lo, hi, has_box):
    """Global minimizer of (q/2)(b - btilde)^2 + lam*1[b != 0] + gamma*|b|^u
    with u = 1 (PEN_L0L1) or u = 2 (PEN_L0L2), optionally box-clipped.

    Ties between the nonzero candidate and zero resolve to zero. For the
    unclipped candidate the keep test is lam < entry_threshold, the exact
    algebraic inversion of g(v) < g(0)."""
    if pen == PEN_L0L1:
        a = abs(btilde) - gamma / q
        if a > 0.0:
            v = a if btilde > 0.0 else -a
        else:
            v = 0.0
    elif pen == PEN_L0L2:
        v = q * btilde / (q + 2.0 * gamma)
    else:
        v = btilde
    clipped = False
    if has_box:
        if v < lo:
            v = lo
            clipped = True
        elif v > hi:
            v = hi
            clipped = True
    if v == 0.0:
        return 0.0
    # keep/kill comparisons carry a 1e-12 relative dead band toward zero:
    # ties go to zero per the penalty semantics, and coordinates within an
    # ulp of their threshold cannot oscillate in and out across sweeps
    if clipped:
        d = v - btilde
        gv = 0.5 * q * d * d + lam
        if pen == PEN_L0L1:
            gv += gamma * abs(v)
        elif pen == PEN_L0L2:
            gv += gamma * v * v
        if gv < 0.5 * q * btilde * btilde * (1.0 - 1e-12):
            return v
        return 0.0
    c = q * btilde
    if lam < entry_threshold_scalar(c, q, gamma, pen) * (1.0 - 1e-12):
        return v
    return 0.0


@njit(cache=True, nogil=True, inline="always")
def _neg_grad_weight(loss, ys, es):
    """-dL/deta for one sample; squared loss uses the residual directly."""
    if loss == LOSS_LOGISTIC:
        return ys / (1.0 + np.exp(ys * es))
    m = 1.0 - ys * es
    if m > 0.0:
        return 2.0 * ys * m
    return 0.0


@njit(cache=True, nogil=True, inline="always")
def _dot_dense(xd, i, w, n):
    a0 = 0.0
    a1 = 0.0
    a2 = 0.0
    a3 = 0.0
    s = 0
    while s + 3 < n:
        a0 += xd[s, i] * w[s]
        a1 += xd[s + 1, i] * w[s + 1]
        a2 += xd[s + 2, i] * w[s + 2]
        a3 += xd[s + 3, i] * w[s + 3]
        s += 4
    while s < n:
        m = s & 3
        v = xd[s, i] * w[s]
        if m == 0:
            a0 += v
        elif m == 1:
            a1 += v
        elif m == 2:
            a2 += v
        else:
            a3 += v
        s += 1
    return (a0 + a1) + (a2 + a3)


@njit(cache=True, nogil=True, inline="always")
def _dot_dense_grad(xd, i, y, eta, n, loss):
    a0 = 0.0
    a1 = 0.0
    a2 = 0.0
    a3 = 0.0
    for s in range(n):
        m = s & 3
        v = xd[s, i] * _neg_grad_weight(loss, y[s], eta[s])
        if m == 0:
            a0 += v
        elif m == 1:
            a1 += v
        elif m == 2:
            a2 += v
        else:
            a3 += v
    return (a0 + a1) + (a2 + a3)


@njit(cache=True, nogil=True, inline="always")
def _dot_sparse(data, indices, k0, k1, w):
    a0 = 0.0
    a1 = 0.0
    a2 = 0.0
    a3 = 0.0
    for k in range(k0, k1):
        s = indices[k]
        m = s & 3
        v = data[k] * w[s]
        if m == 0:
            a0 += v
        elif m == 1:
            a1 += v
        elif m == 2:
            a2 += v
        else:
            a3 += v
    return (a0 + a1) + (a2 + a3)


@njit(cache=True, nogil=True, inline="always")
def _dot_sparse_grad(data, indices, k0, k1, y, eta, loss):
    a0 = 0.0
    a1 = 0.0
    a2 = 0.0
    a3 = 0.0
    for k in range(k0, k1):
        s = indices[k]
        m = s & 3
        v = data[k] * _neg_grad_weight(loss, y[s], eta[s])
        if m == 0:
            a0 += v
        elif m == 1:
            a1 += v
        elif m == 2:
            a2 += v
        else:
            a3 += v
    return (a0 + a1) + (a2 + a3)


@njit(cache=True, nogil=True, inline="always")
def _vec_sum(v, n):
    a0 = 0.0
    a1 = 0.0
    a2 = 0.0
    a3 = 0.0
    s = 0
    while s + 3 < n:
        a0 += v[s]
        a1 += v[s + 1]
        a2 += v[s + 2]
        a3 += v[s + 3]
        s += 4
    while s < n:
        m = s & 3
        if m == 0:
            a0 += v[s]
        elif m == 1:
            a1 += v[s]
        elif m == 2:
            a2 += v[s]
        else:
            a3 += v[s]
        s += 1
    return (a0 + a1) + (a2 + a3)


@njit(cache=True, nogil=True, parallel=True)
def dense_batch_dot(xd, w, cand, out):
    n = xd.shape[0]
    for t in prange(cand.shape[0]):
        out[t] = _dot_dense(xd, cand[t], w, n)


@njit(cache=True, nogil=True, parallel=True)
def sparse_batch_dot(data, indices, indptr, w, cand, out):
    for t in prange(cand.shape[0]):
        i = cand[t]
        out[t] = _dot_sparse(data, indices, indptr[i], indptr[i + 1], w)


@njit(cache=True, nogil=True, parallel=True)
def dense_col_stats(xd, sq, mu):
    n, p = xd.shape
    for i in prange(p):
        a0 = 0.0
        a1 = 0.0
        a2 = 0.0
        a3 = 0.0
        m0 = 0.0
        m1 = 0.0
        m2 = 0.0
        m3 = 0.0
        for s in range(n):
            m = s & 3
            v = xd[s, i]
            if m == 0:
                a0 += v * v
                m0 += v
            elif m == 1:
                a1 += v * v
                m1 += v
            elif m == 2:
                a2 += v * v
                m2 += v
            else:
                a3 += v * v
                m3 += v
        sq[i] = (a0 + a1) + (a2 + a3)
        mu[i] = ((m0 + m1) + (m2 + m3)) / n


@njit(cache=True, nogil=True, parallel=True)
def sparse_col_stats(data, indices, indptr, n, sq, mu):
    p = indptr.shape[0] - 1
    for i in prange(p):
        a0 = 0.0
        a1 = 0.0
        a2 = 0.0
        a3 = 0.0
        m0 = 0.0
        m1 = 0.0
        m2 = 0.0
        m3 = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            s = indices[k]
            m = s & 3
            v = data[k]
            if m == 0:
                a0 += v * v
                m0 += v
            elif m == 1:
                a1 += v * v
                m1 += v
            elif m == 2:
                a2 += v * v
                m2 += v
            else:
                a3 += v * v
                m3 += v
        sq[i] = (a0 + a1) + (a2 + a3)
        mu[i] = ((m0 + m1) + (m2 + m3)) / n


@njit(cache=True, nogil=True)
def dense_axpy(xd, i, a, out):
    for s in range(xd.shape[0]):
        out[s] += a * xd[s, i]


@njit(cache=True, nogil=True)
def sparse_axpy(data, indices, indptr, i, a, out):
    for k in range(indptr[i], indptr[i + 1]):
        out[indices[k]] += a * data[k]


@njit(cache=True, nogil=True)
def dense_sweep(xd, colsq, y, state, beta, coords, lam, gamma, pen,
                lo, hi, has_box, loss, mconst):
    """One cyclic pass over `coords`. `state` is the residual y - eta under
    squared loss and the linear predictor eta otherwise; it stays exactly in
    sync with beta. Returns (moved count, max |coefficient change|)."""
    n = xd.shape[0]
    moved = 0
    maxd = 0.0
    for t in range(coords.shape[0]):
        i = coords[t]
        q0 = colsq[i]
        if q0 <= 0.0:
            continue
        q = mconst * q0
        if loss == LOSS_SQUARED:
            acc = _dot_dense(xd, i, state, n)
        else:
            acc = _dot_dense_grad(xd, i, y, state, n, loss)
        b = beta[i] + acc / q
        v = solve_coord_scalar(q, b, lam, gamma, pen, lo, hi, has_box)
        d = v - beta[i]
        if d != 0.0:
            beta[i] = v
            moved += 1
            if abs(d) > maxd:
                maxd = abs(d)
            if loss == LOSS_SQUARED:
                for s in range(n):
                    state[s] -= d * xd[s, i]
            else:
                for s in range(n):
                    state[s] += d * xd[s, i]
    return moved, maxd


@njit(cache=True, nogil=True)
def sparse_sweep(data, indices, indptr, colsq, y, state, beta, coords,
                 lam, gamma, pen, lo, hi, has_box, loss, mconst):
    moved = 0
    maxd = 0.0
    for t in range(coords.shape[0]):
        i = coords[t]
        q0 = colsq[i]
        if q0 <= 0.0:
            continue
        q = mconst * q0
        k0 = indptr[i]
        k1 = indptr[i + 1]
        if loss == LOSS_SQUARED:
            acc = _dot_sparse(data, indices, k0, k1, state)
        else:
            acc = _dot_sparse_grad(data, indices, k0, k1, y, state, loss)
        b = beta[i] + acc / q
        v = solve_coord_scalar(q, b, lam, gamma, pen, lo, hi, has_box)
        d = v - beta[i]
        if d != 0.0:
            beta[i] = v
            moved += 1
            if abs(d) > maxd:
                maxd = abs(d)
            for k in range(k0, k1):
                if loss == LOSS_SQUARED:
                    state[indices[k]] -= d * data[k]
                else:
                    state[indices[k]] += d * data[k]
    return moved, maxd


@njit(cache=True, nogil=True, inline="always")
def _sq_obj_part(state, beta, coords, n, gamma, pen):
    """Squared-loss objective minus the lam*nnz term, restricted bookkeeping
    for the extrapolation guard (set changes are excluded by construction)."""
    f = 0.5 * _vec_sum_sq(state, n)
    if pen == PEN_L0L1:
        for t in range(coords.shape[0]):
            f += gamma * abs(beta[coords[t]])
    elif pen == PEN_L0L2:
        for t in range(coords.shape[0]):
            b = beta[coords[t]]
            f += gamma * b * b
    return f


@njit(cache=True, nogil=True, inline="always")
def _vec_sum_sq(v, n):
    a0 = 0.0
    a1 = 0.0
    a2 = 0.0
    a3 = 0.0
    s = 0
    while s + 3 < n:
        a0 += v[s] * v[s]
        a1 += v[s + 1] * v[s + 1]
        a2 += v[s + 2] * v[s + 2]
        a3 += v[s + 3] * v[s + 3]
        s += 4
    while s < n:
        m = s & 3
        if m == 0:
            a0 += v[s] * v[s]
        elif m == 1:
            a1 += v[s] * v[s]
        elif m == 2:
            a2 += v[s] * v[s]
        else:
            a3 += v[s] * v[s]
        s += 1
    return (a0 + a1) + (a2 + a3)



@njit(cache=True, nogil=True, inline="always")
def _dot_pair(a, b, nc):
    a0 = 0.0
    a1 = 0.0
    a2 = 0.0
    a3 = 0.0
    for t in range(nc):
        m = t & 3
        v = a[t] * b[t]
        if m == 0:
            a0 += v
        elif m == 1:
            a1 += v
        elif m == 2:
            a2 += v
        else:
            a3 += v
    return (a0 + a1) + (a2 + a3)


@njit(cache=True, nogil=True, inline="always")
def _loss_part(loss, y, state, n):
    """Data-fit term from the maintained state (residual or predictor)."""
    a0 = 0.0
    a1 = 0.0
    a2 = 0.0
    a3 = 0.0
    for s in range(n):
        if loss == LOSS_SQUARED:
            v = 0.5 * state[s] * state[s]
        elif loss == LOSS_LOGISTIC:
            z = -y[s] * state[s]
            if z > 0.0:
                v = z + np.log1p(np.exp(-z))
            else:
                v = np.log1p(np.exp(z))
        else:
            m = 1.0 - y[s] * state[s]
            v = m * m if m > 0.0 else 0.0
        lane = s & 3
        if lane == 0:
            a0 += v
        elif lane == 1:
            a1 += v
        elif lane == 2:
            a2 += v
        else:
            a3 += v
    return (a0 + a1) + (a2 + a3)


@njit(cache=True, nogil=True, inline="always")
def _pen_part(beta, coords, lam, gamma, pen):
    """Penalty over the swept coordinates (callers arrange that every
    nonzero coordinate is swept, so this is the whole penalty)."""
    f = 0.0
    for t in range(coords.shape[0]):
        b = beta[coords[t]]
        if b != 0.0:
            f += lam
            if pen == PEN_L0L1:
                f += gamma * abs(b)
            elif pen == PEN_L0L2:
                f += gamma * b * b
    return f


@njit(cache=True, nogil=True, inline="always")
def _intercept_step(loss, y, state, n):
    """Exact mean step for squared loss; one guarded Newton step otherwise.
    Returns the step; the caller shifts the state."""
    if loss == LOSS_SQUARED:
        return _vec_sum(state, n) / n
    sw = 0.0
    curv = 0.0
    for s in range(n):
        if loss == LOSS_LOGISTIC:
            pr = 1.0 / (1.0 + np.exp(-y[s] * state[s]))
            curv += pr * (1.0 - pr)
            sw += y[s] * (1.0 - pr)
        else:
            m = 1.0 - y[s] * state[s]
            if m > 0.0:
                curv += 2.0
                sw += 2.0 * y[s] * m
    if curv <= 0.0:
        return 0.0
    step = sw / curv
    if step > 30.0:
        step = 30.0
    elif step < -30.0:
        step = -30.0
    if step == 0.0:
        return 0.0
    f_cur = _loss_part(loss, y, state, n)
    for _ in range(60):
        f_try = 0.0
        b0 = 0.0
        b1 = 0.0
        b2 = 0.0
        b3 = 0.0
        for s in range(n):
            es = state[s] + step
            if loss == LOSS_LOGISTIC:
                z = -y[s] * es
                if z > 0.0:
                    v = z + np.log1p(np.exp(-z))
                else:
                    v = np.log1p(np.exp(z))
            else:
                m = 1.0 - y[s] * es
                v = m * m if m > 0.0 else 0.0
            lane = s & 3
            if lane == 0:
                b0 += v
            elif lane == 1:
                b1 += v
            elif lane == 2:
                b2 += v
            else:
                b3 += v
        f_try = (b0 + b1) + (b2 + b3)
        if f_try <= f_cur:
            return step
        step *= 0.5
    return 0.0


@njit(cache=True, nogil=True)
def dense_converge(xd, colsq, y, state, beta, coords, moving, lam, gamma,
                   pen, lo, hi, has_box, loss, mconst, stat_tol, max_passes,
                   do_intercept, obj_out):
    """Sweep `coords` cyclically until a pass moves nothing beyond stat_tol.
    An intercept step (exact for squared loss, guarded Newton otherwise) runs
    after each pass when requested; obj_out[t] records the full objective
    over the swept coordinates after pass t. Returns (passes, converged,
    intercept delta).

    Near an ill-conditioned fixed point the per-pass displacement decays
    geometrically along one dominant mode. After two consecutive passes with
    no support change, the decay ratio is estimated from displacement inner
    products and an Aitken jump of factor r/(1-r) is taken along the last
    displacement, guarded by an objective comparison (with one damped retry).
    Every branch is a deterministic function of the trajectory, so dense and
    sparse runs of the same data stay bit-identical."""
    n = xd.shape[0]
    nc = coords.shape[0]
    delta = np.zeros(nc)
    prev_delta = np.zeros(nc)
    have_prev = False
    attempts = 0
    b0_delta = 0.0
    passes = 0
    converged = False
    while passes < max_passes:
        maxd = 0.0
        set_change = False
        for t in range(nc):
            i = coords[t]
            q0 = colsq[i]
            if q0 <= 0.0:
                moving[t] = False
                delta[t] = 0.0
                continue
            q = mconst * q0
            if loss == LOSS_SQUARED:
                acc = _dot_dense(xd, i, state, n)
            else:
                acc = _dot_dense_grad(xd, i, y, state, n, loss)
            b = beta[i] + acc / q
            v = solve_coord_scalar(q, b, lam, gamma, pen, lo, hi, has_box)
            d = v - beta[i]
            if d != 0.0 and abs(d) <= 1e-14 * (abs(beta[i]) + abs(b)):
                d = 0.0   # sub-ulp dither around the fixed point
            delta[t] = d
            if d != 0.0:
                if (v == 0.0) or (beta[i] == 0.0):
                    set_change = True
                beta[i] = v
                if loss == LOSS_SQUARED:
                    for s in range(n):
                        state[s] -= d * xd[s, i]
                else:
                    for s in range(n):
                        state[s] += d * xd[s, i]
            ad = abs(d)
            moving[t] = ad > stat_tol
            if ad > maxd:
                maxd = ad
        if do_intercept:
            m = _intercept_step(loss, y, state, n)
            if m != 0.0:
                if loss == LOSS_SQUARED:
                    for s in range(n):
                        state[s] -= m
                else:
                    for s in range(n):
                        state[s] += m
                b0_delta += m
        obj_out[passes] = _loss_part(loss, y, state, n) + \
            _pen_part(beta, coords, lam, gamma, pen)
        passes += 1
        if maxd <= stat_tol:
            converged = True
            break
        if have_prev and not set_change and attempts < 12:
            den = _dot_pair(prev_delta, prev_delta, nc)
            num = _dot_pair(delta, prev_delta, nc)
            if den > 0.0:
                r = num / den
                if 0.05 < r < 0.999:
                    factor = r / (1.0 - r)
                    f_before = obj_out[passes - 1]
                    accepted = False
                    for _try in range(2):
                        applied_any = False
                        for t in range(nc):
                            d = factor * delta[t]
                            i = coords[t]
                            if d != 0.0 and beta[i] != 0.0:
                                nb = beta[i] + d
                                if nb != 0.0 and (not has_box or (lo <= nb <= hi)):
                                    beta[i] = nb
                                    applied_any = True
                                    if loss == LOSS_SQUARED:
                                        for s in range(n):
                                            state[s] -= d * xd[s, i]
                                    else:
                                        for s in range(n):
                                            state[s] += d * xd[s, i]
                                    continue
                            delta[t] = 0.0
                        if not applied_any:
                            break
                        if do_intercept:
                            m = _intercept_step(loss, y, state, n)
                            if m != 0.0:
                                if loss == LOSS_SQUARED:
                                    for s in range(n):
                                        state[s] -= m
                                else:
                                    for s in range(n):
                                        state[s] += m
                                b0_delta += m
                        f_after = _loss_part(loss, y, state, n) + \
                            _pen_part(beta, coords, lam, gamma, pen)
                        if f_after < f_before:
                            obj_out[passes - 1] = f_after
                            accepted = True
                            break
                        for t in range(nc):
                            d = factor * delta[t]
                            if d != 0.0:
                                i = coords[t]
                                beta[i] -= d
                                if loss == LOSS_SQUARED:
                                    for s in range(n):
                                        state[s] += d * xd[s, i]
                                else:
                                    for s in range(n):
                                        state[s] -= d * xd[s, i]
                        factor *= 0.25
                    if not accepted:
                        attempts += 1   # only failed attempts count
                    have_prev = False
                    continue
        if not set_change:
            for t in range(nc):
                prev_delta[t] = delta[t]
            have_prev = True
        else:
            have_prev = False
    return passes, converged, b0_delta


@njit(cache=True, nogil=True)
def sparse_converge(data, indices, indptr, colsq, y, state, beta, coords,
                    moving, lam, gamma, pen, lo, hi, has_box, loss, mconst,
                    stat_tol, max_passes, do_intercept, obj_out):
    n = state.shape[0]
    nc = coords.shape[0]
    delta = np.zeros(nc)
    prev_delta = np.zeros(nc)
    have_prev = False
    attempts = 0
    b0_delta = 0.0
    passes = 0
    converged = False
    while passes < max_passes:
        maxd = 0.0
        set_change = False
        for t in range(nc):
            i = coords[t]
            q0 = colsq[i]
            if q0 <= 0.0:
                moving[t] = False
                delta[t] = 0.0
                continue
            q = mconst * q0
            k0 = indptr[i]
            k1 = indptr[i + 1]
            if loss == LOSS_SQUARED:
                acc = _dot_sparse(data, indices, k0, k1, state)
            else:
                acc = _dot_sparse_grad(data, indices, k0, k1, y, state, loss)
            b = beta[i] + acc / q
            v = solve_coord_scalar(q, b, lam, gamma, pen, lo, hi, has_box)
            d = v - beta[i]
            if d != 0.0 and abs(d) <= 1e-14 * (abs(beta[i]) + abs(b)):
                d = 0.0   # sub-ulp dither around the fixed point
            delta[t] = d
            if d != 0.0:
                if (v == 0.0) or (beta[i] == 0.0):
                    set_change = True
                beta[i] = v
                for k in range(k0, k1):
                    if loss == LOSS_SQUARED:
                        state[indices[k]] -= d * data[k]
                    else:
                        state[indices[k]] += d * data[k]
            ad = abs(d)
            moving[t] = ad > stat_tol
            if ad > maxd:
                maxd = ad
        if do_intercept:
            m = _intercept_step(loss, y, state, n)
            if m != 0.0:
                if loss == LOSS_SQUARED:
                    for s in range(n):
                        state[s] -= m
                else:
                    for s in range(n):
                        state[s] += m
                b0_delta += m
        obj_out[passes] = _loss_part(loss, y, state, n) + \
            _pen_part(beta, coords, lam, gamma, pen)
        passes += 1
        if maxd <= stat_tol:
            converged = True
            break
        if have_prev and not set_change and attempts < 12:
            den = _dot_pair(prev_delta, prev_delta, nc)
            num = _dot_pair(delta, prev_delta, nc)
            if den > 0.0:
                r = num / den
                if 0.05 < r < 0.999:
                    factor = r / (1.0 - r)
                    f_before = obj_out[passes - 1]
                    accepted = False
                    for _try in range(2):
                        applied_any = False
                        for t in range(nc):
                            d = factor * delta[t]
                            i = coords[t]
                            if d != 0.0 and beta[i] != 0.0:
                                nb = beta[i] + d
                                if nb != 0.0 and (not has_box or (lo <= nb <= hi)):
                                    beta[i] = nb
                                    applied_any = True
                                    for k in range(indptr[i], indptr[i + 1]):
                                        if loss == LOSS_SQUARED:
                                            state[indices[k]] -= d * data[k]
                                        else:
                                            state[indices[k]] += d * data[k]
                                    continue
                            delta[t] = 0.0
                        if not applied_any:
                            break
                        if do_intercept:
                            m = _intercept_step(loss, y, state, n)
                            if m != 0.0:
                                if loss == LOSS_SQUARED:
                                    for s in range(n):
                                        state[s] -= m
                                else:
                                    for s in range(n):
                                        state[s] += m
                                b0_delta += m
                        f_after = _loss_part(loss, y, state, n) + \
                            _pen_part(beta, coords, lam, gamma, pen)
                        if f_after < f_before:
                            obj_out[passes - 1] = f_after
                            accepted = True
                            break
                        for t in range(nc):
                            d = factor * delta[t]
                            if d != 0.0:
                                i = coords[t]
                                beta[i] -= d
                                for k in range(indptr[i], indptr[i + 1]):
                                    if loss == LOSS_SQUARED:
                                        state[indices[k]] += d * data[k]
                                    else:
                                        state[indices[k]] -= d * data[k]
                        factor *= 0.25
                    if not accepted:
                        attempts += 1   # only failed attempts count
                    have_prev = False
                    continue
        if not set_change:
            for t in range(nc):
                prev_delta[t] = delta[t]
            have_prev = True
        else:
            have_prev = False
    return passes, converged, b0_delta


@njit(cache=True, nogil=True, parallel=True)
def batch_newval(c_raw, q_eff, beta, cand, lam, gamma, pen, lo, hi, has_box, out):
    """Vectorized stationarity probe: the value the 1-D minimizer would
    assign each candidate given raw dot c_raw[t] = <x_i, w>. Mirrors the
    sweep kernels' double rounding of btilde exactly."""
    for t in prange(cand.shape[0]):
        i = cand[t]
        q = q_eff[i]
        if q <= 0.0:
            out[t] = 0.0
        else:
            b = beta[i] + c_raw[t] / q
            out[t] = solve_coord_scalar(q, b, lam, gamma, pen, lo, hi, has_box)


@njit(cache=True, nogil=True, parallel=True)
def batch_threshold(c_raw, q_eff, beta, cand, gamma, pen, out):
    """Entry threshold lambda-bar for each candidate at the current point."""
    for t in prange(cand.shape[0]):
        i = cand[t]
        q = q_eff[i]
        if q <= 0.0:
            out[t] = 0.0
        else:
            b = beta[i] + c_raw[t] / q
            out[t] = entry_threshold_scalar(q * b, q, gamma, pen)
