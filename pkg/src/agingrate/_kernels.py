"""Numba chain kernel for the mortality model.

Runs the same move schedule as the generic reference engine in ``mwg`` but
evaluates only the likelihood rows a proposal actually touches.  Cohort t's
log slope is ``log_b + beta*(t+1) + cumw[t]`` (zero-based t), where ``cumw``
caches the cumulative innovation sum; per-cohort likelihood rows are cached
and refreshed whenever they are recomputed.  Both caches are rebuilt from the
canonical state every ``rebaseline_every`` sweeps to stop float drift.

Move kinds (``move_kind`` codes; ``move_t`` carries the cohort index):

    0  log a_t        single coordinate, touches row t
    1  log gamma_t    single coordinate, touches row t
    2  w_t            shifts the walk tail, touches rows t..T-1
    3  (w_t, -w_t+1)  moves X_t alone, touches row t
    4  log_b          touches all rows
    5  beta           touches all rows
    6  (log_b, -w_1)  likelihood-flat intercept shift, prior-only
    7  (beta, -w_all) likelihood-flat drift shift, prior-only
    8  (log_b, beta)  along the least-squares ridge direction, all rows
    9  log sigma_rw   prior-only
    10 cohort triple  (log a_t, log gamma_t, X_t) along a fixed conjugate
       direction from ``move_coef``; X_t realized as a (w_t, -w_t+1) pair
       (plain w_T for the last cohort), so only row t is touched
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

KIND_LOG_A = 0
KIND_LOG_GAMMA = 1
KIND_W = 2
KIND_W_PAIR = 3
KIND_LOG_B = 4
KIND_BETA = 5
KIND_SHIFT_B_W1 = 6
KIND_SHIFT_BETA_W = 7
KIND_LINE_B_BETA = 8
KIND_LOG_SIGMA = 9
KIND_COHORT_TRIPLE = 10

_LOG_2PI = math.log(2.0 * math.pi)
_LOG_2 = math.log(2.0)
_BX_STABLE = 30.0


@njit(cache=True, nogil=True)
def _row_ll(a, g, logbt, d, e, c, m, xmid):
    """Poisson log likelihood of one cohort row; -inf where the model dies."""
    b = math.exp(logbt)
    if not math.isfinite(b) or b <= 0.0:
        for j in range(d.shape[0]):
            if m[j]:
                return -np.inf
        return 0.0
    gab = g * a / b
    eb = math.exp(b)
    u = math.exp(0.5 * b)
    s = 0.0
    for j in range(xmid.shape[0]):
        if m[j]:
            bx = b * xmid[j]
            if bx <= _BX_STABLE:
                lam = a * u / (1.0 + gab * (u - 1.0))
            else:
                emb = math.exp(-bx)
                lam = a / (emb + gab * (1.0 - emb))
            mu = lam * e[j]
            if mu == 0.0:
                if d[j] > 0.0:
                    return -np.inf
            elif not math.isfinite(mu):
                return -np.inf
            else:
                if d[j] > 0.0:
                    s += d[j] * math.log(lam)
                s += c[j] - mu
        u *= eb
    return s


@njit(cache=True, nogil=True)
def _refresh_rows(ll, avals, gvals, lb, be, cumw, d, e, c, m, xmid):
    for t in range(ll.shape[0]):
        logbt = lb + be * (t + 1.0) + cumw[t]
        ll[t] = _row_ll(avals[t], gvals[t], logbt, d[t], e[t], c[t], m[t], xmid)


@njit(cache=True, nogil=True)
def _halfnorm_lp(x, scale):
    return _LOG_2 - math.log(scale) - 0.5 * _LOG_2PI - 0.5 * (x / scale) ** 2


@njit(cache=True, nogil=True)
def _gamma_lp(x, shape, rate):
    return (
        shape * math.log(rate)
        - math.lgamma(shape)
        + (shape - 1.0) * math.log(x)
        - rate * x
    )


@njit(cache=True, nogil=True)
def _norm_lp(x, sd):
    return -math.log(sd) - 0.5 * _LOG_2PI - 0.5 * (x / sd) ** 2


@njit(cache=True, nogil=True)
def _laplace_lp(x, scale):
    return -math.log(2.0 * scale) - abs(x) / scale


@njit(cache=True, nogil=True)
def _accept(delta, u):
    return delta > -np.inf and (u <= 0.0 or math.log(u) < delta)


@njit(cache=True, nogil=True)
def run_chain(
    d,
    e,
    c,
    m,
    xmid,
    x0,
    move_kind,
    move_t,
    move_coef,
    move_active,
    move_period,
    scales0,
    normals,
    uniforms,
    n_iter,
    n_warmup,
    adapt_until,
    target_accept,
    adapt_offset,
    adapt_exponent,
    rebaseline_every,
    prior_a_scale,
    prior_g_shape,
    prior_g_rate,
    prior_lb_sd,
    prior_be_sd,
    prior_s_scale,
    ridge_coef,
):
    """One chain; returns (draws, scales, accept_rates, last_adapt_iteration).

    ``x0`` is the unconstrained start [log a (T), log gamma (T), w (T),
    log_b, beta, log sigma_rw]; draws come back on the constrained scale in
    the same layout with a, gamma, sigma_rw exponentiated.  Draws are
    collected from iteration ``n_warmup`` on; proposal scales adapt while the
    iteration is below ``adapt_until`` (equal to ``n_warmup`` for a plain
    run, larger during a pilot stage whose draws only feed direction
    estimation).
    """
    T = d.shape[0]
    ua = x0[0:T].copy()
    ug = x0[T : 2 * T].copy()
    w = x0[2 * T : 3 * T].copy()
    lb = x0[3 * T]
    be = x0[3 * T + 1]
    us = x0[3 * T + 2]

    avals = np.exp(ua)
    gvals = np.exp(ug)
    sig = math.exp(us)
    cumw = np.cumsum(w)
    ll = np.empty(T)
    _refresh_rows(ll, avals, gvals, lb, be, cumw, d, e, c, m, xmid)

    n_moves = move_kind.shape[0]
    log_scales = np.log(scales0)
    accepts = np.zeros(n_moves)
    proposals = np.zeros(n_moves)
    n_kept = n_iter - n_warmup
    draws = np.empty((n_kept, 3 * T + 3))
    new_rows = np.empty(T)
    last_adapt = -1

    for it in range(n_iter):
        if rebaseline_every > 0 and it > 0 and it % rebaseline_every == 0:
            cumw = np.cumsum(w)
            _refresh_rows(ll, avals, gvals, lb, be, cumw, d, e, c, m, xmid)
        adapting = it < adapt_until
        counting = it >= n_warmup
        step = (it + adapt_offset) ** (-adapt_exponent) if adapting else 0.0

        for mv in range(n_moves):
            if not move_active[mv] or it % move_period[mv]:
                continue
            kind = move_kind[mv]
            t = move_t[mv]
            dx = math.exp(log_scales[mv]) * normals[it, mv]
            delta = 0.0
            n_new = 0  # rows staged in new_rows, starting at row `row0`
            row0 = 0

            if kind == KIND_LOG_A:
                ua_p = ua[t] + dx
                a_p = math.exp(ua_p)
                logbt = lb + be * (t + 1.0) + cumw[t]
                r = _row_ll(a_p, gvals[t], logbt, d[t], e[t], c[t], m[t], xmid)
                delta = (
                    r
                    - ll[t]
                    + _halfnorm_lp(a_p, prior_a_scale)
                    + ua_p
                    - _halfnorm_lp(avals[t], prior_a_scale)
                    - ua[t]
                )
                row0 = t
                n_new = 1
                new_rows[t] = r
            elif kind == KIND_LOG_GAMMA:
                ug_p = ug[t] + dx
                g_p = math.exp(ug_p)
                logbt = lb + be * (t + 1.0) + cumw[t]
                r = _row_ll(avals[t], g_p, logbt, d[t], e[t], c[t], m[t], xmid)
                delta = (
                    r
                    - ll[t]
                    + _gamma_lp(g_p, prior_g_shape, prior_g_rate)
                    + ug_p
                    - _gamma_lp(gvals[t], prior_g_shape, prior_g_rate)
                    - ug[t]
                )
                row0 = t
                n_new = 1
                new_rows[t] = r
            elif kind == KIND_W:
                delta = _laplace_lp(w[t] + dx, sig) - _laplace_lp(w[t], sig)
                row0 = t
                n_new = T - t
                for s in range(t, T):
                    logbt = lb + be * (s + 1.0) + cumw[s] + dx
                    r = _row_ll(avals[s], gvals[s], logbt, d[s], e[s], c[s], m[s], xmid)
                    new_rows[s] = r
                    delta += r - ll[s]
                    if delta == -np.inf:
                        break
            elif kind == KIND_W_PAIR:
                delta = (
                    _laplace_lp(w[t] + dx, sig)
                    + _laplace_lp(w[t + 1] - dx, sig)
                    - _laplace_lp(w[t], sig)
                    - _laplace_lp(w[t + 1], sig)
                )
                logbt = lb + be * (t + 1.0) + cumw[t] + dx
                r = _row_ll(avals[t], gvals[t], logbt, d[t], e[t], c[t], m[t], xmid)
                delta += r - ll[t]
                row0 = t
                n_new = 1
                new_rows[t] = r
            elif kind == KIND_LOG_B:
                delta = _norm_lp(lb + dx, prior_lb_sd) - _norm_lp(lb, prior_lb_sd)
                row0 = 0
                n_new = T
                for s in range(T):
                    logbt = lb + dx + be * (s + 1.0) + cumw[s]
                    r = _row_ll(avals[s], gvals[s], logbt, d[s], e[s], c[s], m[s], xmid)
                    new_rows[s] = r
                    delta += r - ll[s]
                    if delta == -np.inf:
                        break
            elif kind == KIND_BETA:
                delta = _norm_lp(be + dx, prior_be_sd) - _norm_lp(be, prior_be_sd)
                row0 = 0
                n_new = T
                for s in range(T):
                    logbt = lb + (be + dx) * (s + 1.0) + cumw[s]
                    r = _row_ll(avals[s], gvals[s], logbt, d[s], e[s], c[s], m[s], xmid)
                    new_rows[s] = r
                    delta += r - ll[s]
                    if delta == -np.inf:
                        break
            elif kind == KIND_SHIFT_B_W1:
                delta = (
                    _norm_lp(lb + dx, prior_lb_sd)
                    - _norm_lp(lb, prior_lb_sd)
                    + _laplace_lp(w[0] - dx, sig)
                    - _laplace_lp(w[0], sig)
                )
            elif kind == KIND_SHIFT_BETA_W:
                delta = _norm_lp(be + dx, prior_be_sd) - _norm_lp(be, prior_be_sd)
                for s in range(T):
                    delta += _laplace_lp(w[s] - dx, sig) - _laplace_lp(w[s], sig)
            elif kind == KIND_LINE_B_BETA:
                dbe = ridge_coef * dx
                delta = (
                    _norm_lp(lb + dx, prior_lb_sd)
                    - _norm_lp(lb, prior_lb_sd)
                    + _norm_lp(be + dbe, prior_be_sd)
                    - _norm_lp(be, prior_be_sd)
                )
                row0 = 0
                n_new = T
                for s in range(T):
                    logbt = lb + dx + (be + dbe) * (s + 1.0) + cumw[s]
                    r = _row_ll(avals[s], gvals[s], logbt, d[s], e[s], c[s], m[s], xmid)
                    new_rows[s] = r
                    delta += r - ll[s]
                    if delta == -np.inf:
                        break
            elif kind == KIND_LOG_SIGMA:
                us_p = us + dx
                sig_p = math.exp(us_p)
                delta = (
                    _halfnorm_lp(sig_p, prior_s_scale)
                    + us_p
                    - _halfnorm_lp(sig, prior_s_scale)
                    - us
                )
                for s in range(T):
                    delta += _laplace_lp(w[s], sig_p) - _laplace_lp(w[s], sig)
            else:  # KIND_COHORT_TRIPLE
                da = move_coef[mv, 0] * dx
                dg = move_coef[mv, 1] * dx
                dw = move_coef[mv, 2] * dx
                ua_p = ua[t] + da
                ug_p = ug[t] + dg
                a_p = math.exp(ua_p)
                g_p = math.exp(ug_p)
                delta = (
                    _halfnorm_lp(a_p, prior_a_scale)
                    + ua_p
                    - _halfnorm_lp(avals[t], prior_a_scale)
                    - ua[t]
                    + _gamma_lp(g_p, prior_g_shape, prior_g_rate)
                    + ug_p
                    - _gamma_lp(gvals[t], prior_g_shape, prior_g_rate)
                    - ug[t]
                    + _laplace_lp(w[t] + dw, sig)
                    - _laplace_lp(w[t], sig)
                )
                if t < T - 1:
                    delta += _laplace_lp(w[t + 1] - dw, sig) - _laplace_lp(w[t + 1], sig)
                logbt = lb + be * (t + 1.0) + cumw[t] + dw
                r = _row_ll(a_p, g_p, logbt, d[t], e[t], c[t], m[t], xmid)
                delta += r - ll[t]
                row0 = t
                n_new = 1
                new_rows[t] = r

            if _accept(delta, uniforms[it, mv]):
                if kind == KIND_LOG_A:
                    ua[t] += dx
                    avals[t] = math.exp(ua[t])
                elif kind == KIND_LOG_GAMMA:
                    ug[t] += dx
                    gvals[t] = math.exp(ug[t])
                elif kind == KIND_W:
                    w[t] += dx
                    for s in range(t, T):
                        cumw[s] += dx
                elif kind == KIND_W_PAIR:
                    w[t] += dx
                    w[t + 1] -= dx
                    cumw[t] += dx
                elif kind == KIND_LOG_B:
                    lb += dx
                elif kind == KIND_BETA:
                    be += dx
                elif kind == KIND_SHIFT_B_W1:
                    lb += dx
                    w[0] -= dx
                    for s in range(T):
                        cumw[s] -= dx
                elif kind == KIND_SHIFT_BETA_W:
                    be += dx
                    for s in range(T):
                        w[s] -= dx
                        cumw[s] -= dx * (s + 1.0)
                elif kind == KIND_LINE_B_BETA:
                    lb += dx
                    be += ridge_coef * dx
                elif kind == KIND_LOG_SIGMA:
                    us += dx
                    sig = math.exp(us)
                else:  # KIND_COHORT_TRIPLE
                    ua[t] += move_coef[mv, 0] * dx
                    ug[t] += move_coef[mv, 1] * dx
                    avals[t] = math.exp(ua[t])
                    gvals[t] = math.exp(ug[t])
                    dw = move_coef[mv, 2] * dx
                    w[t] += dw
                    cumw[t] += dw
                    if t < T - 1:
                        w[t + 1] -= dw
                for s in range(row0, row0 + n_new):
                    ll[s] = new_rows[s]
                if counting:
                    accepts[mv] += 1
            if counting:
                proposals[mv] += 1
            if adapting:
                if delta >= 0:
                    alpha = 1.0
                elif delta == delta:
                    alpha = math.exp(delta)
                else:
                    alpha = 0.0
                log_scales[mv] += step * (alpha - target_accept)
                last_adapt = it

        if counting:
            k = it - n_warmup
            for t in range(T):
                draws[k, t] = avals[t]
                draws[k, T + t] = gvals[t]
                draws[k, 2 * T + t] = w[t]
            draws[k, 3 * T] = lb
            draws[k, 3 * T + 1] = be
            draws[k, 3 * T + 2] = sig

    rates = np.empty(n_moves)
    for mv in range(n_moves):
        rates[mv] = accepts[mv] / proposals[mv] if proposals[mv] > 0 else np.nan
    return draws, np.exp(log_scales), rates, last_adapt
