"""Generic adaptive Metropolis-within-Gibbs over line moves.

A *line move* perturbs a fixed set of coordinates along a fixed direction,
``x[idx] += scale * z * direction`` with ``z`` standard normal, so single
coordinate updates and correlated block updates share one mechanism.  Each
move owns a proposal scale adapted by Robbins-Monro toward a target
acceptance rate during warm-up and frozen afterwards.

This implementation recomputes the full log density for every proposal.  It
is the slow, obviously-correct reference against which the specialized fast
chain kernel is cross-checked; it is also used directly on small targets
(conjugate toys, quadrature comparisons).

Proposal and acceptance randomness is taken from pregenerated arrays indexed
by (iteration, move slot), which makes runs reproducible bit-for-bit and
independent of thread scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["LineMove", "MwgResult", "run_adaptive_mwg", "accept_rule", "adapt_step"]


@dataclass(frozen=True, eq=False)
class LineMove:
    """One proposal direction: ``x[indices] += scale * z * direction``.

    A move with ``period`` k runs only on iterations divisible by k.
    """

    indices: np.ndarray
    direction: np.ndarray
    active: bool = True
    period: int = 1

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "direction", np.asarray(self.direction, dtype=float))
        if self.indices.shape != self.direction.shape:
            raise ValueError("indices and direction must have equal length")
        if self.period < 1:
            raise ValueError("period must be >= 1")


@dataclass(eq=False)
class MwgResult:
    draws: np.ndarray           # (n_iter - n_warmup, dim)
    scales: np.ndarray          # final per-move proposal scales
    accept_rates: np.ndarray    # post-warmup acceptance rate per move
    last_adapt_iteration: int   # last iteration at which any scale changed


def accept_rule(delta: float, u: float) -> bool:
    """Metropolis acceptance; tolerant of -inf/NaN deltas and u == 0."""
    return delta > -math.inf and (u <= 0.0 or math.log(u) < delta)


def adapt_step(iteration: int, offset: float, exponent: float) -> float:
    """Robbins-Monro step size for the log-scale update at ``iteration``."""
    return (iteration + offset) ** (-exponent)


def run_adaptive_mwg(
    logpost,
    x0: np.ndarray,
    moves: list[LineMove],
    n_iter: int,
    n_warmup: int,
    normals: np.ndarray,
    uniforms: np.ndarray,
    initial_scales: np.ndarray,
    target_accept: float = 0.44,
    adapt_offset: float = 20.0,
    adapt_exponent: float = 0.6,
    adapt_until: int | None = None,
) -> MwgResult:
    """Run one chain and return post-warmup draws.

    ``normals`` and ``uniforms`` must have shape (n_iter, len(moves)); slot
    (it, m) is consumed only by move m at iteration it.  Scales adapt while
    the iteration is below ``adapt_until`` (default ``n_warmup``).
    """
    x = np.array(x0, dtype=float)
    n_moves = len(moves)
    if normals.shape != (n_iter, n_moves) or uniforms.shape != (n_iter, n_moves):
        raise ValueError("normals/uniforms must have shape (n_iter, n_moves)")
    if not 0 <= n_warmup < n_iter:
        raise ValueError("need 0 <= n_warmup < n_iter")
    if adapt_until is None:
        adapt_until = n_warmup

    log_scales = np.log(np.asarray(initial_scales, dtype=float))
    if log_scales.shape != (n_moves,):
        raise ValueError("one initial scale per move required")

    lp = float(logpost(x))
    if not math.isfinite(lp):
        raise ValueError("log density must be finite at the starting point")

    n_kept = n_iter - n_warmup
    draws = np.empty((n_kept, x.size))
    accepts = np.zeros(n_moves)
    proposals = np.zeros(n_moves)
    last_adapt = -1

    for it in range(n_iter):
        adapting = it < adapt_until
        counting = it >= n_warmup
        if adapting:
            step = adapt_step(it, adapt_offset, adapt_exponent)
        for m, move in enumerate(moves):
            if not move.active or it % move.period:
                continue
            delta_x = math.exp(log_scales[m]) * normals[it, m] * move.direction
            x_prop = x.copy()
            x_prop[move.indices] += delta_x
            lp_prop = float(logpost(x_prop))
            delta = lp_prop - lp
            if accept_rule(delta, uniforms[it, m]):
                x = x_prop
                lp = lp_prop
                if counting:
                    accepts[m] += 1
            if counting:
                proposals[m] += 1
            if adapting:
                alpha = 1.0 if delta >= 0 else (math.exp(delta) if delta == delta else 0.0)
                log_scales[m] += step * (alpha - target_accept)
                last_adapt = it
        if counting:
            draws[it - n_warmup] = x

    with np.errstate(invalid="ignore"):
        rates = np.where(proposals > 0, accepts / np.maximum(proposals, 1), np.nan)
    return MwgResult(
        draws=draws,
        scales=np.exp(log_scales),
        accept_rates=rates,
        last_adapt_iteration=last_adapt,
    )
