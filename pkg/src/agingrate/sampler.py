"""Chain orchestration: move schedule, initialization, storage, CSV export.

The sampler is an adaptive Metropolis-within-Gibbs on unconstrained
coordinates (log a_t, log gamma_t, w_t, log_b, beta, log sigma_rw).  Single
coordinate updates are augmented with a few correlated line moves that walk
along the posterior's known soft directions: (w_t, -w_{t+1}) pairs move one
accumulated period effect at a time, (log_b, -w_1) and (beta, -w_all) shifts
are likelihood-flat reparameterization moves, and a (log_b, beta) move runs
along their least-squares ridge.

Each chain owns a deterministic RNG stream derived from the run seed, and
all proposal randomness is pregenerated and indexed by (iteration, move), so
results are bit-for-bit reproducible regardless of thread scheduling.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, xlogy

from . import _kernels as K
from .dataset import CohortDataset
from .exceptions import FitInitializationError
from .hazards import cohort_hazard_grid
from .mwg import LineMove
from .posterior import PriorConfig, log_posterior_unconstrained

__all__ = [
    "SamplerConfig",
    "PosteriorDraws",
    "run_chains",
    "parameter_names",
    "build_move_schedule",
    "model_line_moves",
    "write_draws_csv",
    "read_draws_csv",
]

# Starting proposal scales by move kind; Robbins-Monro adapts from here.
INITIAL_SCALES = {
    K.KIND_LOG_A: 0.1,
    K.KIND_LOG_GAMMA: 0.25,
    K.KIND_W: 0.04,
    K.KIND_W_PAIR: 0.04,
    K.KIND_LOG_B: 0.02,
    K.KIND_BETA: 0.01,
    K.KIND_SHIFT_B_W1: 0.1,
    K.KIND_SHIFT_BETA_W: 0.02,
    K.KIND_LINE_B_BETA: 0.02,
    K.KIND_LOG_SIGMA: 0.25,
    K.KIND_COHORT_TRIPLE: 1.0,  # direction vectors already carry the length
}

_MOVE_BASENAMES = {
    K.KIND_LOG_A: "log_a",
    K.KIND_LOG_GAMMA: "log_gamma",
    K.KIND_W: "w",
    K.KIND_W_PAIR: "w_pair",
    K.KIND_LOG_B: "log_b",
    K.KIND_BETA: "beta",
    K.KIND_SHIFT_B_W1: "shift_log_b_w1",
    K.KIND_SHIFT_BETA_W: "shift_beta_w",
    K.KIND_LINE_B_BETA: "line_log_b_beta",
    K.KIND_LOG_SIGMA: "log_sigma_rw",
    K.KIND_COHORT_TRIPLE: "triple",
}

_PER_COHORT_KINDS = (
    K.KIND_LOG_A,
    K.KIND_LOG_GAMMA,
    K.KIND_W,
    K.KIND_W_PAIR,
    K.KIND_COHORT_TRIPLE,
)

# Per-coordinate chain-start jitter (unconstrained scale).
_JITTER = {"log_a": 0.1, "log_gamma": 0.1, "w": 0.01, "log_b": 0.05, "beta": 0.01, "log_sigma": 0.1}


@dataclass(frozen=True)
class SamplerConfig:
    """Sampler settings; defaults follow the estimation protocol.

    Warm-up begins with ``pilot_refreshes`` pilot stages of ``pilot_iters``
    iterations each; after every stage the per-cohort block directions are
    re-estimated at the mean of its last ``pilot_keep`` states (the second
    refresh catches cohorts that settle late).  All adaptation still ends at
    ``n_warmup``.  Set ``pilot_iters=0`` or ``pilot_refreshes=0`` to disable.
    """

    n_chains: int = 4
    n_iter: int = 6000
    n_warmup: int = 4000
    seed: int = 0
    target_accept: float = 0.44
    adapt_offset: float = 20.0
    adapt_exponent: float = 0.6
    rebaseline_every: int = 500
    init_retries: int = 50
    pilot_iters: int = 1200
    pilot_keep: int = 600
    pilot_refreshes: int = 2
    parallel: bool = True

    def __post_init__(self):
        if self.n_chains < 2:
            raise ValueError("n_chains must be >= 2 (required for R-hat)")
        if not 0 < self.n_warmup < self.n_iter:
            raise ValueError("need 0 < n_warmup < n_iter")
        if not 0 < self.target_accept < 1:
            raise ValueError("target_accept must be in (0, 1)")
        if self.pilot_iters < 0 or self.pilot_refreshes < 0:
            raise ValueError("pilot_iters and pilot_refreshes must be >= 0")
        if self.pilot_iters * self.pilot_refreshes >= self.n_warmup:
            raise ValueError("need pilot_iters * pilot_refreshes < n_warmup")
        if self.pilot_iters and self.pilot_refreshes:
            if not 2 <= self.pilot_keep <= self.pilot_iters:
                raise ValueError("need 2 <= pilot_keep <= pilot_iters")

    @property
    def n_kept(self) -> int:
        return self.n_iter - self.n_warmup


def parameter_names(n_cohorts: int) -> list[str]:
    """Column names in storage order: a[t], gamma[t], w[t], log_b, beta, sigma_rw."""
    T = n_cohorts
    return (
        [f"a[{t}]" for t in range(1, T + 1)]
        + [f"gamma[{t}]" for t in range(1, T + 1)]
        + [f"w[{t}]" for t in range(1, T + 1)]
        + ["log_b", "beta", "sigma_rw"]
    )


def ridge_coefficient(n_cohorts: int) -> float:
    """Least-squares slope offset for the (log_b, beta) ridge move.

    Minimizing sum_t (db + dbeta*t)^2 over dbeta for a given db gives
    dbeta = -db * 3/(2T+1) up to O(1/T), the direction along which the two
    parameters trade off against the per-cohort slopes.
    """
    return -3.0 / (2.0 * n_cohorts + 1.0)


@dataclass(frozen=True, eq=False)
class MoveSchedule:
    """One sweep's deterministic move order, shared by both engines."""

    kinds: np.ndarray    # (M,) move-kind codes
    ts: np.ndarray       # (M,) cohort index, 0 for global moves
    coefs: np.ndarray    # (M, 3) direction coefficients for cohort triples
    periods: np.ndarray  # (M,) run the move every k-th sweep

    @property
    def n_moves(self) -> int:
        return self.kinds.size

    def labels(self) -> list[str]:
        out = []
        for k, t in zip(self.kinds, self.ts):
            base = _MOVE_BASENAMES[int(k)]
            out.append(f"{base}[{int(t) + 1}]" if int(k) in _PER_COHORT_KINDS else base)
        return out


def _row_loglik_batch(deaths, exposures, mask, xmid, a, gamma, b) -> np.ndarray:
    """Row log likelihood for a batch of (a, gamma, b) parameter points."""
    lam = cohort_hazard_grid(a, b, gamma, xmid)
    mu = lam * exposures[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        cell = xlogy(deaths[None, :], mu) - mu
    return cell[:, mask].sum(axis=1)


def cohort_triple_directions(
    data: CohortDataset,
    priors: PriorConfig,
    state: np.ndarray | None = None,
    max_length: float = 2.0,
) -> np.ndarray:
    """Conjugate proposal directions for each cohort's (log a, log gamma, X).

    The per-cohort likelihood ties baseline, frailty variance and slope into
    a narrow ridge that single-coordinate moves traverse slowly.  This probes
    the curvature of the conditional log density by finite differences at
    ``state`` (unconstrained; the deterministic base state when omitted) and
    returns, per cohort, a 3x3 matrix whose columns are eigenvector
    directions scaled by one conditional standard deviation (clipped to
    ``max_length``).
    """
    T = data.n_cohorts
    base = _base_state(data) if state is None else np.asarray(state, dtype=float)
    xmid = data.grid.midpoints
    x_t = np.cumsum(base[3 * T + 1] + base[2 * T : 3 * T])
    logbt = base[3 * T] + x_t
    out = np.empty((T, 3, 3))
    h = 1e-3
    steps = np.array(
        [(i, j, k) for i in (-1, 0, 1) for j in (-1, 0, 1) for k in (-1, 0, 1)],
        dtype=float,
    )
    where = {tuple(int(v) for v in s): i for i, s in enumerate(steps)}
    eye = np.eye(3, dtype=int)
    for t in range(T):
        ua = base[t] + h * steps[:, 0]
        ug = base[T + t] + h * steps[:, 1]
        ll = _row_loglik_batch(
            data.deaths[t], data.exposures[t], data.mask[t], xmid,
            np.exp(ua), np.exp(ug), np.exp(logbt[t] + h * steps[:, 2]),
        )
        vals = (
            ll
            - 0.5 * (np.exp(ua) / priors.a_scale) ** 2
            + ua
            + (priors.gamma_shape - 1.0) * ug
            - priors.gamma_rate * np.exp(ug)
            + ug
        )

        hess = np.empty((3, 3))
        with np.errstate(invalid="ignore"):  # -inf rows yield NaN, handled below
            for i in range(3):
                ei = eye[i]
                hess[i, i] = (
                    vals[where[tuple(ei)]]
                    - 2.0 * vals[where[(0, 0, 0)]]
                    + vals[where[tuple(-ei)]]
                ) / h**2
                for j in range(i + 1, 3):
                    ej = eye[j]
                    hess[i, j] = hess[j, i] = (
                        vals[where[tuple(ei + ej)]]
                        - vals[where[tuple(ei - ej)]]
                        - vals[where[tuple(-ei + ej)]]
                        + vals[where[tuple(-ei - ej)]]
                    ) / (4.0 * h**2)
        curv = -0.5 * (hess + hess.T)
        if not np.all(np.isfinite(curv)):
            out[t] = 0.1 * np.eye(3)  # degenerate row (e.g. -inf likelihood)
            continue
        eigvals, eigvecs = np.linalg.eigh(curv)
        if eigvals.max() <= 0:
            out[t] = 0.1 * np.eye(3)
            continue
        variances = 1.0 / np.clip(eigvals, eigvals.max() * 1e-8, None)
        out[t] = _directions_from_eig(variances, eigvecs, max_length)
    return out


def _directions_from_eig(variances, eigvecs, max_length: float) -> np.ndarray:
    """Columns = eigenvectors scaled by one standard deviation, length-capped."""
    lengths = np.minimum(np.sqrt(variances), max_length)
    return eigvecs * lengths[None, :]


def mean_unconstrained_state(flat_draws: np.ndarray, n_cohorts: int) -> np.ndarray:
    """Average of constrained draw rows mapped to unconstrained coordinates."""
    T = n_cohorts
    x = np.empty(3 * T + 3)
    x[:T] = np.log(flat_draws[:, :T]).mean(axis=0)
    x[T : 2 * T] = np.log(flat_draws[:, T : 2 * T]).mean(axis=0)
    x[2 * T : 3 * T] = flat_draws[:, 2 * T : 3 * T].mean(axis=0)
    x[3 * T] = flat_draws[:, 3 * T].mean()
    x[3 * T + 1] = flat_draws[:, 3 * T + 1].mean()
    x[3 * T + 2] = np.log(flat_draws[:, 3 * T + 2]).mean()
    return x


def build_move_schedule(
    data: CohortDataset, priors: PriorConfig, w_period: int = 4
) -> MoveSchedule:
    """Deterministic per-sweep move order for a dataset.

    Plain w_t updates shift the whole walk tail and so cost O(T) likelihood
    rows each; since the pair and shift moves already span those directions,
    they run only every ``w_period`` sweeps.
    """
    T = data.n_cohorts
    kinds: list[int] = []
    ts: list[int] = []
    periods: list[int] = []
    for kind in (K.KIND_LOG_A, K.KIND_LOG_GAMMA, K.KIND_W):
        kinds.extend([kind] * T)
        ts.extend(range(T))
        periods.extend([w_period if kind == K.KIND_W else 1] * T)
    kinds.extend([K.KIND_W_PAIR] * (T - 1))
    ts.extend(range(T - 1))
    periods.extend([1] * (T - 1))
    dirs = cohort_triple_directions(data, priors)
    n_base = len(kinds)
    for t in range(T):
        kinds.extend([K.KIND_COHORT_TRIPLE] * 3)
        ts.extend([t] * 3)
        periods.extend([1] * 3)
    for kind in (
        K.KIND_LOG_B,
        K.KIND_BETA,
        K.KIND_SHIFT_B_W1,
        K.KIND_SHIFT_BETA_W,
        K.KIND_LINE_B_BETA,
        K.KIND_LOG_SIGMA,
    ):
        kinds.append(kind)
        ts.append(0)
        periods.append(1)
    coefs = np.zeros((len(kinds), 3))
    for t in range(T):
        for j in range(3):
            coefs[n_base + 3 * t + j] = dirs[t, :, j]
    return MoveSchedule(
        kinds=np.asarray(kinds, dtype=np.int64),
        ts=np.asarray(ts, dtype=np.int64),
        coefs=coefs,
        periods=np.asarray(periods, dtype=np.int64),
    )


def _move_indices(kind: int, t: int, T: int, coef) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate indices and direction of one move, for the reference engine."""
    iw, ib, ibe, isg = 2 * T, 3 * T, 3 * T + 1, 3 * T + 2
    if kind == K.KIND_LOG_A:
        return np.array([t]), np.array([1.0])
    if kind == K.KIND_LOG_GAMMA:
        return np.array([T + t]), np.array([1.0])
    if kind == K.KIND_W:
        return np.array([iw + t]), np.array([1.0])
    if kind == K.KIND_W_PAIR:
        return np.array([iw + t, iw + t + 1]), np.array([1.0, -1.0])
    if kind == K.KIND_LOG_B:
        return np.array([ib]), np.array([1.0])
    if kind == K.KIND_BETA:
        return np.array([ibe]), np.array([1.0])
    if kind == K.KIND_SHIFT_B_W1:
        return np.array([ib, iw]), np.array([1.0, -1.0])
    if kind == K.KIND_SHIFT_BETA_W:
        idx = np.concatenate([[ibe], np.arange(iw, iw + T)])
        direction = np.concatenate([[1.0], -np.ones(T)])
        return idx, direction
    if kind == K.KIND_LINE_B_BETA:
        return np.array([ib, ibe]), np.array([1.0, ridge_coefficient(T)])
    if kind == K.KIND_LOG_SIGMA:
        return np.array([isg]), np.array([1.0])
    if kind == K.KIND_COHORT_TRIPLE:
        ca, cg, cx = coef
        if t < T - 1:
            return (
                np.array([t, T + t, iw + t, iw + t + 1]),
                np.array([ca, cg, cx, -cx]),
            )
        return np.array([t, T + t, iw + t]), np.array([ca, cg, cx])
    raise ValueError(f"unknown move kind {kind}")


def model_line_moves(
    n_cohorts: int,
    schedule: MoveSchedule,
    fixed_indices: frozenset[int] = frozenset(),
) -> list[LineMove]:
    """The schedule expressed as generic line moves (reference engine input)."""
    moves = []
    for kind, t, coef, period in zip(
        schedule.kinds, schedule.ts, schedule.coefs, schedule.periods
    ):
        idx, direction = _move_indices(int(kind), int(t), n_cohorts, coef)
        active = not any(int(i) in fixed_indices for i in idx)
        moves.append(
            LineMove(indices=idx, direction=direction, active=active, period=int(period))
        )
    return moves


def initial_scales_for(kinds: np.ndarray) -> np.ndarray:
    return np.array([INITIAL_SCALES[int(k)] for k in kinds])


@dataclass(eq=False)
class PosteriorDraws:
    """Retained post-warm-up draws, constrained scale, ordered by chain."""

    names: list[str]
    draws: np.ndarray                      # (n_chains, n_kept, n_params)
    accept_rates: np.ndarray | None = None  # (n_chains, n_moves)
    move_labels: list[str] = field(default_factory=list)
    chain_keys: list[int] = field(default_factory=list)
    config: SamplerConfig | None = None
    cohorts: np.ndarray | None = None

    def __post_init__(self):
        self._index = {name: i for i, name in enumerate(self.names)}
        if self.draws.ndim != 3 or self.draws.shape[2] != len(self.names):
            raise ValueError("draws must be (n_chains, n_kept, n_params)")

    @classmethod
    def from_csv(cls, path) -> "PosteriorDraws":
        names, draws = read_draws_csv(path)
        return cls(names=names, draws=draws)

    @property
    def n_chains(self) -> int:
        return self.draws.shape[0]

    @property
    def n_kept(self) -> int:
        return self.draws.shape[1]

    @property
    def n_cohorts(self) -> int:
        return (len(self.names) - 3) // 3

    def by_name(self, name: str) -> np.ndarray:
        """Per-chain series of one parameter, shape (n_chains, n_kept)."""
        return self.draws[:, :, self._index[name]]

    def flat(self, name: str) -> np.ndarray:
        return self.by_name(name).reshape(-1)

    def acceptance(self) -> dict[str, float]:
        """Mean post-warm-up acceptance rate by move kind."""
        if self.accept_rates is None:
            return {}
        out: dict[str, list[float]] = {}
        for j, label in enumerate(self.move_labels):
            base = label.split("[")[0]
            out.setdefault(base, []).extend(self.accept_rates[:, j])
        return {k: float(np.nanmean(v)) for k, v in out.items()}

    def slope_draws(self) -> np.ndarray:
        """Per-cohort slope draws b_t = exp(log_b + X_t), shape (total, T)."""
        T = self.n_cohorts
        flat = self.draws.reshape(-1, self.draws.shape[2])
        w = flat[:, 2 * T : 3 * T]
        log_b = flat[:, 3 * T]
        beta = flat[:, 3 * T + 1]
        x_t = np.cumsum(beta[:, None] + w, axis=1)
        return np.exp(log_b[:, None] + x_t)

    def unconstrained(self) -> np.ndarray:
        """Draws on the sampler's coordinate scale (a, gamma, sigma_rw logged)."""
        T = self.n_cohorts
        out = self.draws.copy()
        out[:, :, : 2 * T] = np.log(out[:, :, : 2 * T])
        out[:, :, 3 * T + 2] = np.log(out[:, :, 3 * T + 2])
        return out


def _kernel_data(data: CohortDataset, priors: PriorConfig):
    d = np.ascontiguousarray(data.deaths, dtype=np.float64)
    e = np.ascontiguousarray(data.exposures, dtype=np.float64)
    m = np.ascontiguousarray(data.mask)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(m, xlogy(d, e) - gammaln(d + 1.0), 0.0)
    xmid = np.ascontiguousarray(data.grid.midpoints, dtype=np.float64)
    consts = (
        priors.a_scale,
        priors.gamma_shape,
        priors.gamma_rate,
        priors.log_b_sd,
        priors.beta_sd,
        priors.sigma_scale,
    )
    return d, e, np.ascontiguousarray(c), m, xmid, consts


def fixed_coordinate_map(fixed: dict | None, n_cohorts: int) -> dict[int, float]:
    """Map parameter names fixed on the constrained scale to unconstrained coords."""
    if not fixed:
        return {}
    names = parameter_names(n_cohorts)
    positions = {name: i for i, name in enumerate(names)}
    T = n_cohorts
    out = {}
    for name, value in fixed.items():
        if name not in positions:
            raise KeyError(f"unknown parameter {name!r}")
        i = positions[name]
        if i < 2 * T or i == 3 * T + 2:  # a, gamma, sigma_rw live on the log scale
            if value <= 0:
                raise ValueError(f"{name} must be fixed at a positive value")
            out[i] = math.log(value)
        else:
            out[i] = float(value)
    return out


def _base_state(data: CohortDataset) -> np.ndarray:
    """Deterministic chain start before jitter: crude rates and flat walk."""
    T = data.n_cohorts
    a0 = np.full(T, 0.05)
    for t in range(T):
        cols = np.nonzero(data.mask[t] & (data.exposures[t] > 0))[0]
        if cols.size:
            j = cols[0]
            a0[t] = data.deaths[t, j] / data.exposures[t, j]
    a0 = np.clip(a0, 1e-5, 2.0)
    x = np.empty(3 * T + 3)
    x[:T] = np.log(a0)
    x[T : 2 * T] = math.log(0.5)
    x[2 * T : 3 * T] = 0.0
    x[3 * T] = math.log(0.1)
    x[3 * T + 1] = 0.0
    x[3 * T + 2] = math.log(0.05)
    return x


def _jitter_scales(n_cohorts: int) -> np.ndarray:
    T = n_cohorts
    s = np.empty(3 * T + 3)
    s[:T] = _JITTER["log_a"]
    s[T : 2 * T] = _JITTER["log_gamma"]
    s[2 * T : 3 * T] = _JITTER["w"]
    s[3 * T] = _JITTER["log_b"]
    s[3 * T + 1] = _JITTER["beta"]
    s[3 * T + 2] = _JITTER["log_sigma"]
    return s


def _unconstrain_row(row: np.ndarray, n_cohorts: int) -> np.ndarray:
    """Map one constrained draw row back to unconstrained coordinates."""
    T = n_cohorts
    x = np.array(row, dtype=float)
    x[:T] = np.log(x[:T])
    x[T : 2 * T] = np.log(x[T : 2 * T])
    x[3 * T + 2] = math.log(x[3 * T + 2])
    return x


def initial_state(
    data: CohortDataset,
    rng: np.random.Generator,
    priors: PriorConfig,
    fixed_idx: dict[int, float],
    retries: int,
    chain: int,
) -> np.ndarray:
    base = _base_state(data)
    jitter = _jitter_scales(data.n_cohorts)
    last_lp = -math.inf
    for _ in range(retries):
        x = base + jitter * rng.standard_normal(base.size)
        for i, v in fixed_idx.items():
            x[i] = v
        lp = log_posterior_unconstrained(x, data, priors)
        if math.isfinite(lp):
            return x
        last_lp = lp
    raise FitInitializationError(
        f"chain {chain}: no finite log-posterior start after {retries} attempts "
        f"(last value {last_lp}); check the dataset for empty or degenerate cells"
    )


def run_chains(
    data: CohortDataset,
    config: SamplerConfig = SamplerConfig(),
    priors: PriorConfig = PriorConfig(),
    fixed: dict | None = None,
) -> PosteriorDraws:
    """Run independent adaptive chains and collect post-warm-up draws.

    Chains derive their RNG streams from ``config.seed`` via spawned seed
    sequences, so rerunning with the same seed, data and config reproduces
    the draws exactly.  ``fixed`` optionally pins named parameters (on the
    constrained scale) to constant values; moves touching them are skipped.
    """
    if data.n_cohorts < 1:
        raise ValueError("dataset has no cohorts")
    T = data.n_cohorts
    schedule = build_move_schedule(data, priors)
    fixed_idx = fixed_coordinate_map(fixed, T)
    active = np.array(
        [
            not any(
                int(i) in fixed_idx
                for i in _move_indices(int(k), int(t), T, coef)[0]
            )
            for k, t, coef in zip(schedule.kinds, schedule.ts, schedule.coefs)
        ]
    )
    scales0 = initial_scales_for(schedule.kinds)
    d, e, c, m, xmid, consts = _kernel_data(data, priors)
    rcoef = ridge_coefficient(T)
    n_moves = schedule.n_moves

    children = np.random.SeedSequence(config.seed).spawn(config.n_chains)
    triple_slots = np.nonzero(schedule.kinds == K.KIND_COHORT_TRIPLE)[0]
    pilot = config.pilot_iters
    n_refreshes = config.pilot_refreshes if pilot else 0
    pilot_total = pilot * n_refreshes

    def kernel_call(x0, coefs, scales, normals, uniforms, n_iter, n_warmup, adapt_until):
        return K.run_chain(
            d, e, c, m, xmid,
            x0, schedule.kinds, schedule.ts, coefs, active, schedule.periods,
            scales, normals, uniforms,
            n_iter, n_warmup, adapt_until,
            config.target_accept, config.adapt_offset, config.adapt_exponent,
            config.rebaseline_every, *consts, rcoef,
        )

    def run_one(chain: int):
        rng = np.random.default_rng(children[chain])
        x0 = initial_state(data, rng, priors, fixed_idx, config.init_retries, chain)
        coefs, scales = schedule.coefs, scales0
        for _ in range(n_refreshes):
            normals = rng.standard_normal((pilot, n_moves))
            uniforms = rng.random((pilot, n_moves))
            pilot_draws, scales, _, _ = kernel_call(
                x0, coefs, scales, normals, uniforms,
                pilot, pilot - config.pilot_keep, pilot,
            )
            # Curvature at the pilot mean gives accurate block directions even
            # when the pilot itself mixed slowly.
            dirs = cohort_triple_directions(
                data, priors, state=mean_unconstrained_state(pilot_draws, T)
            )
            coefs = coefs.copy()
            for t in range(T):
                coefs[triple_slots[3 * t : 3 * t + 3]] = dirs[t].T
            scales = scales.copy()
            scales[triple_slots] = 1.0
            x0 = _unconstrain_row(pilot_draws[-1], T)
        main_iters = config.n_iter - pilot_total
        normals = rng.standard_normal((main_iters, n_moves))
        uniforms = rng.random((main_iters, n_moves))
        return kernel_call(
            x0, coefs, scales, normals, uniforms,
            main_iters, config.n_warmup - pilot_total, config.n_warmup - pilot_total,
        )

    if config.parallel and config.n_chains > 1:
        with ThreadPoolExecutor(max_workers=config.n_chains) as pool:
            results = list(pool.map(run_one, range(config.n_chains)))
    else:
        results = [run_one(chain) for chain in range(config.n_chains)]

    draws = np.stack([r[0] for r in results])
    rates = np.stack([r[2] for r in results])
    for r in results:
        assert r[3] < config.n_warmup - pilot_total, "adaptation ran past warm-up"

    return PosteriorDraws(
        names=parameter_names(T),
        draws=draws,
        accept_rates=rates,
        move_labels=schedule.labels(),
        chain_keys=[int(ch.spawn_key[-1]) for ch in children],
        config=config,
        cohorts=np.asarray(data.cohorts),
    )


def write_draws_csv(draws: PosteriorDraws, path) -> None:
    """One row per draw: chain, draw index, then every parameter column."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["chain", "draw"] + draws.names)
        for chain in range(draws.n_chains):
            for k in range(draws.n_kept):
                row = [chain, k] + [repr(float(v)) for v in draws.draws[chain, k]]
                writer.writerow(row)


def read_draws_csv(path) -> tuple[list[str], np.ndarray]:
    """Read a draws CSV back as (names, array of shape (n_chains, n_kept, P))."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["chain", "draw"]:
            raise ValueError("draws CSV must start with chain,draw columns")
        names = header[2:]
        by_chain: dict[int, list[list[float]]] = {}
        for row in reader:
            if not row:
                continue
            by_chain.setdefault(int(row[0]), []).append([float(v) for v in row[2:]])
    chains = sorted(by_chain)
    lengths = {len(by_chain[ch]) for ch in chains}
    if len(lengths) != 1:
        raise ValueError("chains have unequal draw counts")
    return names, np.array([by_chain[ch] for ch in chains])
