"""Chain convergence diagnostics: rank-normalized split R-hat and ESS."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata

__all__ = ["RhatResult", "EssResult", "split_rhat", "effective_sample_size"]


class RhatResult(NamedTuple):
    value: float
    degenerate: bool


class EssResult(NamedTuple):
    value: float
    degenerate: bool


def _split_chains(draws: np.ndarray) -> np.ndarray:
    """Halve every chain, doubling the chain count; drops one draw if odd."""
    M, N = draws.shape
    half = N // 2
    return np.concatenate([draws[:, :half], draws[:, half : 2 * half]], axis=0)


def _classic_rhat(draws: np.ndarray) -> float:
    M, N = draws.shape
    chain_means = draws.mean(axis=1)
    chain_vars = draws.var(axis=1, ddof=1)
    W = chain_vars.mean()
    B = N * chain_means.var(ddof=1)
    var_plus = (N - 1) / N * W + B / N
    return math.sqrt(var_plus / W)


def split_rhat(draws) -> RhatResult:
    """Rank-normalized split R-hat.

    Draws from all split half-chains are pooled and rank-transformed (average
    ranks for ties), ranks are mapped to normal scores via the inverse normal
    CDF with the (r - 3/8)/(S + 1/4) offset, and the classic between/within
    variance ratio is computed on the transformed splits.

    Zero-variance input returns NaN with the degenerate flag set instead of
    raising.
    """
    draws = np.asarray(draws, dtype=float)
    if draws.ndim != 2:
        raise ValueError("draws must be 2-d: (chains, iterations)")
    M, N = draws.shape
    if M < 2 or N < 4:
        raise ValueError("need at least 2 chains of at least 4 draws")
    if np.ptp(draws) == 0.0:
        return RhatResult(float("nan"), True)
    splits = _split_chains(draws)
    S = splits.size
    ranks = rankdata(splits.reshape(-1)).reshape(splits.shape)
    z = ndtri((ranks - 0.375) / (S + 0.25))
    if np.any(z.std(axis=1) == 0.0):
        return RhatResult(float("nan"), True)
    return RhatResult(_classic_rhat(z), False)


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance (divide by N) of one chain via FFT."""
    n = x.size
    xc = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n].real
    return acov / n


def effective_sample_size(draws) -> EssResult:
    """Multi-chain ESS with Geyer truncation at the first negative paired sum.

    Accepts a (chains, iterations) array or a single 1-d series.  The
    estimate is capped at the total draw count; constant input is flagged
    degenerate.
    """
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[None, :]
    if draws.ndim != 2:
        raise ValueError("draws must be at most 2-d")
    M, N = draws.shape
    if N < 4:
        raise ValueError("need at least 4 draws")
    if np.ptp(draws) == 0.0:
        return EssResult(float("nan"), True)

    acov = np.stack([_autocovariance(draws[m]) for m in range(M)])
    chain_means = draws.mean(axis=1)
    mean_var = acov[:, 0].mean() * N / (N - 1)
    var_plus = mean_var * (N - 1) / N
    if M > 1:
        var_plus += chain_means.var(ddof=1)
    if var_plus == 0.0:
        return EssResult(float("nan"), True)

    rho = 1.0 - (mean_var - acov.mean(axis=0)) / var_plus
    rho[0] = 1.0
    # Geyer initial positive sequence: sum consecutive pairs until one is negative.
    tau = 0.0
    max_pairs = (N - 1) // 2
    for k in range(max_pairs):
        paired = rho[2 * k] + rho[2 * k + 1]
        if paired < 0.0:
            break
        tau += paired
    tau = max(2.0 * tau - 1.0, 1.0 / math.log10(N + 10.0))  # guard tiny/negative tau
    ess = M * N / tau
    return EssResult(min(ess, float(M * N)), False)
