"""Convergence and comparison statistics: split-chain R-hat, KS distances,
batch-means Monte Carlo standard errors and histogram payloads."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np


def split_rhat(chains: Sequence[np.ndarray]) -> float:
    """Split-chain potential scale reduction factor.

    Each chain is halved (the trailing element of an odd-length chain is
    dropped), giving 2m pieces of common length; the usual between/within
    variance ratio is computed on the pieces.  Values near 1 indicate the
    chains are sampling one stationary density.

    Degenerate input (any piece with zero variance, or zero within-piece
    variance overall) returns NaN rather than pretending convergence.
    """
    if len(chains) < 2:
        raise ValueError("need at least two chains")
    half = min(len(c) for c in chains) // 2
    if half < 2:
        raise ValueError("chains too short to split")
    pieces = []
    for c in chains:
        c = np.asarray(c, dtype=float)
        pieces.append(c[:half])
        pieces.append(c[half:2 * half])
    a = np.stack(pieces)                    # (2m, half)
    piece_vars = np.var(a, axis=1, ddof=1)
    w = float(np.mean(piece_vars))
    if w == 0.0 or np.any(piece_vars == 0.0):
        return math.nan
    b = half * float(np.var(np.mean(a, axis=1), ddof=1))
    var_plus = (half - 1) / half * w + b / half
    return math.sqrt(var_plus / w)


def ks_one_sample(sample: np.ndarray, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Sup-norm distance between the empirical CDF and `cdf`.

    The reference CDF is evaluated at the sample points and just below them,
    so step CDFs (another empirical CDF, say) are handled exactly as long as
    the sample has no tied values; for continuous CDFs this reduces to the
    classic one-sample statistic.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    f_hi = np.asarray(cdf(x), dtype=float)
    f_lo = np.asarray(cdf(np.nextafter(x, -np.inf)), dtype=float)
    grid = np.arange(1, n + 1) / n
    return float(max(np.max(np.abs(grid - f_hi)), np.max(np.abs(grid - 1.0 / n - f_lo))))


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> float:
    """Sup-norm distance between two empirical CDFs."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_between_cdfs(
    cdf_a: Callable, cdf_b: Callable, lo: float, hi: float, n_grid: int = 8192
) -> float:
    """Sup |F_a - F_b| on [lo, hi] for two exact CDFs: dense grid scan with a
    local golden-section refinement around the best grid point."""
    xs = np.linspace(lo, hi, n_grid)
    diff = np.abs(np.asarray(cdf_a(xs)) - np.asarray(cdf_b(xs)))
    i = int(np.argmax(diff))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, n_grid - 1)]
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(
        lambda x: -abs(float(cdf_a(x)) - float(cdf_b(x))),
        bounds=(a, b), method="bounded",
        options={"xatol": 1e-12},
    )
    return max(float(diff[i]), -float(res.fun))


def mcse(values: np.ndarray, n_batches: int | None = None) -> float:
    """Batch-means Monte Carlo standard error of the sample mean.

    Defaults to floor(sqrt(N)) batches; autocorrelation inflates the batch
    variance, so the estimate stays honest for Markov chain output.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    if n < 4:
        raise ValueError("need at least 4 values")
    if n_batches is None:
        n_batches = int(math.sqrt(n))
    n_batches = max(2, min(n_batches, n // 2))
    size = n // n_batches
    means = x[: n_batches * size].reshape(n_batches, size).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(n_batches))


def hist_bins(
    sample: np.ndarray, bin_count: int, range_: tuple[float, float] | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Density-normalized histogram: (edges, heights) with
    sum(heights * widths) == 1."""
    sample = np.asarray(sample, dtype=float)
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    if sample.size == 0:
        raise ValueError("empty sample")
    if range_ is not None and not range_[0] < range_[1]:
        raise ValueError("empty histogram range")
    heights, edges = np.histogram(sample, bins=bin_count, range=range_, density=True)
    return edges, heights


__all__ = [
    "split_rhat", "ks_one_sample", "ks_two_sample", "ks_between_cdfs",
    "mcse", "hist_bins",
]
