"""Convergence and comparison statistics."""

import math

import numpy as np
import pytest
from scipy import stats

from fidinfer.diagnostics import (
    hist_bins,
    ks_between_cdfs,
    ks_one_sample,
    ks_two_sample,
    mcse,
    split_rhat,
)


class TestSplitRhat:
    def test_degenerate_chains_flagged(self):
        chains = [np.ones(100), np.ones(100)]
        assert math.isnan(split_rhat(chains))

    def test_iid_chains_converged(self):
        rng = np.random.default_rng(0)
        chains = [rng.normal(size=10_000) for _ in range(4)]
        r = split_rhat(chains)
        assert 0.99 < r < 1.01

    def test_offset_chains_flagged(self):
        rng = np.random.default_rng(1)
        chains = [rng.normal(size=5_000), rng.normal(size=5_000) + 5.0]
        assert split_rhat(chains) > 1.5

    def test_affine_invariance(self):
        rng = np.random.default_rng(2)
        chains = [rng.normal(size=2_000) for _ in range(3)]
        r1 = split_rhat(chains)
        r2 = split_rhat([3.0 * c - 7.0 for c in chains])
        assert abs(r1 - r2) < 1e-12

    def test_needs_two_chains(self):
        with pytest.raises(ValueError):
            split_rhat([np.zeros(100)])


class TestKs:
    def test_own_ecdf_is_zero(self):
        x = np.array([0.2, 0.5, 0.7, 0.9])

        def ecdf(t):
            return np.searchsorted(np.sort(x), t, side="right") / x.size

        assert ks_one_sample(x, ecdf) == 0.0

    def test_two_sample_identity(self):
        x = np.random.default_rng(3).normal(size=500)
        assert ks_two_sample(x, x) == 0.0

    def test_uniform_critical_band(self):
        rng = np.random.default_rng(4)
        u = rng.random(100_000)
        assert ks_one_sample(u, lambda t: np.clip(t, 0.0, 1.0)) < 0.006

    def test_normal_offset_distance(self):
        # sup |Phi(z) - Phi(z-1)| = Phi(1/2) - Phi(-1/2), frozen
        rng = np.random.default_rng(5)
        x = rng.normal(size=200_000)
        d = ks_one_sample(x, lambda t: stats.norm.cdf(t - 1.0))
        assert abs(d - 0.3829249225480262) < 0.01

    def test_two_sample_symmetry_and_range(self):
        rng = np.random.default_rng(6)
        a, b = rng.normal(size=1000), rng.normal(loc=0.3, size=700)
        d1, d2 = ks_two_sample(a, b), ks_two_sample(b, a)
        assert d1 == d2
        assert 0.0 <= d1 <= 1.0

    def test_between_cdfs_matches_closed_form(self):
        d = ks_between_cdfs(
            stats.norm.cdf, lambda t: stats.norm.cdf(np.asarray(t) - 1.0), -8.0, 8.0
        )
        assert abs(d - 0.3829249225480262) < 1e-10

    def test_empty_sample(self):
        with pytest.raises(ValueError):
            ks_one_sample(np.array([]), lambda t: t)
        with pytest.raises(ValueError):
            ks_two_sample(np.array([]), np.array([1.0]))


class TestHistBins:
    def test_single_bin_height(self):
        edges, heights = hist_bins(np.array([1.0, 2.0, 3.0]), 1)
        width = edges[1] - edges[0]
        assert abs(heights[0] - 1.0 / width) < 1e-12

    def test_empty_bins_are_zero(self):
        edges, heights = hist_bins(np.array([0.0, 10.0]), 5, (0.0, 10.0))
        assert np.count_nonzero(heights) == 2

    def test_density_normalization(self):
        rng = np.random.default_rng(7)
        edges, heights = hist_bins(rng.normal(size=5_000), 40)
        assert abs(float(np.sum(heights * np.diff(edges))) - 1.0) < 1e-9

    def test_errors(self):
        with pytest.raises(ValueError):
            hist_bins(np.array([1.0]), 0)
        with pytest.raises(ValueError):
            hist_bins(np.array([]), 3)
        with pytest.raises(ValueError):
            hist_bins(np.array([1.0]), 3, (2.0, 2.0))


class TestMcse:
    def test_iid_matches_classic_se(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=40_000)
        se = mcse(x)
        classic = x.std(ddof=1) / math.sqrt(x.size)
        assert 0.5 * classic < se < 2.0 * classic

    def test_short_input(self):
        with pytest.raises(ValueError):
            mcse(np.array([1.0, 2.0]))
