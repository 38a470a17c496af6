"""Conjugate posterior references and truncation algebra."""

import math

import numpy as np
import pytest

from fidinfer import oracle
from fidinfer.core import ZeroWeightMass
from fidinfer.diagnostics import ks_one_sample


class TestPosteriorTable:
    def test_binomial_jeffreys(self):
        d = oracle.posterior_density(oracle.PosteriorSpec(model="binomial", prior="jeffreys", n=10, x=1))
        assert abs(d.mean() - 1.5 / 11.0) < 1e-14

    def test_binomial_uniform(self):
        d = oracle.posterior_density(oracle.PosteriorSpec(model="binomial", prior="uniform", n=10, x=1))
        assert abs(d.mean() - 2.0 / 12.0) < 1e-14

    def test_poisson_jeffreys(self):
        d = oracle.posterior_density(oracle.PosteriorSpec(model="poisson", prior="jeffreys", x=2))
        assert abs(d.mean() - 2.5) < 1e-13

    def test_poisson_jeffreys_x0_still_proper(self):
        d = oracle.posterior_density(oracle.PosteriorSpec(model="poisson", prior="jeffreys", x=0))
        assert abs(d.mean() - 0.5) < 1e-13
        assert abs(float(d.cdf(math.inf)) - 1.0) < 1e-12

    def test_poisson_exposure(self):
        d = oracle.posterior_density(
            oracle.PosteriorSpec(model="poisson", prior="flat", x=3, exposure=4.0))
        assert abs(d.mean() - 1.0) < 1e-13

    def test_multinomial_jeffreys(self):
        d = oracle.posterior_density(
            oracle.PosteriorSpec(model="multinomial", prior="jeffreys", counts=(0, 1, 2, 3, 4)))
        assert np.allclose(d.alphas, [0.5, 1.5, 2.5, 3.5, 4.5])
        m = d.marginal(1)
        assert abs(m.mean() - 1.5 / 12.5) < 1e-14

    def test_multinomial_perks(self):
        d = oracle.posterior_density(
            oracle.PosteriorSpec(model="multinomial", prior="perks", counts=(0, 1, 2, 3, 4)))
        assert np.allclose(d.alphas, np.array([0, 1, 2, 3, 4]) + 0.2)

    def test_normal_flat(self):
        data = (1.0, 2.0, 3.0, 4.0)
        d = oracle.posterior_density(oracle.PosteriorSpec(model="normal", prior="flat", data=data))
        assert abs(d.mu_marginal.mean() - 2.5) < 1e-12

    def test_unknown_combination(self):
        with pytest.raises(ValueError):
            oracle.posterior_density(oracle.PosteriorSpec(model="binomial", prior="flat", n=1, x=0))


class TestDensityContracts:
    @pytest.mark.parametrize("dens", [
        oracle.beta_density(1.5, 9.5),
        oracle.gamma_density(2.5, 1.0),
        oracle.normal_density(1.0, 4.0),
        oracle.student_t_density(9, 0.5, 0.3),
        oracle.scaled_inv_chi2_density(10, 2.0),
    ])
    def test_quantile_cdf_round_trip(self, dens):
        for u in (1e-6, 1e-3, 0.25, 0.5, 0.75, 1 - 1e-3, 1 - 1e-6):
            assert abs(float(dens.cdf(dens.ppf(u))) - u) < 1e-10

    @pytest.mark.parametrize("dens", [
        oracle.beta_density(2.0, 10.0),
        oracle.gamma_density(3.0, 1.0),
        oracle.scaled_inv_chi2_density(10, 2.0),
    ])
    def test_sampler_ks_self_test(self, dens):
        rng = np.random.default_rng(4)
        draws = dens.sample(100_000, rng)
        assert ks_one_sample(draws, dens.cdf) < 0.01

    def test_scaled_inv_chi2_is_law_of_ratio(self):
        # df * scale / ChiSq(df) must follow the density
        rng = np.random.default_rng(9)
        df, scale = 7, 1.8
        draws = df * scale / rng.chisquare(df, 100_000)
        assert ks_one_sample(draws, oracle.scaled_inv_chi2_density(df, scale).cdf) < 0.01

    def test_dirichlet_cov(self):
        d = oracle.DirichletPosterior([0.5, 1.5, 2.5, 3.5, 4.5])
        cov = d.cov()
        a, big_a = 3.5, 12.5
        expect = -3.5 * 4.5 / (big_a**2 * (big_a + 1.0))
        assert abs(cov[3, 4] - expect) < 1e-15
        assert abs(cov[3, 3] - a * (big_a - a) / (big_a**2 * (big_a + 1.0))) < 1e-15


class TestTruncation:
    def test_half_normal_median(self):
        t = oracle.truncated_density(oracle.normal_density(0.0, 1.0), 0.0)
        # Phi^{-1}(0.75), frozen from the CDF-ratio construction
        assert abs(float(t.ppf(0.5)) - 0.6744897501960817) < 1e-12

    def test_gamma_truncated_mass(self):
        base = oracle.gamma_density(2.5, 1.0)
        t = oracle.truncated_density(base, 0.75)
        assert abs(float(t.cdf(0.75))) < 1e-12
        assert abs(float(t.cdf(math.inf)) - 1.0) < 1e-12
        # pdf renormalizes by the retained mass
        keep = 1.0 - float(base.cdf(0.75))
        assert abs(float(t.pdf(2.0)) - float(base.pdf(2.0)) / keep) < 1e-12

    def test_full_support_identity(self):
        base = oracle.beta_density(2.0, 3.0)
        t = oracle.truncated_density(base, 0.0, 1.0)
        grid = np.linspace(0.01, 0.99, 50)
        assert np.allclose(t.pdf(grid), base.pdf(grid), atol=1e-13)

    def test_zero_mass(self):
        with pytest.raises(ZeroWeightMass):
            oracle.truncated_density(oracle.beta_density(2.0, 3.0), 2.0, 3.0)
