"""Truncation, condition-after-inference, the background+signal joint and
reweight-then-normalize."""

import math

import numpy as np
import pytest

from fidinfer.core import (
    GpdFunction,
    LpdFunction,
    NegligibleAcceptance,
    ParamDomain,
    UnboundedGpd,
)
from fidinfer.diagnostics import ks_one_sample
from fidinfer.models import BinomialProblem, PoissonProblem
from fidinfer.multivariate import GibbsConfig
from fidinfer.oracle import normal_density
from fidinfer.principle2 import P2Problem, density_p2_grid, sample_p2
from fidinfer.restricted import (
    BoundedNormalProblem,
    SignalNoiseProblem,
    bounded_normal_density,
    conditioned_p2_sampler,
    reweight_p2_density,
    signal_noise_joint_sampler,
)

NEUTRAL = GpdFunction.neutral()
UNIFORM = LpdFunction.uniform()


class TestBoundedNormal:
    def test_vacuous_bound_recovers_unrestricted(self):
        rng = np.random.default_rng(1)
        data = rng.normal(0.0, 1.0, 25)
        dens = bounded_normal_density(
            BoundedNormalProblem(data, mu0=-1e9, sigma2=1.0))
        draws = dens.sample(100_000, np.random.default_rng(2))
        ref = normal_density(float(np.mean(data)), 1.0 / 25.0)
        assert ks_one_sample(draws, ref.cdf) < 0.005

    def test_half_normal_probability(self):
        dens = bounded_normal_density(
            BoundedNormalProblem([0.0], mu0=0.0, sigma2=1.0))
        # (Phi(1) - 1/2) / (1/2), frozen truncated-normal value
        assert abs(float(dens.cdf(1.0)) - 0.6826894921370859) < 1e-12

    def test_pointwise_ratio_constant(self):
        data = [0.2, 1.4, -0.3, 0.9]
        prob = BoundedNormalProblem(data, mu0=0.5, sigma2=2.0)
        dens = bounded_normal_density(prob)
        base = normal_density(prob.xbar, 2.0 / 4.0)
        grid = np.linspace(0.51, 4.0, 500)
        ratio = dens.pdf(grid) / base.pdf(grid)
        assert float(np.max(ratio) - np.min(ratio)) < 1e-10 * float(np.max(ratio))

    def test_tiny_mass_warns(self):
        with pytest.warns(RuntimeWarning):
            bounded_normal_density(BoundedNormalProblem([0.0], mu0=8.0, sigma2=1.0))

    def test_unknown_variance_gibbs_matches_truncated_t(self):
        rng = np.random.default_rng(3)
        data = rng.normal(1.0, 2.0, 10)
        gibbs = bounded_normal_density(BoundedNormalProblem(data, mu0=float(np.mean(data))))
        res = gibbs.run(GibbsConfig(draws=10_000, chains=4, burn_in=500, seed=4))
        assert res.converged
        oracle = gibbs.mu_marginal_oracle()
        assert ks_one_sample(res.pooled("mu"), oracle.cdf) < 0.02
        assert float(res.pooled("mu").min()) > float(np.mean(data))


class TestConditionedSampler:
    def test_vacuous_restriction_identity(self):
        base = P2Problem(PoissonProblem(2), NEUTRAL, UNIFORM)
        got = conditioned_p2_sampler(base, ParamDomain.half_line(0.0), 2_000, seed=3)
        ref = sample_p2(base, 2_000, seed=3)
        assert np.array_equal(got.values["tau"], ref.values["tau"])

    def test_matches_restricted_oracle(self):
        base = P2Problem(PoissonProblem(2), NEUTRAL, UNIFORM)
        got = conditioned_p2_sampler(base, ParamDomain.half_line(0.75), 100_000, seed=5)
        oracle = density_p2_grid(base, np.linspace(1e-9, 25.0, 4096), 2000)
        assert ks_one_sample(got.values["tau"], oracle.restricted(0.75).cdf) < 0.01
        assert float(got.values["tau"].min()) >= 0.75

    def test_thin_tail_still_reachable(self):
        # for x = 0 the mass above 5 is ~1e-3 (grid oracle), well above the
        # 1e-6 refusal floor, so the sampler must succeed
        base = P2Problem(PoissonProblem(0), NEUTRAL, UNIFORM)
        oracle = density_p2_grid(base, np.linspace(1e-9, 40.0, 4096), 2000)
        mass = 1.0 - float(oracle.cdf(np.array([5.0]))[0])
        assert 1e-4 < mass < 2e-3
        got = conditioned_p2_sampler(base, ParamDomain.half_line(5.0), 2_000, seed=6)
        assert float(got.values["tau"].min()) >= 5.0

    def test_negligible_acceptance(self):
        base = P2Problem(PoissonProblem(0), NEUTRAL, UNIFORM)
        with pytest.raises(NegligibleAcceptance):
            conditioned_p2_sampler(base, ParamDomain.half_line(40.0), 100, seed=7)


class TestSignalNoise:
    def test_tau1_positive_by_construction(self):
        problem = SignalNoiseProblem(x0=3, x=2, alpha=4.0, lpd=UNIFORM)
        batch = signal_noise_joint_sampler(problem, 50_000, seed=8)
        assert np.all(batch.values["tau1"] > 0.0)
        assert np.allclose(batch.values["tau"],
                           batch.values["tau0"] + batch.values["tau1"])

    def test_x0_zero_edge_recovers_unrestricted(self):
        problem = SignalNoiseProblem(x0=0, x=2, alpha=4.0, lpd=UNIFORM)
        batch = signal_noise_joint_sampler(problem, 100_000, seed=9)
        base = P2Problem(PoissonProblem(2), NEUTRAL, UNIFORM)
        oracle = density_p2_grid(base, np.linspace(1e-9, 25.0, 4096), 2000)
        assert ks_one_sample(batch.values["tau"], oracle.cdf) < 0.03

    def test_lower_tail_heavier_than_fixed_background(self):
        # statistical error in the background estimate adds lower-tail mass
        # relative to conditioning on the point estimate x0/alpha
        problem = SignalNoiseProblem(x0=3, x=2, alpha=4.0, lpd=UNIFORM)
        batch = signal_noise_joint_sampler(problem, 200_000, seed=10)
        base = P2Problem(PoissonProblem(2), NEUTRAL, UNIFORM)
        oracle = density_p2_grid(base, np.linspace(1e-9, 25.0, 4096), 2000)
        fixed = oracle.restricted(0.75)
        # q at the fixed curve's 5% point, read off the grid CDF
        cdf_on_grid = fixed.cdf(oracle.grid)
        q = float(np.interp(0.05, cdf_on_grid, oracle.grid))
        p_joint = float(np.mean(batch.values["tau"] < q))
        p_fixed = float(fixed.cdf(np.array([q]))[0])
        se = math.sqrt(p_joint * (1 - p_joint) / batch.values["tau"].size)
        assert p_joint >= p_fixed - 3 * se


class TestReweight:
    def test_neutral_identity_same_seed(self):
        base = P2Problem(PoissonProblem(2), NEUTRAL, UNIFORM)
        got = reweight_p2_density(base, GpdFunction.neutral(), 2_000, seed=3)
        ref = sample_p2(base, 2_000, seed=3)
        assert np.array_equal(got.values["tau"], ref.values["tau"])

    def test_binomial_step_region_ratio(self):
        # doubling the weight below p = 0.2 doubles that region's density
        # ratio relative to the preliminary density
        base = P2Problem(BinomialProblem(10, 1), NEUTRAL, UNIFORM)
        gpd = GpdFunction.step([0.2], [2.0, 1.0])
        batch = reweight_p2_density(base, gpd, 200_000, seed=4)
        oracle = density_p2_grid(base, np.linspace(1e-6, 1.0 - 1e-6, 4096), 2000)
        reweighted = oracle.reweighted(gpd)
        assert ks_one_sample(batch.values["p"], reweighted.cdf) < 0.01
        prelim_below = float(oracle.cdf(np.array([0.2]))[0])
        rew_below = float(np.mean(batch.values["p"] <= 0.2))
        expect = 2 * prelim_below / (2 * prelim_below + (1 - prelim_below))
        assert abs(rew_below - expect) < 0.005

    def test_poisson_step_vs_reweighted_oracle(self):
        base = P2Problem(PoissonProblem(2), NEUTRAL, UNIFORM)
        gpd = GpdFunction.step([1.0], [1.0, 2.0])
        batch = reweight_p2_density(base, gpd, 100_000, seed=5)
        oracle = density_p2_grid(base, np.linspace(1e-9, 25.0, 4096), 2000)
        assert ks_one_sample(batch.values["tau"], oracle.reweighted(gpd).cdf) < 0.01

    def test_general_needs_sup(self):
        base = P2Problem(PoissonProblem(2), NEUTRAL, UNIFORM)
        gpd = GpdFunction.general(lambda t: np.asarray(t))
        with pytest.raises(UnboundedGpd):
            reweight_p2_density(base, gpd, 100, seed=6)

    def test_general_with_sup_works(self):
        base = P2Problem(BinomialProblem(10, 1), NEUTRAL, UNIFORM)
        gpd = GpdFunction.general(lambda t: 1.0 + np.asarray(t), sup_bound=2.0)
        batch = reweight_p2_density(base, gpd, 50_000, seed=7)
        oracle = density_p2_grid(base, np.linspace(1e-6, 1.0 - 1e-6, 4096), 2000)
        assert ks_one_sample(batch.values["p"], oracle.reweighted(gpd).cdf) < 0.012
