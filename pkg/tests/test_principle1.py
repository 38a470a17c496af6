"""Bijective-case fiducial densities: argument classification, the post-data
primary-r.v. law, change-of-variables densities and weight ratios."""

import math

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from fidinfer.core import (
    Condition1Violated,
    FiducialArgument,
    GpdFunction,
    ParamDomain,
    UnboundedGpd,
)
from fidinfer.diagnostics import ks_one_sample
from fidinfer.models import BinomialProblem, NormalMeanProblem, NormalVarianceProblem
from fidinfer.oracle import scaled_inv_chi2_density
from fidinfer.principle1 import classify_argument, fiducial_density_p1, weight_ratio


@pytest.fixture
def mean_problem():
    # n = 4, sigma2 = 1, xbar = 2
    return NormalMeanProblem(data=[1.0, 3.0, 2.5, 1.5], sigma2=1.0)


class TestClassification:
    def test_strong(self, mean_problem):
        assert classify_argument(mean_problem, GpdFunction.neutral()) is FiducialArgument.STRONG

    def test_moderate(self, mean_problem):
        gpd = GpdFunction.neutral(ParamDomain.half_line(0.0))
        assert classify_argument(mean_problem, gpd) is FiducialArgument.MODERATE

    def test_weak(self, mean_problem):
        gpd = GpdFunction.step([0.0], [1.0, 2.0])
        assert classify_argument(mean_problem, gpd) is FiducialArgument.WEAK

    def test_variance_strong(self):
        prob = NormalVarianceProblem(data=[0.4, -1.0, 2.0], mu=0.0)
        assert classify_argument(prob, GpdFunction.neutral(ParamDomain.half_line(0.0))) \
            is FiducialArgument.STRONG

    def test_set_valued_rejected(self):
        with pytest.raises(Condition1Violated):
            classify_argument(BinomialProblem(10, 1), GpdFunction.neutral())


class TestPostDataGammaLaw:
    def test_strong_equals_pre_data(self, mean_problem):
        d = fiducial_density_p1(mean_problem, GpdFunction.neutral())
        grid = np.linspace(-8.0, 8.0, 1000)
        assert np.max(np.abs(d.pdf_gamma(grid) - stats.norm.pdf(grid))) < 1e-12

    def test_moderate_preserves_relative_heights(self, mean_problem):
        # conditioned to the feasible set: height ratios match pi0 ratios
        gpd = GpdFunction.neutral(ParamDomain.half_line(0.0))
        d = fiducial_density_p1(mean_problem, gpd)
        gamma0 = d.sets.gamma_set.hi
        grid = np.linspace(gamma0 - 6.0, gamma0 - 1e-3, 500)
        ratios = d.pdf_gamma(grid) / stats.norm.pdf(grid)
        assert np.max(ratios) - np.min(ratios) < 1e-12 * np.max(ratios)
        assert float(d.pdf_gamma(gamma0 + 0.5)) == 0.0

    def test_weak_reweights_by_step(self, mean_problem):
        gpd = GpdFunction.step([0.0], [1.0, 3.0])
        d = fiducial_density_p1(mean_problem, gpd)
        # theta(gamma) decreasing: mu > 0 corresponds to gamma < xbar * 2
        g_break = float(mean_problem.gamma_of_theta(0.0))
        below, above = g_break - 1.0, g_break + 1.0
        ratio = (d.pdf_gamma(below) / stats.norm.pdf(below)) / (
            d.pdf_gamma(above) / stats.norm.pdf(above))
        assert abs(float(ratio) - 3.0) < 1e-12


class TestParameterDensities:
    def test_normal_mean_strong_closed_form(self, mean_problem):
        d = fiducial_density_p1(mean_problem, GpdFunction.neutral())
        ref = stats.norm(mean_problem.xbar, 0.5)
        grid = np.linspace(0.0, 4.0, 200)
        assert np.max(np.abs(d.pdf(grid) - ref.pdf(grid))) < 1e-13
        assert np.max(np.abs(d.cdf(grid) - ref.cdf(grid))) < 1e-13

    def test_normal_variance_scaled_inv_chi2(self):
        prob = NormalVarianceProblem(data=[1.2, -0.7, 0.3, 2.2, -1.5], mu=0.0)
        d = fiducial_density_p1(prob, GpdFunction.neutral(ParamDomain.half_line(0.0)))
        ref = scaled_inv_chi2_density(prob.n, prob.sigma2_hat)
        grid = np.linspace(0.2, 12.0, 300)
        assert np.max(np.abs(d.pdf(grid) - ref.pdf(grid))) < 1e-12
        assert np.max(np.abs(d.cdf(grid) - ref.cdf(grid))) < 1e-12

    def test_step_half_mass_example(self):
        # xbar = 0, unit scale, weight 2 above zero: P(mu > 0) = 2/3
        prob = NormalMeanProblem(data=[0.0], sigma2=1.0)
        d = fiducial_density_p1(prob, GpdFunction.step([0.0], [1.0, 2.0]))
        assert abs(1.0 - float(d.cdf(0.0)) - 2.0 / 3.0) < 1e-14

    def test_bayes_equivalence_for_step_gpd(self):
        # the weak-argument density equals the weight times the base normal,
        # renormalized; Z computed here independently by quadrature
        prob = NormalMeanProblem(data=[0.3, -0.5, 0.9, 0.1], sigma2=2.0)
        gpd = GpdFunction.step([-0.25, 0.5], [1.0, 4.0, 0.5])
        d = fiducial_density_p1(prob, gpd)
        base = stats.norm(prob.xbar, prob.scale)
        z, _ = quad(lambda t: float(gpd(t)) * base.pdf(t), -50.0, 50.0,
                    points=[-0.25, 0.5], limit=200)
        grid = np.linspace(-3.0, 3.0, 1000)
        ref = gpd(grid) * base.pdf(grid) / z
        assert np.max(np.abs(d.pdf(grid) - ref)) < 1e-10

    def test_mixture_sampler_matches_cdf(self):
        prob = NormalMeanProblem(data=[0.0, 1.0], sigma2=1.0)
        d = fiducial_density_p1(prob, GpdFunction.step([0.3], [1.0, 5.0]))
        rng = np.random.default_rng(13)
        batch = d.sample(100_000, rng)
        assert ks_one_sample(batch.values["mu"], d.cdf) < 0.01

    def test_height_scaling_bit_identical(self):
        prob = NormalMeanProblem(data=[0.0, 1.0], sigma2=1.0)
        base = fiducial_density_p1(prob, GpdFunction.step([0.3], [1.0, 5.0]))
        ref = base.sample(5_000, np.random.default_rng(21)).values["mu"]
        for c in (2.0, 10.0, 0.25, 3.7):
            scaled = fiducial_density_p1(prob, GpdFunction.step([0.3], [c, 5.0 * c]))
            got = scaled.sample(5_000, np.random.default_rng(21)).values["mu"]
            assert np.array_equal(ref, got)

    def test_general_gpd_rejection(self):
        prob = NormalMeanProblem(data=[0.0], sigma2=1.0)
        gpd = GpdFunction.general(lambda t: np.exp(-np.abs(t)), sup_bound=1.0)
        d = fiducial_density_p1(prob, gpd)
        rng = np.random.default_rng(17)
        draws = d.sample(50_000, rng).values["mu"]
        z, _ = quad(lambda t: math.exp(-abs(t)) * stats.norm.pdf(t), -np.inf, np.inf)

        def ref_cdf(t):
            return np.array([
                quad(lambda s: math.exp(-abs(s)) * stats.norm.pdf(s), -np.inf, ti)[0] / z
                for ti in np.atleast_1d(t)
            ])

        # spot-check the CDF at a handful of points (quad per point is slow)
        for q, expect in [(-1.0, None), (0.0, 0.5), (1.0, None)]:
            emp = float(np.mean(draws <= q))
            th = float(ref_cdf(q)[0])
            if expect is not None:
                assert abs(th - expect) < 1e-9
            assert abs(emp - th) < 0.01

    def test_general_gpd_needs_bound(self):
        prob = NormalMeanProblem(data=[0.0], sigma2=1.0)
        d = fiducial_density_p1(prob, GpdFunction.general(lambda t: np.ones_like(t)))
        with pytest.raises(UnboundedGpd):
            d.sample(10, np.random.default_rng(0))


class TestWeightRatio:
    def test_neutral_is_one(self, mean_problem):
        r = weight_ratio(GpdFunction.neutral(), (0.1, 0.4), (0.5, 0.8), mean_problem)
        assert abs(r - 1.0) < 1e-12

    def test_step_pure_regions(self):
        # theta(gamma) = -gamma; D maps into mu > 0, E into mu < 0, |D| = |E|
        prob = NormalMeanProblem(data=[0.0], sigma2=1.0)
        gpd = GpdFunction.step([0.0], [1.0, 3.0])
        r = weight_ratio(gpd, (-1.0, -0.5), (0.5, 1.0), prob)
        assert abs(r - 3.0) < 1e-10

    def test_straddling_breakpoint_vs_quadrature(self):
        prob = NormalMeanProblem(data=[0.0], sigma2=1.0)
        gpd = GpdFunction.step([-0.5, 0.5], [1.0, 3.0, 1.0])
        d_int, e_int = (0.2, 0.8), (-0.1, 0.1)
        r = weight_ratio(gpd, d_int, e_int, prob)

        def brute(interval):
            val, _ = quad(lambda g: float(gpd(prob.theta_of_gamma(g))),
                          interval[0], interval[1], limit=400)
            return val

        assert abs(r - brute(d_int) / brute(e_int)) < 1e-9
        # piecewise arithmetic: d = 3*0.3 + 1*0.3, e = 3*0.2
        assert abs(r - 2.0) < 1e-9

    def test_zero_denominator(self, mean_problem):
        from fidinfer.core import ZeroWeightMass

        gpd = GpdFunction.neutral(ParamDomain.half_line(0.0))
        # E maps to mu < 0 which the weight excludes
        with pytest.raises(ZeroWeightMass):
            weight_ratio(gpd, (-1.0, -0.5), (10.0, 11.0), mean_problem)
