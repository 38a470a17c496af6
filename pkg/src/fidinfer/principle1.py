"""Fiducial densities for the bijective case: the post-data law of the
primary r.v. is the pre-data law reweighted by the GPD pulled back through
the inverse structural map, and the parameter density follows by a monotone
change of variables.

Supports the two bijective built-ins (normal mean, normal variance).  The
set-valued discrete models belong to the companion engine in principle2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .core import (
    Condition1Violated,
    FiducialArgument,
    GpdFunction,
    GpdKind,
    ParamDomain,
    SampleBatch,
    UnboundedGpd,
    ZeroWeightMass,
)
from .models import NormalMeanProblem, NormalVarianceProblem

_BIJECTIVE = (NormalMeanProblem, NormalVarianceProblem)


@dataclass(frozen=True)
class FeasibleSets:
    """The post-data feasible sets: gamma_set in primary-r.v. space,
    theta_set in parameter space, plus the monotone bijection between them.
    Parameter values impossible pre-data stay impossible post-data."""

    gamma_set: ParamDomain
    theta_set: ParamDomain
    theta_of_gamma: Callable
    gamma_of_theta: Callable
    decreasing: bool


def feasible_sets(problem, gpd: GpdFunction) -> FeasibleSets:
    """Build G_x and H_x for a bijective problem under `gpd`."""
    if not isinstance(problem, _BIJECTIVE):
        raise Condition1Violated(
            f"{type(problem).__name__} has a set-valued inverse; use the "
            "set-valued engine"
        )
    theta_set = gpd.support(problem.natural_domain())
    # the built-in maps are decreasing in gamma, so segment images flip
    with np.errstate(divide="ignore"):
        gamma_segments = sorted(
            (
                float(problem.gamma_of_theta(hi)) if math.isfinite(hi) else _gamma_limit(problem, hi),
                float(problem.gamma_of_theta(lo)) if math.isfinite(lo) else _gamma_limit(problem, lo),
            )
            for lo, hi in theta_set.segments
        )
    return FeasibleSets(
        gamma_set=ParamDomain(tuple(gamma_segments)),
        theta_set=theta_set,
        theta_of_gamma=problem.theta_of_gamma,
        gamma_of_theta=problem.gamma_of_theta,
        decreasing=True,
    )


def _gamma_limit(problem, theta_endpoint: float) -> float:
    """Image of an infinite theta endpoint under the decreasing inverse."""
    if isinstance(problem, NormalMeanProblem):
        return -math.inf if theta_endpoint > 0 else math.inf
    # variance map n * s2 / gamma: theta -> inf corresponds to gamma -> 0+
    return 0.0 if theta_endpoint > 0 else math.inf


def classify_argument(problem, gpd: GpdFunction) -> FiducialArgument:
    """Which fiducial argument the pair (problem, gpd) invokes.

    Strong: neutral weight and the feasible gamma set fills the support of
    the pre-data law.  Moderate: neutral weight on a strictly smaller
    feasible set.  Weak: non-constant weight on the feasible parameter set.
    """
    sets = feasible_sets(problem, gpd)
    if not gpd.is_constant_on(sets.theta_set):
        return FiducialArgument.WEAK
    support = problem.pi0().support
    full = (
        len(sets.gamma_set.segments) == 1
        and sets.gamma_set.lo <= support[0]
        and sets.gamma_set.hi >= support[1]
    )
    return FiducialArgument.STRONG if full else FiducialArgument.MODERATE


class _PushforwardBase:
    """Law of theta(Gamma) for Gamma ~ pi0 and a decreasing monotone map;
    this is the neutral-weight parameter density on the natural space."""

    def __init__(self, problem):
        self.problem = problem
        self.pi0 = problem.pi0()

    def pdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = self.problem.gamma_of_theta(theta)
            vals = self.pi0.pdf(g) * np.abs(self.problem.dgamma_dtheta(theta))
        return np.where(np.isfinite(vals), vals, 0.0)

    def cdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        with np.errstate(divide="ignore"):
            g = self.problem.gamma_of_theta(theta)
        return 1.0 - self.pi0.cdf(g)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        return self.problem.theta_of_gamma(self.pi0.ppf(1.0 - u))


class P1Density:
    """The bijective-case fiducial density of one parameter.

    Exposes both coordinate systems: ``pdf``/``cdf``/``sample`` act on the
    parameter, ``pdf_gamma`` is the post-data density of the primary r.v.
    For neutral and step weights the sampler is an exact finite mixture of
    truncated base segments; general weights fall back to rejection against
    the neutral-weight base with the supplied supremum bound.
    """

    def __init__(self, problem, gpd: GpdFunction):
        self.problem = problem
        self.gpd = gpd
        self.sets = feasible_sets(problem, gpd)
        self.argument = classify_argument(problem, gpd)
        self.base = _PushforwardBase(problem)
        if gpd.kind is GpdKind.GENERAL:
            self._pieces = None
            norm, _ = quad(
                lambda t: float(gpd(t)) * float(self.base.pdf(t)),
                self.sets.theta_set.lo, self.sets.theta_set.hi,
                limit=400, epsrel=1e-10,
            )
            self.norm = norm
        else:
            # (lo, hi, height, base mass) per constant piece
            pieces = []
            for lo, hi, h in gpd.pieces_on(problem.natural_domain()):
                m = float(self.base.cdf(hi) - self.base.cdf(lo))
                if m > 0.0:
                    pieces.append((lo, hi, h, m))
            self._pieces = pieces
            self.norm = sum(h * m for _, _, h, m in pieces)
        if not (self.norm > 0.0 and math.isfinite(self.norm)):
            raise ZeroWeightMass(f"weight-times-base mass is {self.norm}")

    # -- parameter space ----------------------------------------------------

    def pdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        inside = self.sets.theta_set.contains(theta)
        return np.where(inside, self.gpd(theta) * self.base.pdf(theta) / self.norm, 0.0)

    def cdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape)
        for lo, hi, h, m in self._require_pieces():
            lo_c = self.base.cdf(lo)
            seg = np.clip(self.base.cdf(np.clip(theta, lo, hi)) - lo_c, 0.0, m)
            out += h * seg
        return out / self.norm

    def sample(self, n: int, rng: np.random.Generator, chain: int = 0) -> SampleBatch:
        if self.gpd.kind is GpdKind.GENERAL:
            draws = self._sample_rejection(n, rng)
        else:
            draws = self._sample_mixture(n, rng)
        return SampleBatch(
            values={self.problem.param_name: draws},
            seed=-1, chain=chain, argument_used=self.argument,
            fingerprint=self.problem.fingerprint() + f"|gpd={self.gpd.kind.value}",
        )

    # -- primary r.v. space --------------------------------------------------

    def pdf_gamma(self, gamma):
        """Post-data density of the primary r.v. (zero off the feasible set)."""
        gamma = np.asarray(gamma, dtype=float)
        inside = self.sets.gamma_set.contains(gamma)
        w = self.gpd(self.problem.theta_of_gamma(gamma))
        # the change of variables carries the same normalizer
        return np.where(inside, w * self.problem.pi0().pdf(gamma) / self.norm_gamma, 0.0)

    @property
    def norm_gamma(self) -> float:
        """Integral of weight * pi0 over the feasible gamma set."""
        return self.norm  # equal by the change-of-variables identity

    # -- internals ------------------------------------------------------------

    def _require_pieces(self):
        if self._pieces is None:
            raise UnboundedGpd("general GPD supports sampling only; no closed CDF")
        return self._pieces

    def _sample_mixture(self, n: int, rng: np.random.Generator) -> np.ndarray:
        pieces = self._require_pieces()
        heights = np.array([h for _, _, h, _ in pieces])
        masses = np.array([m for _, _, _, m in pieces])
        # normalize by the max height first so that rescaled weights give the
        # same mixture probabilities bit for bit (proportionality redundancy)
        rel = heights / np.max(heights)
        probs = rel * masses
        probs = probs / np.sum(probs)
        idx = rng.choice(len(pieces), size=n, p=probs)
        u = rng.random(n)
        draws = np.empty(n)
        for i, (lo, hi, _, m) in enumerate(pieces):
            sel = idx == i
            if not np.any(sel):
                continue
            lo_c = float(self.base.cdf(lo))
            draws[sel] = self.base.ppf(lo_c + u[sel] * m)
        return draws

    def _sample_rejection(self, n: int, rng: np.random.Generator) -> np.ndarray:
        sup = self.gpd.sup_on(self.sets.theta_set)
        out = np.empty(0)
        while out.size < n:
            need = n - out.size
            block = max(need * 2, 1024)
            theta = self.base.ppf(rng.random(block))
            accept = rng.random(block) * sup <= self.gpd(theta)
            out = np.concatenate([out, theta[accept]])
        return out[:n]


def fiducial_density_p1(problem, gpd: GpdFunction) -> P1Density:
    """Construct the bijective-case fiducial density of the problem's
    parameter under the given pre-data weight."""
    return P1Density(problem, gpd)


def weight_ratio(gpd: GpdFunction, d_interval, e_interval, problem) -> float:
    """Ratio of the pulled-back weight integrals over two gamma intervals.

    Computes integral_D w(theta(gamma)) dgamma / integral_E (same).  The
    d/e interpretation as a post-data probability ratio additionally needs
    D and E to carry equal pre-data probability; that is the caller's
    responsibility.
    """
    def mass(interval):
        a, b = float(interval[0]), float(interval[1])
        if not a < b:
            raise ValueError(f"degenerate interval ({a}, {b})")
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("weight-ratio intervals must be finite")
        kinks = []
        if gpd.kind is GpdKind.STEP:
            kinks = sorted(
                g for g in (float(problem.gamma_of_theta(bp)) for bp in gpd.breakpoints)
                if a < g < b
            )
        val, _ = quad(
            lambda g: float(gpd(problem.theta_of_gamma(g))), a, b,
            points=kinks or None, limit=200,
        )
        return val

    e = mass(e_interval)
    if e <= 0.0:
        raise ZeroWeightMass("denominator weight integral is zero")
    return mass(d_interval) / e


__all__ = [
    "FeasibleSets", "feasible_sets", "classify_argument",
    "P1Density", "fiducial_density_p1", "weight_ratio",
]
