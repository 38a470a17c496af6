"""Fiducial densities for the set-valued case: draw the primary r.v., resolve
the parameter interval consistent with it, then spread the parameter over
that interval with the normalized LPD.

`density_p2_grid` is the brute-force check: it integrates the same joint
density over a stratified grid of primary values and serves as the oracle
the sampler is verified against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    Condition2Violated,
    FiducialArgument,
    GpdFunction,
    GpdKind,
    LpdFunction,
    LpdKind,
    NonIntegrableLpd,
    SampleBatch,
)
from .diagnostics import ks_two_sample
from .models import BinomialProblem, PoissonProblem

_SET_VALUED = (BinomialProblem, PoissonProblem)


@dataclass(frozen=True)
class P2Problem:
    """A set-valued model paired with its pre-data weights.

    Construction enforces the two structural requirements: the union of the
    per-gamma parameter intervals must fill the feasible parameter set (no
    spillage), and the GPD must be a positive constant there.  For the
    built-in models both hold exactly when the GPD is neutral over the whole
    natural parameter space, in which case the post-data law of the primary
    r.v. is its pre-data uniform law (the strong-argument certificate).
    """

    model: BinomialProblem | PoissonProblem
    gpd: GpdFunction
    lpd: LpdFunction

    def __post_init__(self):
        if not isinstance(self.model, _SET_VALUED):
            raise TypeError(f"unsupported set-valued model {type(self.model).__name__}")
        natural = self.model.natural_domain()
        if self.gpd.kind is GpdKind.GENERAL:
            raise Condition2Violated("general GPD cannot be constant on the feasible set")
        if self.gpd.domain is not None and not self.gpd.domain.covers(natural):
            raise Condition2Violated(
                "GPD excludes part of the natural space: the per-gamma intervals "
                "spill outside the feasible set; condition the neutral-GPD "
                "density instead (see restricted.conditioned_p2_sampler)"
            )
        if not self.gpd.is_constant_on(natural):
            raise Condition2Violated("GPD must be a positive constant on the feasible set")

    def fingerprint(self) -> str:
        return f"{self.model.fingerprint()}|lpd={self.lpd.name}"


def sample_p2(
    problem: P2Problem, n_draws: int, seed: int, workers: int = 1
) -> SampleBatch:
    """Exact draws from the set-valued fiducial density.

    Per draw: gamma ~ U(0,1), the model inverts it to an interval, and the
    restricted LPD supplies the parameter by closed-form inverse CDF.  Work
    splits into `workers` shards, each with an RNG seeded by (seed, shard),
    concatenated in shard order for determinism.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    model, lpd = problem.model, problem.lpd
    counts = [n_draws // workers + (1 if w < n_draws % workers else 0)
              for w in range(workers)]
    chunks = []
    for w, m in enumerate(counts):
        if m == 0:
            continue
        rng = np.random.default_rng((seed, w))
        gam = rng.random(m)
        lo, hi = model.theta_sets(gam)
        draws = lpd.sample_in_intervals(lo, hi, rng)
        assert np.all((draws >= lo) & (draws <= hi)), "draw escaped its interval"
        chunks.append(draws)
    values = np.concatenate(chunks)
    batch = SampleBatch(
        values={model.param_name: values},
        seed=seed, chain=0,
        argument_used=FiducialArgument.STRONG,
        fingerprint=problem.fingerprint(),
    )
    batch.validate({model.param_name: model.natural_domain()}, n_draws)
    return batch


def p2_single_draw(model, lpd: LpdFunction, rng: np.random.Generator) -> float:
    """One draw, scalar path (used by the Gibbs conditionals)."""
    gam = rng.random()
    lo, hi = model.theta_sets(np.asarray(gam))
    return float(lpd.sample_in_intervals(np.asarray(lo), np.asarray(hi), rng))


class GridCurve:
    """Density tabulated on a grid; CDF by cumulative trapezoid."""

    def __init__(self, grid: np.ndarray, pdf_values: np.ndarray):
        self.grid = np.asarray(grid, dtype=float)
        self.pdf_values = np.asarray(pdf_values, dtype=float)
        widths = np.diff(self.grid)
        cells = 0.5 * (self.pdf_values[1:] + self.pdf_values[:-1]) * widths
        self._cum = np.concatenate([[0.0], np.cumsum(cells)])
        self.total_mass = float(self._cum[-1])

    def pdf(self, theta):
        return np.interp(np.asarray(theta, dtype=float), self.grid, self.pdf_values,
                         left=0.0, right=0.0)

    def cdf(self, theta):
        raw = np.interp(np.asarray(theta, dtype=float), self.grid, self._cum,
                        left=0.0, right=self.total_mass)
        return raw / self.total_mass

    def normalized(self) -> "GridCurve":
        return GridCurve(self.grid, self.pdf_values / self.total_mass)


class P2GridOracle:
    """Grid-integration evaluator of the marginal parameter density.

    A fixed stratified midpoint rule over the primary variable: each stratum
    contributes the LPD normalized to its own interval, and the marginal is
    the average of those conditional densities.  The CDF is assembled the
    same way from the per-stratum restricted CDFs, so it is exact up to the
    stratification itself.
    """

    _THETA_BLOCK = 2048

    def __init__(self, problem: P2Problem, theta_grid: np.ndarray, gamma_resolution: int = 2000):
        if gamma_resolution < 1000:
            raise ValueError("need at least 10^3 strata for the oracle")
        self.problem = problem
        self.grid = np.asarray(theta_grid, dtype=float)
        if not bool(np.all(problem.model.natural_domain().contains(self.grid))):
            raise ValueError("theta grid must lie inside the feasible set")
        self.gamma_resolution = int(gamma_resolution)
        mids = (np.arange(gamma_resolution) + 0.5) / gamma_resolution
        self.lo, self.hi = problem.model.theta_sets(mids)
        lpd = problem.lpd
        if lpd.kind is LpdKind.GENERAL:
            masses = np.array([lpd.segment_mass(a, b) for a, b in zip(self.lo, self.hi)])
            self._p_lo = self._p_hi = None
        else:
            self._p_lo = lpd.primitive(self._clip_support(self.lo))
            self._p_hi = lpd.primitive(self._clip_support(self.hi))
            masses = self._p_hi - self._p_lo
        if np.any(~np.isfinite(masses)) or np.any(masses <= 0.0):
            raise NonIntegrableLpd("LPD mass failed on a stratum interval")
        self.masses = masses
        self.pdf_values = self.pdf(self.grid)

    def _clip_support(self, t):
        kind = self.problem.lpd.kind
        if kind is LpdKind.RECIP_SQRT_BERNOULLI:
            return np.clip(t, 0.0, 1.0)
        if kind is LpdKind.RECIP_SQRT:
            return np.clip(t, 0.0, None)
        return t

    def pdf(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        lpd = self.problem.lpd
        w = lpd(theta)
        out = np.zeros(theta.shape)
        for start in range(0, theta.size, self._THETA_BLOCK):
            t = theta[start:start + self._THETA_BLOCK, None]
            inside = (t >= self.lo[None, :]) & (t <= self.hi[None, :])
            out[start:start + self._THETA_BLOCK] = np.sum(
                inside / self.masses[None, :], axis=1
            )
        return out * w / self.gamma_resolution

    def cdf(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        lpd = self.problem.lpd
        if self._p_lo is None:
            return self._as_curve().cdf(theta)
        p_t = lpd.primitive(self._clip_support(theta))
        out = np.empty(theta.shape)
        for start in range(0, theta.size, self._THETA_BLOCK):
            pt = p_t[start:start + self._THETA_BLOCK, None]
            frac = (np.minimum(pt, self._p_hi[None, :]) - self._p_lo[None, :]) / self.masses[None, :]
            out[start:start + self._THETA_BLOCK] = np.sum(np.clip(frac, 0.0, 1.0), axis=1)
        return out / self.gamma_resolution

    def normalization(self) -> float:
        """Trapezoid integral of the tabulated density over the grid."""
        return float(np.trapezoid(self.pdf_values, self.grid))

    def _as_curve(self) -> GridCurve:
        return GridCurve(self.grid, self.pdf_values)

    def reweighted(self, weight_fn) -> GridCurve:
        """Grid density multiplied by a weight and renormalized numerically."""
        w = np.asarray(weight_fn(self.grid), dtype=float)
        return GridCurve(self.grid, self.pdf_values * w).normalized()

    def restricted(self, lo: float, hi: float = math.inf) -> GridCurve:
        """Grid density conditioned to [lo, hi] and renormalized."""
        inside = (self.grid >= lo) & (self.grid <= hi)
        return GridCurve(self.grid, np.where(inside, self.pdf_values, 0.0)).normalized()


def density_p2_grid(
    problem: P2Problem, theta_grid: np.ndarray, gamma_resolution: int = 2000
) -> P2GridOracle:
    """Brute-force marginal density on `theta_grid`; the sampler's oracle."""
    return P2GridOracle(problem, theta_grid, gamma_resolution)


@dataclass
class LpdSensitivity:
    """Pairwise two-sample KS distances between marginals sampled under
    different LPDs (everything else held fixed)."""

    lpd_names: list[str]
    ks_matrix: np.ndarray
    n_draws: int

    def max_offdiag(self) -> float:
        m = self.ks_matrix.copy()
        np.fill_diagonal(m, 0.0)
        return float(np.max(m))


def lpd_sensitivity_report(
    model, lpd_list: Sequence[LpdFunction], n_draws: int, seed: int = 0
) -> LpdSensitivity:
    if len(lpd_list) < 2:
        raise ValueError("need at least two LPDs to compare")
    gpd = GpdFunction.neutral()
    samples = [
        sample_p2(P2Problem(model, gpd, lpd), n_draws, seed).values[model.param_name]
        for lpd in lpd_list
    ]
    k = len(lpd_list)
    mat = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            mat[i, j] = mat[j, i] = ks_two_sample(samples[i], samples[j])
    return LpdSensitivity([l.name for l in lpd_list], mat, n_draws)


__all__ = [
    "P2Problem", "sample_p2", "p2_single_draw",
    "P2GridOracle", "GridCurve", "density_p2_grid",
    "LpdSensitivity", "lpd_sensitivity_report",
]
