"""Restricted-parameter strategies: truncation for the bounded normal mean,
condition-after-inference for spillage cases, the background-plus-signal
joint over two Poisson rates, and reweight-then-normalize for non-constant
GPDs over set-valued models.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    FiducialArgument,
    GpdFunction,
    GpdKind,
    LpdFunction,
    NegligibleAcceptance,
    ParamDomain,
    SampleBatch,
    UnboundedGpd,
)
from .models import NormalMeanProblem, PoissonProblem
from .multivariate import FullConditionalSet, GibbsConfig, GibbsResult, gibbs_run, normal_joint_conditionals
from .oracle import normal_density, truncated_density
from .principle2 import P2Problem, sample_p2

_ACCEPTANCE_FLOOR = 1e-6
_PROPOSAL_BUDGET = 100_000_000


@dataclass(frozen=True)
class BoundedNormalProblem:
    """Normal data with the mean known in advance to exceed `mu0`."""

    data: np.ndarray
    mu0: float
    sigma2: float | None = None      # None marks the variance unknown

    def __post_init__(self):
        object.__setattr__(self, "data", np.atleast_1d(np.asarray(self.data, dtype=float)))
        if not math.isfinite(self.mu0):
            raise ValueError("mu0 must be finite")

    @property
    def n(self) -> int:
        return self.data.size

    @property
    def xbar(self) -> float:
        return float(np.mean(self.data))

    @property
    def gamma0(self) -> float:
        """Largest primary value consistent with the bound (known variance)."""
        if self.sigma2 is None:
            raise ValueError("gamma0 needs a known variance")
        return math.sqrt(self.n / self.sigma2) * (self.xbar - self.mu0)


class BoundedNormalGibbs:
    """Joint sampler for (mean, variance) when the variance is unknown: the
    mean conditional is truncated below at mu0, the variance conditional is
    untouched.  The mean marginal is the usual Student-t law conditioned to
    (mu0, inf)."""

    def __init__(self, problem: BoundedNormalProblem):
        self.problem = problem
        self.fcs: FullConditionalSet = normal_joint_conditionals(
            problem.data, mu_lower=problem.mu0
        )

    def run(self, cfg: GibbsConfig) -> GibbsResult:
        return gibbs_run(self.fcs, cfg)

    def mu_marginal_oracle(self):
        from .oracle import student_t_density

        x = self.problem.data
        n = x.size
        s = float(np.std(x, ddof=1))
        base = student_t_density(n - 1, self.problem.xbar, s / math.sqrt(n))
        return truncated_density(base, self.problem.mu0, math.inf)


def bounded_normal_density(problem: BoundedNormalProblem):
    """Known variance: the unrestricted mean density renormalized on
    (mu0, inf).  Unknown variance: a Gibbs sampler whose mean conditional is
    truncated.  Warns when the retained mass is below 1e-6."""
    if problem.sigma2 is None:
        return BoundedNormalGibbs(problem)
    base = normal_density(problem.xbar, problem.sigma2 / problem.n)
    mass = 1.0 - float(base.cdf(problem.mu0))
    if mass < _ACCEPTANCE_FLOOR:
        warnings.warn(
            f"truncation keeps only {mass:.3g} of the mass; results may be fragile",
            RuntimeWarning, stacklevel=2,
        )
    return truncated_density(base, problem.mu0, math.inf)


def conditioned_p2_sampler(
    base: P2Problem, restriction: ParamDomain, n_draws: int, seed: int
) -> SampleBatch:
    """Draws from the set-valued fiducial density conditioned to
    `restriction`, by rejection from the unrestricted sampler.

    Raises NegligibleAcceptance once enough proposals have been spent to
    estimate the restricted mass below 1e-6.
    """
    name = base.model.param_name
    kept: list[np.ndarray] = []
    n_kept = 0
    proposed = 0
    accepted = 0
    rate_est = 1.0
    sub = 0
    while n_kept < n_draws:
        need = n_draws - n_kept
        block = min(max(int(math.ceil(need / max(rate_est, 0.01))), need), 4_000_000)
        batch = sample_p2(base, block, _proposal_seed(seed, sub))
        sub += 1
        vals = batch.values[name]
        good = vals[restriction.contains(vals)]
        proposed += block
        accepted += good.size
        if good.size:
            kept.append(good)
            n_kept += good.size
        rate_est = accepted / proposed
        if proposed >= 2_000_000 and rate_est < _ACCEPTANCE_FLOOR:
            raise NegligibleAcceptance(
                f"estimated restricted mass {rate_est:.3g} below {_ACCEPTANCE_FLOOR:g}"
            )
        if proposed > _PROPOSAL_BUDGET:
            raise NegligibleAcceptance(
                f"proposal budget exhausted at acceptance {rate_est:.3g}"
            )
    out = np.concatenate(kept)[:n_draws]
    batch = SampleBatch(
        values={name: out}, seed=seed, chain=0,
        argument_used=FiducialArgument.CONDITIONED_STRATEGY,
        fingerprint=base.fingerprint() + "|conditioned",
    )
    batch.validate({name: restriction}, n_draws)
    return batch


def _proposal_seed(seed: int, sub: int) -> int:
    """Proposal-block seeds: the first block reuses `seed` itself, so a
    vacuous restriction reproduces the unrestricted stream bit for bit."""
    return seed if sub == 0 else (seed * 1_000_003 + sub) % (2**63)


@dataclass(frozen=True)
class SignalNoiseProblem:
    """Background rate estimated from a count over `alpha` time units; the
    combined background-plus-signal rate from a count over one unit.  The
    combined rate must exceed the background rate."""

    x0: int
    x: int
    alpha: float
    lpd: LpdFunction

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.x0 < 0 or self.x < 0:
            raise ValueError("counts must be non-negative")


def signal_noise_joint_sampler(
    problem: SignalNoiseProblem, n_draws: int, seed: int
) -> SampleBatch:
    """Joint draws of (tau, tau0, tau1 = tau - tau0).

    The background rate comes from the unrestricted set-valued density for
    the count over exposure alpha; the combined rate is then drawn from its
    own unrestricted density conditioned (by paired rejection) to exceed the
    background draw.
    """
    gpd = GpdFunction.neutral()
    p_bg = P2Problem(PoissonProblem(problem.x0, exposure=problem.alpha), gpd, problem.lpd)
    p_sig = P2Problem(PoissonProblem(problem.x, exposure=1.0), gpd, problem.lpd)

    tau0 = sample_p2(p_bg, n_draws, seed).values["tau"]
    tau = np.empty(n_draws)
    pending = np.arange(n_draws)
    proposed = 0
    matched = 0
    sub = 1
    while pending.size:
        # propose several candidates per unmatched slot; keep the first that
        # clears its own background draw (plain rejection per slot)
        reps = max(1, min(256, 10_000 // pending.size + 1))
        block = sample_p2(
            p_sig, pending.size * reps, _proposal_seed(seed, sub)
        ).values["tau"].reshape(reps, pending.size)
        sub += 1
        ok = block > tau0[pending][None, :]
        hit = ok.any(axis=0)
        first = np.argmax(ok, axis=0)
        tau[pending[hit]] = block[first, np.arange(pending.size)][hit]
        proposed += pending.size * reps
        matched += int(hit.sum())
        pending = pending[~hit]
        rate = matched / proposed
        if proposed >= 2_000_000 and rate < _ACCEPTANCE_FLOOR:
            raise NegligibleAcceptance(
                f"slot acceptance {rate:.3g} below {_ACCEPTANCE_FLOOR:g}"
            )
        if proposed > _PROPOSAL_BUDGET:
            raise NegligibleAcceptance(
                f"{pending.size} slots still unmatched after {proposed} proposals"
            )
    tau1 = tau - tau0
    batch = SampleBatch(
        values={"tau": tau, "tau0": tau0, "tau1": tau1},
        seed=seed, chain=0,
        argument_used=FiducialArgument.CONDITIONED_STRATEGY,
        fingerprint=f"signal_noise(alpha={problem.alpha:g},x0={problem.x0},x={problem.x})|lpd={problem.lpd.name}",
    )
    batch.validate({
        "tau": ParamDomain.half_line(0.0),
        "tau0": ParamDomain.half_line(0.0),
    }, n_draws)
    if not np.all(tau1 > 0.0):
        raise AssertionError("construction must give tau1 > 0 on every draw")
    return batch


def reweight_p2_density(
    base: P2Problem, target_gpd: GpdFunction, n_draws: int, seed: int
) -> SampleBatch:
    """Draws from the preliminary (neutral-GPD) set-valued density reweighted
    by `target_gpd` and renormalized: rejection with bound sup(weight).

    The preliminary density plays the role of the little-pre-data-knowledge
    scenario; multiplying by the weight and renormalizing carries the
    pre-data knowledge back in.
    """
    name = base.model.param_name
    natural = base.model.natural_domain()
    if target_gpd.kind is GpdKind.GENERAL and (
        target_gpd.sup_bound is None or not math.isfinite(target_gpd.sup_bound)
    ):
        raise UnboundedGpd("reweighting needs a finite sup bound on the weight")
    sup = target_gpd.sup_on(natural)
    out = np.empty(0)
    proposed = 0
    accepted = 0
    rate_est = 1.0
    sub = 0
    while out.size < n_draws:
        need = n_draws - out.size
        block = min(max(int(math.ceil(need / max(rate_est, 0.01))), need), 4_000_000)
        vals = sample_p2(base, block, _proposal_seed(seed, sub)).values[name]
        rng = np.random.default_rng((seed, 7919, sub))
        keep = rng.random(block) * sup <= target_gpd(vals)
        sub += 1
        proposed += block
        accepted += int(np.sum(keep))
        out = np.concatenate([out, vals[keep]])
        rate_est = accepted / proposed
        if proposed >= 2_000_000 and rate_est < _ACCEPTANCE_FLOOR:
            raise NegligibleAcceptance(f"acceptance rate {rate_est:.3g} below floor")
        if proposed > _PROPOSAL_BUDGET:
            raise NegligibleAcceptance(f"proposal budget exhausted at acceptance {rate_est:.3g}")
    batch = SampleBatch(
        values={name: out[:n_draws]}, seed=seed, chain=0,
        argument_used=FiducialArgument.WEAK,
        fingerprint=base.fingerprint() + "|reweighted",
    )
    batch.validate({name: natural}, n_draws)
    return batch


__all__ = [
    "BoundedNormalProblem", "BoundedNormalGibbs", "bounded_normal_density",
    "SignalNoiseProblem", "conditioned_p2_sampler",
    "signal_noise_joint_sampler", "reweight_p2_density",
]
