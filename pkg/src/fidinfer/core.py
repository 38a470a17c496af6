"""Shared domain types: parameter domains, pre-data weight functions, primary
random-variable laws, structural maps and sample containers.

Everything here is immutable after construction and safe to share across
threads.  Samplers take an explicit ``numpy.random.Generator``; one generator
per thread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy import stats


# ---------------------------------------------------------------------------
# Errors shared across the engines
# ---------------------------------------------------------------------------

class FidError(Exception):
    """Base class for all errors raised by this package."""


class EmptyDomain(FidError):
    """A parameter domain with no segments was requested or produced."""


class EmptyInterval(FidError):
    """An interval [lo, hi] with lo >= hi where a proper interval is required."""


class NonIntegrableLpd(FidError):
    """The LPD function has divergent mass on the requested interval."""


class UnboundedGpd(FidError):
    """A GPD without a known supremum where rejection sampling needs one."""


class Condition1Violated(FidError):
    """The structural map is not bijective between the feasible sets."""


class Condition2Violated(FidError):
    """Spillage, or a GPD that is not a positive constant on the feasible set."""


class NegligibleAcceptance(FidError):
    """Rejection sampling acceptance rate fell below the safety threshold."""


class AllZeroCounts(FidError):
    """Multinomial counts summing to zero."""


class ConditionalFailure(FidError):
    """A full-conditional sampler raised during a Gibbs cycle."""


class ZeroWeightMass(FidError):
    """A weight integral that must be positive evaluated to zero."""


# ---------------------------------------------------------------------------
# Parameter domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamDomain:
    """Union of disjoint real intervals forming the allowed space of one
    scalar parameter.

    Segments are (lo, hi) pairs, sorted ascending and pairwise disjoint;
    infinite endpoints are allowed.  Endpoint membership is treated
    inclusively at finite endpoints (a measure-zero convention).  An empty
    segment list is an error, never a valid value.
    """

    segments: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.segments:
            raise EmptyDomain("domain must contain at least one interval")
        prev_hi = -math.inf
        for lo, hi in self.segments:
            if not lo < hi:
                raise EmptyInterval(f"degenerate segment ({lo}, {hi})")
            if lo < prev_hi:
                raise ValueError("segments must be disjoint and sorted ascending")
            prev_hi = hi

    @classmethod
    def interval(cls, lo: float, hi: float) -> "ParamDomain":
        return cls(((float(lo), float(hi)),))

    @classmethod
    def real_line(cls) -> "ParamDomain":
        return cls(((-math.inf, math.inf),))

    @classmethod
    def half_line(cls, lo: float = 0.0) -> "ParamDomain":
        return cls(((float(lo), math.inf),))

    @classmethod
    def unit(cls) -> "ParamDomain":
        return cls(((0.0, 1.0),))

    def contains(self, x) -> np.ndarray:
        """Vectorized membership, inclusive at finite endpoints."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.segments:
            out |= (x >= lo) & (x <= hi)
        return out

    def intersect(self, lo: float, hi: float) -> "ParamDomain":
        """Restrict to [lo, hi]; raises EmptyDomain if nothing remains."""
        segs = []
        for a, b in self.segments:
            a2, b2 = max(a, lo), min(b, hi)
            if a2 < b2:
                segs.append((a2, b2))
        if not segs:
            raise EmptyDomain(f"intersection with ({lo}, {hi}) is empty")
        return ParamDomain(tuple(segs))

    def covers(self, other: "ParamDomain") -> bool:
        """True if every segment of `other` lies inside some segment of self."""
        return all(
            any(a >= lo and b <= hi for lo, hi in self.segments)
            for a, b in other.segments
        )

    @property
    def lo(self) -> float:
        return self.segments[0][0]

    @property
    def hi(self) -> float:
        return self.segments[-1][1]


# ---------------------------------------------------------------------------
# Global pre-data (GPD) functions
# ---------------------------------------------------------------------------

class GpdKind(Enum):
    NEUTRAL = "neutral"
    STEP = "step"
    GENERAL = "general"


@dataclass(frozen=True)
class GpdFunction:
    """Non-negative, locally integrable weight over a parameter, specified up
    to proportionality.

    Kinds:

    * ``NEUTRAL`` -- constant (canonically 1) on ``domain``, 0 outside.
    * ``STEP`` -- piecewise constant; ``heights[i]`` applies on the piece
      ``(breakpoints[i-1], breakpoints[i]]`` (left-open, right-closed), with
      ``heights[0]`` below the first breakpoint and ``heights[-1]`` above the
      last.  An optional ``domain`` zeroes the function outside it.
    * ``GENERAL`` -- arbitrary pointwise evaluator; a finite ``sup_bound``
      must be supplied before rejection sampling can use it.

    Scaling all heights by a positive constant changes nothing downstream:
    every consumer works with ratios or renormalizes.
    """

    kind: GpdKind
    domain: ParamDomain | None = None
    breakpoints: tuple[float, ...] = ()
    heights: tuple[float, ...] = ()
    evaluator: Callable[[np.ndarray], np.ndarray] | None = None
    sup_bound: float | None = None

    @classmethod
    def neutral(cls, domain: ParamDomain | None = None) -> "GpdFunction":
        return cls(kind=GpdKind.NEUTRAL, domain=domain or ParamDomain.real_line())

    @classmethod
    def step(
        cls,
        breakpoints: Sequence[float],
        heights: Sequence[float],
        domain: ParamDomain | None = None,
    ) -> "GpdFunction":
        bp = tuple(float(b) for b in breakpoints)
        hs = tuple(float(h) for h in heights)
        if len(hs) != len(bp) + 1:
            raise ValueError("need len(heights) == len(breakpoints) + 1")
        if any(not (0 < h < math.inf) for h in hs):
            raise ValueError("step heights must be finite and positive")
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        return cls(kind=GpdKind.STEP, breakpoints=bp, heights=hs, domain=domain)

    @classmethod
    def general(cls, evaluator, sup_bound: float | None = None) -> "GpdFunction":
        return cls(kind=GpdKind.GENERAL, evaluator=evaluator, sup_bound=sup_bound)

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.kind is GpdKind.NEUTRAL:
            vals = np.ones(theta.shape)
        elif self.kind is GpdKind.STEP:
            # searchsorted(side="left") realizes the (lo, hi] piece convention
            idx = np.searchsorted(np.asarray(self.breakpoints), theta, side="left")
            vals = np.asarray(self.heights)[idx]
        else:
            vals = np.asarray(self.evaluator(theta), dtype=float)
        if self.domain is not None:
            vals = np.where(self.domain.contains(theta), vals, 0.0)
        return vals

    def support(self, natural: ParamDomain) -> ParamDomain:
        """Where the weight is positive, inside the model's natural space."""
        if self.domain is None:
            return natural
        return _intersect_domains(natural, self.domain)

    def is_constant_on(self, domain: ParamDomain) -> bool:
        """True when the weight takes one positive value on all of `domain`."""
        if self.kind is GpdKind.GENERAL:
            return False
        if self.domain is not None and not self.domain.covers(domain):
            return False
        if self.kind is GpdKind.NEUTRAL:
            return True
        # constant iff no breakpoint falls strictly inside any segment
        return not any(
            lo < b < hi for b in self.breakpoints for lo, hi in domain.segments
        )

    def sup_on(self, domain: ParamDomain) -> float:
        if self.kind is GpdKind.NEUTRAL:
            return 1.0
        if self.kind is GpdKind.STEP:
            return max(h for _, _, h in self.pieces_on(domain))
        if self.sup_bound is None or not math.isfinite(self.sup_bound):
            raise UnboundedGpd("general GPD needs a finite sup_bound for rejection")
        return float(self.sup_bound)

    def pieces_on(self, domain: ParamDomain) -> list[tuple[float, float, float]]:
        """Piecewise-constant decomposition (lo, hi, height) on `domain`.

        Only meaningful for NEUTRAL / STEP kinds.
        """
        if self.kind is GpdKind.GENERAL:
            raise ValueError("general GPD has no piecewise decomposition")
        support = self.support(domain)
        if self.kind is GpdKind.NEUTRAL:
            return [(lo, hi, 1.0) for lo, hi in support.segments]
        cuts = list(self.breakpoints)
        pieces = []
        for lo, hi in support.segments:
            edges = [lo] + [b for b in cuts if lo < b < hi] + [hi]
            for a, b in zip(edges, edges[1:]):
                mid = 0.5 * (a + b) if math.isfinite(a) and math.isfinite(b) else (
                    a + 1.0 if math.isfinite(a) else b - 1.0
                )
                idx = int(np.searchsorted(np.asarray(self.breakpoints), mid, side="left"))
                pieces.append((a, b, self.heights[idx]))
        return pieces


def _intersect_domains(a: ParamDomain, b: ParamDomain) -> ParamDomain:
    segs = []
    for lo1, hi1 in a.segments:
        for lo2, hi2 in b.segments:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if lo < hi:
                segs.append((lo, hi))
    if not segs:
        raise EmptyDomain("domain intersection is empty")
    return ParamDomain(tuple(sorted(segs)))


def gpd_eval(g: GpdFunction, theta) -> np.ndarray:
    """Evaluate a GPD weight; exactly zero on the excluded set."""
    return g(theta)


# ---------------------------------------------------------------------------
# Local pre-data (LPD) functions
# ---------------------------------------------------------------------------

class LpdKind(Enum):
    UNIFORM = "uniform"
    RECIP_SQRT_BERNOULLI = "recip_sqrt_bernoulli"   # 1 / sqrt(p (1-p)) on [0, 1]
    RECIP_SQRT = "recip_sqrt"                       # 1 / sqrt(t) on (0, inf)
    GENERAL = "general"


@dataclass(frozen=True)
class LpdFunction:
    """Weight used only to spread a parameter over the interval consistent
    with one value of the primary r.v.  Same mathematical contract as the
    GPD: non-negative, locally integrable, proportionality-redundant.

    The three named kinds have closed-form primitives, so restricted
    sampling is exact inverse-CDF; GENERAL falls back to numeric inversion.
    """

    kind: LpdKind
    evaluator: Callable[[np.ndarray], np.ndarray] | None = None

    @classmethod
    def uniform(cls) -> "LpdFunction":
        return cls(LpdKind.UNIFORM)

    @classmethod
    def recip_sqrt_bernoulli(cls) -> "LpdFunction":
        return cls(LpdKind.RECIP_SQRT_BERNOULLI)

    @classmethod
    def recip_sqrt(cls) -> "LpdFunction":
        return cls(LpdKind.RECIP_SQRT)

    @classmethod
    def general(cls, evaluator) -> "LpdFunction":
        return cls(LpdKind.GENERAL, evaluator=evaluator)

    @property
    def name(self) -> str:
        return self.kind.value

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.kind is LpdKind.UNIFORM:
            return np.ones(theta.shape)
        if self.kind is LpdKind.RECIP_SQRT_BERNOULLI:
            inside = (theta >= 0.0) & (theta <= 1.0)
            t = np.clip(theta, 1e-300, 1 - 1e-16)
            return np.where(inside, 1.0 / np.sqrt(t * (1.0 - t)), 0.0)
        if self.kind is LpdKind.RECIP_SQRT:
            t = np.clip(theta, 1e-300, None)
            return np.where(theta > 0.0, 1.0 / np.sqrt(t), 0.0)
        return np.asarray(self.evaluator(theta), dtype=float)

    def primitive(self, theta) -> np.ndarray:
        """Antiderivative of the weight (unnormalized CDF); closed kinds only."""
        theta = np.asarray(theta, dtype=float)
        if self.kind is LpdKind.UNIFORM:
            return theta
        if self.kind is LpdKind.RECIP_SQRT_BERNOULLI:
            return 2.0 * np.arcsin(np.sqrt(np.clip(theta, 0.0, 1.0)))
        if self.kind is LpdKind.RECIP_SQRT:
            return 2.0 * np.sqrt(np.clip(theta, 0.0, None))
        raise ValueError("general LPD has no closed-form primitive")

    def inverse_primitive(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if self.kind is LpdKind.UNIFORM:
            return v
        if self.kind is LpdKind.RECIP_SQRT_BERNOULLI:
            return np.sin(0.5 * v) ** 2
        if self.kind is LpdKind.RECIP_SQRT:
            return (0.5 * v) ** 2
        raise ValueError("general LPD has no closed-form primitive")

    def segment_mass(self, lo: float, hi: float) -> float:
        """Unnormalized integral of the weight over [lo, hi]."""
        if lo >= hi:
            return 0.0
        if self.kind is LpdKind.GENERAL:
            from scipy.integrate import quad

            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise NonIntegrableLpd("general LPD on an unbounded interval")
            val, _ = quad(lambda t: float(self(t)), lo, hi, limit=200)
            return val
        if self.kind is LpdKind.RECIP_SQRT_BERNOULLI:
            lo, hi = max(lo, 0.0), min(hi, 1.0)
            if lo >= hi:
                return 0.0
        elif self.kind is LpdKind.RECIP_SQRT:
            lo = max(lo, 0.0)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise NonIntegrableLpd(f"{self.name} LPD mass diverges on [{lo}, {hi}]")
        return float(self.primitive(hi) - self.primitive(lo))

    def sample_in_intervals(self, lo, hi, rng: np.random.Generator) -> np.ndarray:
        """One draw per interval, density proportional to the weight inside
        its own [lo_i, hi_i].  Closed-form inverse CDF; vectorized.
        """
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if self.kind is LpdKind.GENERAL:
            u = rng.random(lo.shape)
            return np.array(
                [lpd_restricted_sampler(self, (a, b)).ppf(ui)
                 for a, b, ui in zip(lo.ravel(), hi.ravel(), u.ravel())]
            ).reshape(lo.shape)
        if self.kind is LpdKind.RECIP_SQRT_BERNOULLI:
            lo, hi = np.clip(lo, 0.0, 1.0), np.clip(hi, 0.0, 1.0)
        elif self.kind is LpdKind.RECIP_SQRT:
            lo, hi = np.clip(lo, 0.0, None), np.clip(hi, 0.0, None)
        if not (np.all(np.isfinite(hi)) and np.all(np.isfinite(lo))):
            raise NonIntegrableLpd(f"{self.name} LPD mass diverges on an unbounded interval")
        a = self.primitive(lo)
        b = self.primitive(hi)
        u = rng.random(lo.shape)
        draws = self.inverse_primitive(a + u * (b - a))
        return np.clip(draws, lo, hi)


class LpdRestricted:
    """The LPD normalized to one interval: exact pdf / cdf / ppf / sampling.

    This is the conditional density the engines use to distribute the
    parameter over the set consistent with a single primary-r.v. value.
    """

    def __init__(self, lpd: LpdFunction, lo: float, hi: float):
        if not lo < hi:
            raise EmptyInterval(f"need lo < hi, got [{lo}, {hi}]")
        if lpd.kind is LpdKind.RECIP_SQRT_BERNOULLI:
            lo, hi = max(lo, 0.0), min(hi, 1.0)
            if not lo < hi:
                raise EmptyInterval("interval lies outside the weight's support")
        if lpd.kind is LpdKind.RECIP_SQRT:
            lo = max(lo, 0.0)
        self.lpd = lpd
        self.lo = float(lo)
        self.hi = float(hi)
        self.mass = lpd.segment_mass(self.lo, self.hi)
        if not (self.mass > 0.0 and math.isfinite(self.mass)):
            raise NonIntegrableLpd(
                f"{lpd.name} LPD mass on [{lo}, {hi}] is {self.mass}"
            )

    def pdf(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        inside = (theta >= self.lo) & (theta <= self.hi)
        return np.where(inside, self.lpd(theta) / self.mass, 0.0)

    def cdf(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        t = np.clip(theta, self.lo, self.hi)
        if self.lpd.kind is LpdKind.GENERAL:
            from scipy.integrate import quad

            flat = np.array(
                [quad(lambda s: float(self.lpd(s)), self.lo, ti, limit=200)[0]
                 for ti in np.atleast_1d(t)]
            )
            return (flat / self.mass).reshape(t.shape)
        return (self.lpd.primitive(t) - self.lpd.primitive(self.lo)) / self.mass

    def ppf(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.lpd.kind is not LpdKind.GENERAL:
            a = self.lpd.primitive(self.lo)
            vals = self.lpd.inverse_primitive(a + u * self.mass)
            return np.clip(vals, self.lo, self.hi)
        # monotone bisection on the CDF, |cdf(mid) - u| driven below 1e-12
        flat_u = np.atleast_1d(u)
        out = np.empty(flat_u.shape)
        for i, ui in enumerate(flat_u):
            lo, hi = self.lo, self.hi
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                c = float(self.cdf(mid))
                if abs(c - ui) < 1e-12:
                    break
                if c < ui:
                    lo = mid
                else:
                    hi = mid
            out[i] = 0.5 * (lo + hi)
        return out.reshape(u.shape)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.ppf(rng.random(n))


def lpd_restricted_sampler(l: LpdFunction, interval) -> LpdRestricted:
    """Sampler for the LPD normalized to `interval` (lo, hi)."""
    lo, hi = interval
    return LpdRestricted(l, lo, hi)


# ---------------------------------------------------------------------------
# Primary random-variable laws
# ---------------------------------------------------------------------------

class PrimaryRvKind(Enum):
    STANDARD_NORMAL = "standard_normal"
    CHI_SQUARED = "chi_squared"
    UNIFORM_UNIT = "uniform_unit"


@dataclass(frozen=True)
class PrimaryRvLaw:
    """The parameter-free law driving the structural equation."""

    kind: PrimaryRvKind
    df: int | None = None

    @classmethod
    def standard_normal(cls) -> "PrimaryRvLaw":
        return cls(PrimaryRvKind.STANDARD_NORMAL)

    @classmethod
    def chi_squared(cls, df: int) -> "PrimaryRvLaw":
        if df < 1:
            raise ValueError("df must be a positive integer")
        return cls(PrimaryRvKind.CHI_SQUARED, df=int(df))

    @classmethod
    def uniform_unit(cls) -> "PrimaryRvLaw":
        return cls(PrimaryRvKind.UNIFORM_UNIT)

    def _dist(self):
        if self.kind is PrimaryRvKind.STANDARD_NORMAL:
            return stats.norm()
        if self.kind is PrimaryRvKind.CHI_SQUARED:
            return stats.chi2(self.df)
        return stats.uniform()

    @property
    def support(self) -> tuple[float, float]:
        if self.kind is PrimaryRvKind.STANDARD_NORMAL:
            return (-math.inf, math.inf)
        if self.kind is PrimaryRvKind.CHI_SQUARED:
            return (0.0, math.inf)
        return (0.0, 1.0)

    def pdf(self, g) -> np.ndarray:
        return self._dist().pdf(np.asarray(g, dtype=float))

    def cdf(self, g) -> np.ndarray:
        return self._dist().cdf(np.asarray(g, dtype=float))

    def ppf(self, u) -> np.ndarray:
        return self._dist().ppf(np.asarray(u, dtype=float))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind is PrimaryRvKind.STANDARD_NORMAL:
            return rng.standard_normal(n)
        if self.kind is PrimaryRvKind.CHI_SQUARED:
            return rng.chisquare(self.df, n)
        return rng.random(n)


# ---------------------------------------------------------------------------
# Structural maps and sample containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StructuralMap:
    """Deterministic link between the primary r.v., the parameter and the
    statistic.

    ``forward(gamma, theta)`` produces the statistic value; it consumes no
    randomness itself.  ``inverse_theta(q, gamma)`` returns the parameter
    value (bijective case) or an (lo, hi) interval (set-valued case);
    ``inverse_gamma`` exists only for bijective maps.
    """

    tag: str
    forward: Callable
    inverse_theta: Callable
    inverse_gamma: Callable | None = None


class FiducialArgument(Enum):
    STRONG = "strong"
    MODERATE = "moderate"
    WEAK = "weak"
    CONDITIONED_STRATEGY = "conditioned_strategy"


@dataclass
class SampleBatch:
    """Tagged draws from a fiducial density.

    `values` maps parameter name -> 1-D array; all arrays share one length.
    """

    values: dict[str, np.ndarray]
    seed: int
    chain: int
    argument_used: FiducialArgument
    fingerprint: str

    def __post_init__(self):
        lengths = {len(v) for v in self.values.values()}
        if len(lengths) != 1:
            raise ValueError("all parameter columns must share one length")

    @property
    def n_draws(self) -> int:
        return len(next(iter(self.values.values())))

    def validate(self, domains: dict[str, ParamDomain], n_expected: int | None = None):
        """Enforce domain containment on every column; raises on violation."""
        if n_expected is not None and self.n_draws != n_expected:
            raise ValueError(f"expected {n_expected} draws, have {self.n_draws}")
        for name, dom in domains.items():
            vals = self.values[name]
            ok = dom.contains(vals)
            if not bool(np.all(ok)):
                bad = vals[~ok][:3]
                raise ValueError(f"{name}: draws outside domain, e.g. {bad}")
        return self


__all__ = [
    "FidError", "EmptyDomain", "EmptyInterval", "NonIntegrableLpd",
    "UnboundedGpd", "Condition1Violated", "Condition2Violated",
    "NegligibleAcceptance", "AllZeroCounts", "ConditionalFailure",
    "ZeroWeightMass",
    "ParamDomain", "GpdFunction", "GpdKind", "LpdFunction", "LpdKind",
    "LpdRestricted", "lpd_restricted_sampler", "gpd_eval",
    "PrimaryRvLaw", "PrimaryRvKind", "StructuralMap",
    "FiducialArgument", "SampleBatch",
]
