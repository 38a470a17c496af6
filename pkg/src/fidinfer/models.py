"""Concrete sampling models: statistics, primary-r.v. laws, structural maps
and the CDF machinery they need.

Supported models: normal mean (known variance), normal variance (known mean),
binomial proportion, Poisson rate (with an exposure multiplier), and the
multinomial conditional slots used by the Gibbs engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .core import (
    AllZeroCounts,
    ParamDomain,
    PrimaryRvLaw,
    StructuralMap,
)

# Above this count the summed CDFs switch to incomplete beta/gamma identities.
_SUM_LIMIT = 10_000

# Parameter tolerance well below the 1e-10 contract so that plugging an
# endpoint back into the CDF also lands within 1e-10 of the target.
_BISECT_TOL = 1e-13
_BISECT_MAXITER = 200


# ---------------------------------------------------------------------------
# CDFs
# ---------------------------------------------------------------------------

def binomial_cdf(z: int, n: int, p: float) -> float:
    """P(Y <= z) for Y ~ Binomial(n, p).

    Upward log-space summation for n <= 10^4, the regularized incomplete
    beta identity beyond.  By convention z = -1 gives 0.
    """
    if not 0 <= p <= 1:
        raise ValueError(f"p={p} outside [0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    if z < 0:
        return 0.0
    if z >= n:
        return 1.0
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 0.0
    if n > _SUM_LIMIT:
        return float(special.betainc(n - z, z + 1, 1.0 - p))
    lp, lq = math.log(p), math.log1p(-p)
    lgn = math.lgamma(n + 1)
    total = 0.0
    for y in range(z + 1):
        total += math.exp(
            lgn - math.lgamma(y + 1) - math.lgamma(n - y + 1) + y * lp + (n - y) * lq
        )
    return min(total, 1.0)


def poisson_cdf(z: int, m: float) -> float:
    """P(Y <= z) for Y ~ Poisson(m); z = -1 gives 0."""
    if m <= 0:
        raise ValueError("mean must be positive")
    if z < 0:
        return 0.0
    if z > _SUM_LIMIT:
        return float(special.gammaincc(z + 1, m))
    lm = math.log(m)
    total = 0.0
    for y in range(z + 1):
        total += math.exp(-m + y * lm - math.lgamma(y + 1))
    return min(total, 1.0)


def _bisect_decreasing(f, target: float, lo: float, hi: float) -> float:
    """Root of f(x) = target for f strictly decreasing on [lo, hi]."""
    for _ in range(_BISECT_MAXITER):
        mid = 0.5 * (lo + hi)
        if f(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < _BISECT_TOL:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Post-data parameter sets for the discrete models
# ---------------------------------------------------------------------------

def binomial_theta_set(gamma: float, n: int, x: int) -> tuple[float, float]:
    """The interval of p values consistent with primary value `gamma`.

    {p : F(x-1; n, p) <= gamma < F(x; n, p)} = [p_lo, p_hi), with F strictly
    decreasing in p.  p_lo = 0 when x = 0 and p_hi = 1 when x = n; otherwise
    both endpoints come from monotone bisection against the CDF.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma={gamma} outside (0, 1)")
    if not 0 <= x <= n:
        raise ValueError("need 0 <= x <= n")
    p_lo = 0.0 if x == 0 else _bisect_decreasing(
        lambda p: binomial_cdf(x - 1, n, p), gamma, 0.0, 1.0
    )
    p_hi = 1.0 if x == n else _bisect_decreasing(
        lambda p: binomial_cdf(x, n, p), gamma, 0.0, 1.0
    )
    return p_lo, p_hi


def binomial_theta_sets(gammas: np.ndarray, n: int, x: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized `binomial_theta_set` via the incomplete-beta quantile.

    F(z; n, p) = I_{1-p}(n-z, z+1), so each endpoint is one betaincinv call.
    """
    g = np.asarray(gammas, dtype=float)
    if x == 0:
        p_lo = np.zeros(g.shape)
    else:
        p_lo = 1.0 - special.betaincinv(n - x + 1, x, g)
    if x == n:
        p_hi = np.ones(g.shape)
    else:
        p_hi = 1.0 - special.betaincinv(n - x, x + 1, g)
    return p_lo, p_hi


def poisson_theta_set(gamma: float, x: int, exposure: float = 1.0) -> tuple[float, float]:
    """The interval of rate values consistent with `gamma`, in rate units.

    The machinery solves in mean units m = exposure * rate and divides by
    the exposure.  Bracketing starts at m = x + 1 and doubles until the CDF
    falls below gamma; both endpoints are finite for every x >= 0.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma={gamma} outside (0, 1)")
    if x < 0:
        raise ValueError("count must be >= 0")
    if exposure <= 0:
        raise ValueError("exposure must be positive")

    def solve(z: int) -> float:
        hi = float(x + 1)
        while poisson_cdf(z, hi) > gamma:
            hi *= 2.0
        return _bisect_decreasing(lambda m: poisson_cdf(z, m), gamma, 0.0, hi)

    m_lo = 0.0 if x == 0 else solve(x - 1)
    m_hi = solve(x)
    return m_lo / exposure, m_hi / exposure


def poisson_theta_sets(gammas: np.ndarray, x: int, exposure: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized `poisson_theta_set`: F(z; m) = Q(z+1, m) inverts to
    gammainccinv."""
    g = np.asarray(gammas, dtype=float)
    if x == 0:
        m_lo = np.zeros(g.shape)
    else:
        m_lo = special.gammainccinv(x, g)
    m_hi = special.gammainccinv(x + 1, g)
    return m_lo / exposure, m_hi / exposure


# ---------------------------------------------------------------------------
# Bijective maps for the normal cases
# ---------------------------------------------------------------------------

def normal_mean_map(gamma: float, mu: float, sigma2: float, n: int) -> float:
    """Forward map: sample mean generated from (gamma, mu)."""
    if sigma2 <= 0 or n < 1:
        raise ValueError("need sigma2 > 0 and n >= 1")
    return mu + math.sqrt(sigma2 / n) * gamma


def normal_mean_inverse(q: float, gamma: float, sigma2: float, n: int) -> float:
    """Mean recovered from an observed sample mean q at primary value gamma."""
    return q - math.sqrt(sigma2 / n) * gamma


def normal_variance_map(gamma: float, sigma2: float, n: int) -> float:
    """Forward map: mean squared deviation generated from (gamma, sigma2)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive (chi-squared support)")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    return (sigma2 / n) * gamma


def normal_variance_inverse(q: float, gamma: float, n: int) -> float:
    if gamma <= 0:
        raise ValueError("gamma must be positive (chi-squared support)")
    return n * q / gamma


# ---------------------------------------------------------------------------
# Problem containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalMeanProblem:
    """Normal data with known variance; the statistic is the sample mean."""

    data: np.ndarray
    sigma2: float
    param_name: str = "mu"

    def __post_init__(self):
        object.__setattr__(self, "data", np.atleast_1d(np.asarray(self.data, dtype=float)))
        if self.data.size < 1:
            raise ValueError("need n >= 1 observations")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")

    @property
    def n(self) -> int:
        return self.data.size

    @property
    def xbar(self) -> float:
        return float(np.mean(self.data))

    @property
    def scale(self) -> float:
        """sigma / sqrt(n), the coefficient on the primary r.v."""
        return math.sqrt(self.sigma2 / self.n)

    def statistic(self) -> float:
        return self.xbar

    def pi0(self) -> PrimaryRvLaw:
        return PrimaryRvLaw.standard_normal()

    def natural_domain(self) -> ParamDomain:
        return ParamDomain.real_line()

    # monotone decreasing in gamma
    def theta_of_gamma(self, gamma):
        return self.xbar - self.scale * np.asarray(gamma, dtype=float)

    def gamma_of_theta(self, theta):
        return (self.xbar - np.asarray(theta, dtype=float)) / self.scale

    def dgamma_dtheta(self, theta):
        return np.full(np.shape(np.asarray(theta)), 1.0 / self.scale)

    def structural_map(self) -> StructuralMap:
        return StructuralMap(
            tag="normal_mean",
            forward=lambda g, mu: normal_mean_map(g, mu, self.sigma2, self.n),
            inverse_theta=lambda q, g: normal_mean_inverse(q, g, self.sigma2, self.n),
            inverse_gamma=lambda q, mu: (q - mu) / self.scale,
        )

    def fingerprint(self) -> str:
        return f"normal_mean(n={self.n},xbar={self.xbar:.12g},sigma2={self.sigma2:g})"


@dataclass(frozen=True)
class NormalVarianceProblem:
    """Normal data with known mean; the statistic is the mean squared
    deviation about it and the primary r.v. is chi-squared with n df."""

    data: np.ndarray
    mu: float
    param_name: str = "sigma2"

    def __post_init__(self):
        object.__setattr__(self, "data", np.atleast_1d(np.asarray(self.data, dtype=float)))
        if self.data.size < 1:
            raise ValueError("need n >= 1 observations")

    @property
    def n(self) -> int:
        return self.data.size

    @property
    def sigma2_hat(self) -> float:
        return float(np.mean((self.data - self.mu) ** 2))

    def statistic(self) -> float:
        return self.sigma2_hat

    def pi0(self) -> PrimaryRvLaw:
        return PrimaryRvLaw.chi_squared(self.n)

    def natural_domain(self) -> ParamDomain:
        return ParamDomain.half_line(0.0)

    # decreasing on (0, inf)
    def theta_of_gamma(self, gamma):
        return self.n * self.sigma2_hat / np.asarray(gamma, dtype=float)

    def gamma_of_theta(self, theta):
        return self.n * self.sigma2_hat / np.asarray(theta, dtype=float)

    def dgamma_dtheta(self, theta):
        t = np.asarray(theta, dtype=float)
        return self.n * self.sigma2_hat / t**2

    def structural_map(self) -> StructuralMap:
        return StructuralMap(
            tag="normal_variance",
            forward=lambda g, s2: normal_variance_map(g, s2, self.n),
            inverse_theta=lambda q, g: normal_variance_inverse(q, g, self.n),
            inverse_gamma=lambda q, s2: self.n * q / s2,
        )

    def fingerprint(self) -> str:
        return f"normal_variance(n={self.n},s2hat={self.sigma2_hat:.12g},mu={self.mu:g})"


@dataclass(frozen=True)
class BinomialProblem:
    """x successes out of n trials; the statistic is x itself and the
    primary r.v. is uniform on (0, 1)."""

    n: int
    x: int
    param_name: str = "p"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need n >= 1 trials")
        if not 0 <= self.x <= self.n:
            raise ValueError("need 0 <= x <= n")

    def statistic(self) -> int:
        return self.x

    def pi0(self) -> PrimaryRvLaw:
        return PrimaryRvLaw.uniform_unit()

    def natural_domain(self) -> ParamDomain:
        return ParamDomain.unit()

    def forward(self, gamma: float, p: float) -> int:
        """Smallest z whose CDF at p strictly exceeds gamma."""
        cum = 0.0
        lp = math.log(p) if p > 0 else -math.inf
        lq = math.log1p(-p) if p < 1 else -math.inf
        lgn = math.lgamma(self.n + 1)
        for z in range(self.n + 1):
            if p == 0.0:
                term = 1.0 if z == 0 else 0.0
            elif p == 1.0:
                term = 1.0 if z == self.n else 0.0
            else:
                term = math.exp(
                    lgn - math.lgamma(z + 1) - math.lgamma(self.n - z + 1)
                    + z * lp + (self.n - z) * lq
                )
            cum += term
            if gamma < cum:
                return z
        return self.n

    def theta_set(self, gamma: float) -> tuple[float, float]:
        return binomial_theta_set(gamma, self.n, self.x)

    def theta_sets(self, gammas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return binomial_theta_sets(gammas, self.n, self.x)

    def structural_map(self) -> StructuralMap:
        return StructuralMap(
            tag="binomial",
            forward=self.forward,
            inverse_theta=lambda q, g: binomial_theta_set(g, self.n, q),
        )

    def fingerprint(self) -> str:
        return f"binomial(n={self.n},x={self.x})"


@dataclass(frozen=True)
class PoissonProblem:
    """A single count with an exposure multiplier: the modeled Poisson mean
    is exposure * rate, and inference targets the rate."""

    x: int
    exposure: float = 1.0
    param_name: str = "tau"

    def __post_init__(self):
        if self.x < 0:
            raise ValueError("count must be >= 0")
        if self.exposure <= 0:
            raise ValueError("exposure must be positive")

    def statistic(self) -> int:
        return self.x

    def pi0(self) -> PrimaryRvLaw:
        return PrimaryRvLaw.uniform_unit()

    def natural_domain(self) -> ParamDomain:
        return ParamDomain.half_line(0.0)

    def forward(self, gamma: float, rate: float) -> int:
        m = self.exposure * rate
        if m <= 0:
            raise ValueError("rate must be positive")
        cum = 0.0
        lm = math.log(m)
        z = 0
        while True:
            cum += math.exp(-m + z * lm - math.lgamma(z + 1))
            if gamma < cum:
                return z
            z += 1

    def theta_set(self, gamma: float) -> tuple[float, float]:
        return poisson_theta_set(gamma, self.x, self.exposure)

    def theta_sets(self, gammas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return poisson_theta_sets(gammas, self.x, self.exposure)

    def structural_map(self) -> StructuralMap:
        return StructuralMap(
            tag="poisson",
            forward=self.forward,
            inverse_theta=lambda q, g: poisson_theta_set(g, q, self.exposure),
        )

    def fingerprint(self) -> str:
        return f"poisson(x={self.x},exposure={self.exposure:g})"


@dataclass(frozen=True)
class MultinomialProblem:
    """Counts over k+1 categories; parameters are p_1..p_k with the last
    proportion determined by the simplex constraint.

    The conditional inference for slot j reduces to a binomial problem for
    the ratio r_j = p_j / (p_j + p_last), with x_j successes out of
    x_j + x_last trials (the sum being ancillary).
    """

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if any(c < 0 for c in counts):
            raise ValueError("counts must be non-negative")
        if sum(counts) < 1:
            raise AllZeroCounts("all counts are zero")
        if len(counts) < 2:
            raise ValueError("need at least two categories")

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def k(self) -> int:
        """Number of free proportions."""
        return len(self.counts) - 1

    def conditional_binomial(self, j: int) -> BinomialProblem:
        """Binomial problem governing r_j = p_j / (p_j + p_last)."""
        if not 0 <= j < self.k:
            raise ValueError(f"slot {j} outside 0..{self.k - 1}")
        return BinomialProblem(n=self.counts[j] + self.counts[-1], x=self.counts[j])

    def param_names(self) -> list[str]:
        return [f"p{i + 1}" for i in range(self.k + 1)]

    def fingerprint(self) -> str:
        return f"multinomial(counts={','.join(str(c) for c in self.counts)})"


__all__ = [
    "binomial_cdf", "poisson_cdf",
    "binomial_theta_set", "binomial_theta_sets",
    "poisson_theta_set", "poisson_theta_sets",
    "normal_mean_map", "normal_mean_inverse",
    "normal_variance_map", "normal_variance_inverse",
    "NormalMeanProblem", "NormalVarianceProblem",
    "BinomialProblem", "PoissonProblem", "MultinomialProblem",
]
