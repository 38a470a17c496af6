"""Independent reference distributions: conjugate Bayesian posteriors under
uniform / Jeffreys / Perks / flat priors, classical density objects, and
truncated variants.

These are the overlay curves and verification targets; nothing here touches
the fiducial engines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .core import FidError, ZeroWeightMass


class Density:
    """Minimal continuous-density interface: pdf / cdf / ppf / sample."""

    name = "density"

    def pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def ppf(self, u):
        raise NotImplementedError

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.ppf(rng.random(n))


class ScipyDensity(Density):
    def __init__(self, frozen, name: str):
        self._d = frozen
        self.name = name

    def pdf(self, x):
        return self._d.pdf(np.asarray(x, dtype=float))

    def cdf(self, x):
        return self._d.cdf(np.asarray(x, dtype=float))

    def ppf(self, u):
        return self._d.ppf(np.asarray(u, dtype=float))

    def mean(self) -> float:
        return float(self._d.mean())

    def var(self) -> float:
        return float(self._d.var())


def beta_density(a: float, b: float) -> ScipyDensity:
    return ScipyDensity(stats.beta(a, b), f"beta({a:g},{b:g})")


def gamma_density(shape: float, rate: float) -> ScipyDensity:
    return ScipyDensity(stats.gamma(shape, scale=1.0 / rate), f"gamma({shape:g},rate={rate:g})")


def normal_density(mean: float, var: float) -> ScipyDensity:
    return ScipyDensity(stats.norm(mean, math.sqrt(var)), f"normal({mean:g},{var:g})")


def student_t_density(df: float, loc: float, scale: float) -> ScipyDensity:
    return ScipyDensity(stats.t(df, loc=loc, scale=scale), f"t(df={df:g})")


def scaled_inv_chi2_density(df: float, scale_sq: float) -> ScipyDensity:
    """Scaled inverse chi-squared: the law of df*scale_sq / ChiSq(df)."""
    return ScipyDensity(
        stats.invgamma(df / 2.0, scale=df * scale_sq / 2.0),
        f"scaled_inv_chi2(df={df:g},scale={scale_sq:g})",
    )


class TruncatedDensity(Density):
    """Base density renormalized to [lo, hi] via CDF-ratio algebra."""

    def __init__(self, base: Density, lo: float, hi: float):
        self.base = base
        self.lo = float(lo)
        self.hi = float(hi)
        self._c_lo = float(base.cdf(lo)) if math.isfinite(lo) else 0.0
        c_hi = float(base.cdf(hi)) if math.isfinite(hi) else 1.0
        self.mass = c_hi - self._c_lo
        if self.mass <= 0.0:
            raise ZeroWeightMass(f"no base mass on ({lo}, {hi})")
        self.name = f"{base.name}|({lo:g},{hi:g})"

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, self.base.pdf(x) / self.mass, 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        raw = (self.base.cdf(np.clip(x, self.lo, self.hi)) - self._c_lo) / self.mass
        return np.clip(raw, 0.0, 1.0)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        return self.base.ppf(self._c_lo + u * self.mass)


def truncated_density(base: Density, lo: float, hi: float = math.inf) -> TruncatedDensity:
    return TruncatedDensity(base, lo, hi)


class DirichletPosterior:
    """Dirichlet with per-category concentrations; exposes the Beta
    marginals and the exact covariance matrix."""

    def __init__(self, alphas):
        self.alphas = np.asarray(alphas, dtype=float)
        if np.any(self.alphas <= 0):
            raise FidError("Dirichlet concentrations must be positive")
        self.total = float(np.sum(self.alphas))
        self.name = "dirichlet(" + ",".join(f"{a:g}" for a in self.alphas) + ")"

    def marginal(self, i: int) -> ScipyDensity:
        a = self.alphas[i]
        return beta_density(a, self.total - a)

    def mean(self) -> np.ndarray:
        return self.alphas / self.total

    def cov(self) -> np.ndarray:
        a, A = self.alphas, self.total
        m = a / A
        c = -np.outer(m, m) / (A + 1.0)
        np.fill_diagonal(c, m * (1.0 - m) / (A + 1.0))
        return c

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.dirichlet(self.alphas, size=n)


@dataclass(frozen=True)
class NormalFlatPosterior:
    """Flat-prior posterior for normal data: Student-t marginal for the mean
    and scaled inverse chi-squared (n-1 df) marginal for the variance."""

    mu_marginal: ScipyDensity
    sigma2_marginal: ScipyDensity


@dataclass(frozen=True)
class PosteriorSpec:
    """Which conjugate posterior to build.

    model: "binomial" | "poisson" | "multinomial" | "normal"
    prior: "uniform" | "jeffreys" | "perks" | "flat"
    """

    model: str
    prior: str
    n: int | None = None
    x: int | None = None
    exposure: float = 1.0
    counts: tuple[int, ...] | None = None
    data: tuple[float, ...] | None = None


def posterior_density(spec: PosteriorSpec):
    """Resolve a PosteriorSpec to a density object.

    binomial: uniform -> Beta(x+1, n-x+1); jeffreys -> Beta(x+1/2, n-x+1/2).
    poisson:  flat -> Gamma(x+1, exposure); jeffreys -> Gamma(x+1/2, exposure).
    multinomial: symmetric Dirichlet prior added to the counts
                 (jeffreys alpha = 1/2, uniform alpha = 1,
                  perks alpha = 1/(k+1)).
    normal: flat prior -> NormalFlatPosterior.
    """
    m, pr = spec.model, spec.prior
    if m == "binomial":
        if spec.n is None or spec.x is None:
            raise ValueError("binomial posterior needs n and x")
        if pr == "uniform":
            return beta_density(spec.x + 1.0, spec.n - spec.x + 1.0)
        if pr == "jeffreys":
            return beta_density(spec.x + 0.5, spec.n - spec.x + 0.5)
    elif m == "poisson":
        if spec.x is None:
            raise ValueError("poisson posterior needs x")
        if pr == "flat":
            return gamma_density(spec.x + 1.0, spec.exposure)
        if pr == "jeffreys":
            return gamma_density(spec.x + 0.5, spec.exposure)
    elif m == "multinomial":
        if spec.counts is None:
            raise ValueError("multinomial posterior needs counts")
        k_plus_1 = len(spec.counts)
        alpha = {"jeffreys": 0.5, "uniform": 1.0, "perks": 1.0 / k_plus_1}.get(pr)
        if alpha is not None:
            return DirichletPosterior(np.asarray(spec.counts, dtype=float) + alpha)
    elif m == "normal":
        if spec.data is None:
            raise ValueError("normal posterior needs data")
        x = np.asarray(spec.data, dtype=float)
        n = x.size
        if n < 2:
            raise ValueError("normal flat posterior needs n >= 2")
        xbar = float(np.mean(x))
        s2 = float(np.var(x, ddof=1))
        if pr == "flat":
            return NormalFlatPosterior(
                mu_marginal=student_t_density(n - 1, xbar, math.sqrt(s2 / n)),
                sigma2_marginal=scaled_inv_chi2_density(n - 1, s2),
            )
    raise ValueError(f"no conjugate form for model={m!r} prior={pr!r}")


__all__ = [
    "Density", "ScipyDensity", "TruncatedDensity", "truncated_density",
    "beta_density", "gamma_density", "normal_density", "student_t_density",
    "scaled_inv_chi2_density", "DirichletPosterior", "NormalFlatPosterior",
    "PosteriorSpec", "posterior_density",
]
