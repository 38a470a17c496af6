"""The four-step generating algorithm behind the structural equations, and a
validator that checks it reproduces direct sampling from the model.

Step 1 simulates the ancillary complement of the statistic (only the normal
case has one: the centered residual pattern).  Step 2 draws the primary
r.v.; step 3 pushes it through the structural map, which by construction
consumes no further randomness; step 4 completes the data set conditionally
on the statistic and the ancillaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as _sstats

from .models import BinomialProblem, PoissonProblem

_SUPPORTED = ("binomial", "poisson", "normal")


def generate_via_assumption1(model: str, params: dict, rng: np.random.Generator):
    """Generate one data set through the four-step algorithm.

    model/params:
      "binomial": {"n", "p"}        -> integer count of successes
      "poisson":  {"rate", "exposure"(=1)} -> integer event count
      "normal":   {"n", "mu", "sigma"}     -> float vector of n observations
    """
    if model == "binomial":
        n, p = int(params["n"]), float(params["p"])
        gamma = rng.random()                              # step 2
        q = BinomialProblem(n, 0).forward(gamma, p)       # step 3
        return q                                          # step 4: x is q
    if model == "poisson":
        rate = float(params["rate"])
        exposure = float(params.get("exposure", 1.0))
        gamma = rng.random()
        q = PoissonProblem(0, exposure).forward(gamma, rate)
        return q
    if model == "normal":
        n, mu, sigma = int(params["n"]), float(params["mu"]), float(params["sigma"])
        # step 1: ancillary complement of the mean = centered residual pattern
        z = sigma * rng.standard_normal(n)
        resid = z - np.mean(z)
        gamma = rng.standard_normal()                     # step 2
        xbar = mu + sigma / math.sqrt(n) * gamma          # step 3
        return xbar + resid                               # step 4
    raise ValueError(f"unsupported model {model!r} (joint multinomial data "
                     "generation is out of scope)")


def _direct_sample(model: str, params: dict, rng: np.random.Generator):
    if model == "binomial":
        return int(rng.binomial(int(params["n"]), float(params["p"])))
    if model == "poisson":
        m = float(params.get("exposure", 1.0)) * float(params["rate"])
        return int(rng.poisson(m))
    n = int(params["n"])
    return float(params["mu"]) + float(params["sigma"]) * rng.standard_normal(n)


def _statistic(model: str, data) -> float:
    if model == "normal":
        return float(np.mean(data))
    return float(data)


@dataclass(frozen=True)
class ValidationReport:
    model: str
    reps: int
    trials: int
    p_values: tuple[float, ...]
    n_passed: int
    passed: bool


def validate_assumption11(
    model: str, params: dict, reps: int, trials: int = 20, seed: int = 0
) -> ValidationReport:
    """Distributional equivalence of algorithmic vs direct generation.

    Each trial draws `reps` statistics both ways and compares them with a
    two-sample test: chi-squared on the pooled integer support for the
    discrete models, Kolmogorov-Smirnov for the normal mean.  A trial passes
    at p > 1e-3; the report passes when at least 95% of trials do.
    """
    if model not in _SUPPORTED:
        raise ValueError(f"unsupported model {model!r}")
    if reps < 10_000:
        raise ValueError("need reps >= 10^4 for a meaningful comparison")
    p_values = []
    for t in range(trials):
        rng = np.random.default_rng((seed, t))
        algo = np.array([
            _statistic(model, generate_via_assumption1(model, params, rng))
            for _ in range(reps)
        ])
        direct = np.array([
            _statistic(model, _direct_sample(model, params, rng))
            for _ in range(reps)
        ])
        if model == "normal":
            p = float(_sstats.ks_2samp(algo, direct).pvalue)
        else:
            p = _two_sample_chi2_pvalue(algo.astype(int), direct.astype(int))
        p_values.append(p)
    n_passed = sum(p > 1e-3 for p in p_values)
    return ValidationReport(
        model=model, reps=reps, trials=trials,
        p_values=tuple(p_values), n_passed=n_passed,
        passed=n_passed >= math.ceil(0.95 * trials),
    )


def _two_sample_chi2_pvalue(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample chi-squared on pooled integer bins, merging the sparse
    tail so every expected cell count stays at or above 5."""
    top = int(max(a.max(), b.max()))
    ca = np.bincount(a, minlength=top + 1).astype(float)
    cb = np.bincount(b, minlength=top + 1).astype(float)
    merged_a, merged_b = [], []
    acc_a = acc_b = 0.0
    for va, vb in zip(ca, cb):
        acc_a += va
        acc_b += vb
        if acc_a + acc_b >= 10.0:       # expected ~5 per sample per bin
            merged_a.append(acc_a)
            merged_b.append(acc_b)
            acc_a = acc_b = 0.0
    if acc_a + acc_b > 0.0:
        if merged_a:
            merged_a[-1] += acc_a
            merged_b[-1] += acc_b
        else:
            merged_a, merged_b = [acc_a], [acc_b]
    table = np.array([merged_a, merged_b])
    if table.shape[1] < 2:
        return 1.0  # identical degenerate support carries no evidence
    res = _sstats.chi2_contingency(table, correction=False)
    return float(res.pvalue)


__all__ = ["generate_via_assumption1", "validate_assumption11", "ValidationReport"]
