"""Command-line surface: every built-in analysis exports a payload directory
holding samples.csv, summary.json and overlay_*.csv curves on 512-point
grids.  No plotting happens here; renderers consume the payloads.

Exit codes: 0 ok, 2 validation failure, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    AllZeroCounts,
    Condition1Violated,
    Condition2Violated,
    EmptyDomain,
    EmptyInterval,
    FidError,
    GpdFunction,
    LpdFunction,
    ParamDomain,
)
from .datagen import validate_assumption11
from .diagnostics import hist_bins, ks_one_sample, mcse
from .models import BinomialProblem, NormalMeanProblem, PoissonProblem
from .multivariate import (
    GibbsConfig,
    ScanOrder,
    gibbs_run,
    invert_permutation,
    multinomial_conditionals,
    multinomial_reparam_guard,
)
from .oracle import (
    PosteriorSpec,
    beta_density,
    gamma_density,
    posterior_density,
    student_t_density,
    truncated_density,
)
from .principle1 import fiducial_density_p1
from .principle2 import P2Problem, density_p2_grid, sample_p2
from .restricted import (
    BoundedNormalProblem,
    SignalNoiseProblem,
    bounded_normal_density,
    signal_noise_joint_sampler,
)

_QUANTS = (1, 2.5, 5, 25, 50, 75, 95, 97.5, 99)
_GRID_POINTS = 512

_VALIDATION_ERRORS = (
    Condition1Violated, Condition2Violated, AllZeroCounts,
    EmptyDomain, EmptyInterval, ValueError,
)


def _lpd_from_flag(name: str, model: str) -> LpdFunction:
    if name == "uniform":
        return LpdFunction.uniform()
    if name == "jeffreys-shape":
        return (LpdFunction.recip_sqrt_bernoulli() if model == "binomial"
                else LpdFunction.recip_sqrt())
    raise ValueError(f"unknown LPD {name!r}")


_PIECE_RE = re.compile(r"^([0-9.eE+-]+)@\((-?[0-9.eE+-]+|-inf),(-?[0-9.eE+-]+|inf)\)$")


def parse_gpd(text: str) -> GpdFunction:
    """Parse the CLI weight grammar.

    `neutral` or `neutral:(LO,HI)` for flat weights; step functions as
    height@(lo,hi) pieces joined by commas and covering a contiguous range,
    e.g.  step:1@(-inf,0),2@(0,inf)
    """
    if text == "neutral":
        return GpdFunction.neutral()
    m = re.match(r"^neutral:\((-?[0-9.eE+-]+|-inf),(-?[0-9.eE+-]+|inf)\)$", text)
    if m:
        return GpdFunction.neutral(ParamDomain.interval(float(m.group(1)), float(m.group(2))))
    if not text.startswith("step:"):
        raise ValueError(f"cannot parse GPD spec {text!r}")
    pieces = []
    for chunk in re.findall(r"[^,@]+@\([^)]*\)", text[5:]):
        m = _PIECE_RE.match(chunk)
        if not m:
            raise ValueError(f"bad step piece {chunk!r}")
        pieces.append((float(m.group(2)), float(m.group(3)), float(m.group(1))))
    if not pieces:
        raise ValueError(f"no step pieces in {text!r}")
    pieces.sort()
    for (_, hi1, _), (lo2, _, _) in zip(pieces, pieces[1:]):
        if hi1 != lo2:
            raise ValueError("step pieces must be contiguous")
    breakpoints = [lo for lo, _, _ in pieces[1:]]
    heights = [h for _, _, h in pieces]
    lo, hi = pieces[0][0], pieces[-1][1]
    domain = None if (lo == -math.inf and hi == math.inf) else ParamDomain.interval(lo, hi)
    if not breakpoints:
        return GpdFunction.neutral(domain)
    return GpdFunction.step(breakpoints, heights, domain)


# ---------------------------------------------------------------------------
# Payload writing
# ---------------------------------------------------------------------------

def _param_summary(vals: np.ndarray, rhat: float | None = None) -> dict:
    out = {
        "mean": float(np.mean(vals)),
        "mcse": float(mcse(vals)),
        "quantiles": {str(q): float(np.percentile(vals, q)) for q in _QUANTS},
    }
    out["rhat"] = rhat
    return out


def write_payload(
    out_dir: Path,
    command: str,
    seed: int,
    columns: dict[str, np.ndarray],
    argument_used: str,
    overlays: list[dict],
    diagnostics_info: dict,
    bins: int,
    rhats: dict[str, float] | None = None,
) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    names = list(columns.keys())
    mat = np.column_stack([columns[n] for n in names])
    np.savetxt(out_dir / "samples.csv", mat, delimiter=",", fmt="%.17g",
               header=",".join(names), comments="")
    hist = {}
    for n in names:
        edges, heights = hist_bins(columns[n], bins)
        hist[n] = {"edges": edges.tolist(), "heights": heights.tolist()}
    summary = {
        "version": __version__,
        "command": command,
        "seed": seed,
        "n_draws": int(mat.shape[0]),
        "argument_used": argument_used,
        "params": {
            n: _param_summary(columns[n], (rhats or {}).get(n)) for n in names
        },
        "hist": hist,
        "overlays": overlays,
        "diagnostics": diagnostics_info,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary


def _write_overlay(out_dir: Path, fname: str, grid: np.ndarray, density: np.ndarray):
    np.savetxt(out_dir / fname, np.column_stack([grid, density]),
               delimiter=",", fmt="%.12g", header="x,density", comments="")


def _overlay_entry(out_dir, param, name, style, density, lo, hi) -> dict:
    grid = np.linspace(lo, hi, _GRID_POINTS)
    fname = f"overlay_{param}_{name}.csv"
    _write_overlay(out_dir, fname, grid, np.asarray(density.pdf(grid)))
    return {"param": param, "name": name, "style": style, "file": fname}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_binomial(args) -> int:
    prob = BinomialProblem(args.n, args.x)
    lpd = _lpd_from_flag(args.lpd, "binomial")
    p2 = P2Problem(prob, GpdFunction.neutral(), lpd)
    batch = sample_p2(p2, args.draws, args.seed, workers=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    overlays = [
        _overlay_entry(out, "p", "posterior_uniform", "dashed",
                       beta_density(args.x + 1.0, args.n - args.x + 1.0), 0.0, 1.0),
        _overlay_entry(out, "p", "posterior_jeffreys", "solid",
                       beta_density(args.x + 0.5, args.n - args.x + 0.5), 0.0, 1.0),
    ]
    write_payload(out, "binomial", args.seed, batch.values,
                  batch.argument_used.value, overlays,
                  {"lpd": lpd.name, "model": prob.fingerprint()}, args.bins)
    return 0


def _cmd_poisson(args) -> int:
    prob = PoissonProblem(args.x, args.exposure)
    lpd = _lpd_from_flag(args.lpd, "poisson")
    p2 = P2Problem(prob, GpdFunction.neutral(), lpd)
    batch = sample_p2(p2, args.draws, args.seed, workers=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    flat = gamma_density(args.x + 1.0, args.exposure)
    jef = gamma_density(args.x + 0.5, args.exposure)
    hi = float(flat.ppf(0.9999))
    overlays = [
        _overlay_entry(out, "tau", "posterior_flat", "dashed", flat, 1e-9, hi),
        _overlay_entry(out, "tau", "posterior_jeffreys", "solid", jef, 1e-9, hi),
    ]
    write_payload(out, "poisson", args.seed, batch.values,
                  batch.argument_used.value, overlays,
                  {"lpd": lpd.name, "model": prob.fingerprint()}, args.bins)
    return 0


def _cmd_multinomial(args) -> int:
    counts = tuple(int(c) for c in args.counts.split(","))
    permuted, perm = multinomial_reparam_guard(counts)
    lpd = _lpd_from_flag(args.lpd, "binomial")
    fcs = multinomial_conditionals(permuted, lpd)
    cfg = GibbsConfig(draws=args.draws, chains=args.chains, burn_in=args.burnin,
                      scan=ScanOrder(args.scan), seed=args.seed)
    result = gibbs_run(fcs, cfg)
    names = [f"p{i + 1}" for i in range(len(counts))]
    pooled = {n: result.pooled(n) for n in names}
    columns = invert_permutation(perm, pooled, names)
    rhats = invert_permutation(perm, {n: result.stats[n].rhat for n in names}, names)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    overlays = []
    for prior, style in (("jeffreys", "solid"), ("uniform", "dashed"), ("perks", "dotted")):
        post = posterior_density(PosteriorSpec(model="multinomial", prior=prior, counts=counts))
        for i, n in enumerate(names):
            overlays.append(_overlay_entry(out, n, f"posterior_{prior}", style,
                                           post.marginal(i), 0.0, 1.0))
    diag = {
        "rhat": {k: float(v) for k, v in rhats.items()},
        "converged": result.converged,
        "permutation": list(perm),
        "scan": cfg.scan.value,
        "burn_in": cfg.burn_in,
        "chains": cfg.chains,
    }
    write_payload(out, "multinomial", args.seed, columns, "strong",
                  overlays, diag, args.bins, rhats=rhats)
    return 0


def _read_data_file(path: str) -> np.ndarray:
    tokens = re.split(r"[,\s]+", Path(path).read_text().strip())
    vals = [float(t) for t in tokens if t]
    if not vals:
        raise ValueError(f"no numeric data in {path}")
    return np.asarray(vals)


def _cmd_normal(args) -> int:
    data = _read_data_file(args.data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n = data.size
    xbar = float(np.mean(data))

    if args.gpd is not None:
        if args.sigma2 is None:
            raise ValueError("--gpd needs a known variance (--sigma2)")
        gpd = parse_gpd(args.gpd)
        dens = fiducial_density_p1(NormalMeanProblem(data, args.sigma2), gpd)
        rng = np.random.default_rng(args.seed)
        batch = dens.sample(args.draws, rng)
        lo = xbar - 6 * math.sqrt(args.sigma2 / n)
        hi = xbar + 6 * math.sqrt(args.sigma2 / n)
        grid = np.linspace(lo, hi, _GRID_POINTS)
        _write_overlay(out, "overlay_mu_weighted.csv", grid, dens.pdf(grid))
        overlays = [{"param": "mu", "name": "weighted_normal", "style": "solid",
                     "file": "overlay_mu_weighted.csv"}]
        write_payload(out, "normal", args.seed, batch.values,
                      batch.argument_used.value, overlays,
                      {"gpd": args.gpd, "sigma2": args.sigma2}, args.bins)
        return 0

    if args.sigma2 is not None:
        # known variance: strong case, or moderate when bounded below
        rng = np.random.default_rng(args.seed)
        if args.mu0 is None:
            dens = fiducial_density_p1(NormalMeanProblem(data, args.sigma2),
                                       GpdFunction.neutral())
            argument = dens.argument.value
            columns = dens.sample(args.draws, rng).values
        else:
            dens = bounded_normal_density(
                BoundedNormalProblem(data, mu0=args.mu0, sigma2=args.sigma2))
            argument = "moderate"
            columns = {"mu": dens.sample(args.draws, rng)}
        lo = float(np.min(columns["mu"]))
        hi = float(np.max(columns["mu"]))
        grid = np.linspace(lo, hi, _GRID_POINTS)
        _write_overlay(out, "overlay_mu_fiducial.csv", grid, dens.pdf(grid))
        overlays = [{"param": "mu", "name": "fiducial_exact", "style": "solid",
                     "file": "overlay_mu_fiducial.csv"}]
        write_payload(out, "normal", args.seed, columns, argument, overlays,
                      {"sigma2": args.sigma2, "mu0": args.mu0}, args.bins)
        return 0

    # unknown variance: joint Gibbs, optionally bounded below
    if args.mu0 is None:
        from .multivariate import normal_joint_conditionals

        fcs = normal_joint_conditionals(data)
        argument = "strong"
    else:
        gibbs = bounded_normal_density(BoundedNormalProblem(data, mu0=args.mu0))
        fcs = gibbs.fcs
        argument = "moderate"
    cfg = GibbsConfig(draws=args.draws, chains=args.chains, burn_in=args.burnin,
                      scan=ScanOrder(args.scan), seed=args.seed)
    result = gibbs_run(fcs, cfg)
    columns = {n: result.pooled(n) for n in result.param_names()}
    s = float(np.std(data, ddof=1))
    t_marg = student_t_density(n - 1, xbar, s / math.sqrt(n))
    if args.mu0 is not None:
        t_marg = truncated_density(t_marg, args.mu0, math.inf)
    lo = float(np.min(columns["mu"]))
    hi = float(np.max(columns["mu"]))
    grid = np.linspace(lo, hi, _GRID_POINTS)
    _write_overlay(out, "overlay_mu_t.csv", grid, np.asarray(t_marg.pdf(grid)))
    overlays = [{"param": "mu", "name": "t_marginal", "style": "dashed",
                 "file": "overlay_mu_t.csv"}]
    rhats = {k: result.stats[k].rhat for k in result.stats}
    diag = {"rhat": {k: float(v) for k, v in rhats.items()},
            "converged": result.converged, "mu0": args.mu0,
            "burn_in": cfg.burn_in, "chains": cfg.chains}
    write_payload(out, "normal", args.seed, columns, argument, overlays, diag,
                  args.bins, rhats=rhats)
    return 0


def _cmd_signal_noise(args) -> int:
    lpd = _lpd_from_flag(args.lpd, "poisson")
    problem = SignalNoiseProblem(x0=args.x0, x=args.x, alpha=args.alpha, lpd=lpd)
    batch = signal_noise_joint_sampler(problem, args.draws, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    jef = gamma_density(args.x + 0.5, 1.0)
    hi = float(jef.ppf(0.9999))
    mle_tau0 = args.x0 / args.alpha
    overlays = [
        _overlay_entry(out, "tau", "posterior_jeffreys", "solid", jef, 1e-9, hi),
        _overlay_entry(out, "tau", "posterior_jeffreys_truncated", "dashed",
                       truncated_density(jef, mle_tau0, math.inf), 1e-9, hi),
    ]
    write_payload(out, "signal-noise", args.seed, batch.values,
                  batch.argument_used.value, overlays,
                  {"alpha": args.alpha, "x0": args.x0, "x": args.x,
                   "tau0_mle": mle_tau0, "lpd": lpd.name}, args.bins)
    return 0


def _cmd_datagen_check(args) -> int:
    params = {
        "binomial": {"n": args.n, "p": args.p},
        "poisson": {"rate": args.rate, "exposure": args.exposure},
        "normal": {"n": args.n, "mu": args.mu, "sigma": args.sigma},
    }[args.model]
    report = validate_assumption11(args.model, params, reps=args.reps,
                                   trials=args.trials, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "version": __version__, "command": "datagen-check",
        "model": report.model, "reps": report.reps, "trials": report.trials,
        "p_values": list(report.p_values), "n_passed": report.n_passed,
        "passed": report.passed,
    }
    (out / "datagen_report.json").write_text(json.dumps(payload, indent=2))
    print(json.dumps(payload))
    return 0 if report.passed else 2


def _cmd_oracle_check(args) -> int:
    checks = {}
    cases = {
        "binomial": (BinomialProblem(10, 1), np.linspace(1e-6, 1 - 1e-6, 4096)),
        "poisson": (PoissonProblem(2), np.linspace(1e-9, 30.0, 4096)),
    }
    for name, (prob, grid) in cases.items():
        p2 = P2Problem(prob, GpdFunction.neutral(), LpdFunction.uniform())
        batch = sample_p2(p2, args.draws, args.seed)
        orc = density_p2_grid(p2, grid, 2000)
        ks = ks_one_sample(batch.values[prob.param_name], orc.cdf)
        checks[name] = {
            "ks": float(ks),
            "normalization": float(orc.normalization()),
            "pass": bool(ks < 0.01),
        }
    payload = {"version": __version__, "command": "oracle-check",
               "draws": args.draws, "seed": args.seed, "checks": checks}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "oracle_check.json").write_text(json.dumps(payload, indent=2))
    print(json.dumps(payload))
    return 0 if all(c["pass"] for c in checks.values()) else 2


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fidinfer",
        description="Fiducial sampling payloads (samples.csv + summary.json + overlay curves).",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, gibbs=False):
        p.add_argument("--draws", type=int, default=100_000,
                       help="kept draws (per chain for Gibbs commands)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True, help="payload output directory")
        p.add_argument("--bins", type=int, default=60, help="histogram bins")
        if gibbs:
            p.add_argument("--chains", type=int, default=4)
            p.add_argument("--burnin", type=int, default=500)
            p.add_argument("--scan", choices=["fixed", "random"], default="fixed")
        else:
            p.add_argument("--threads", type=int, default=1,
                           help="worker shards for the vectorized samplers")

    p = sub.add_parser("binomial", help="proportion from x successes in n trials")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--lpd", choices=["uniform", "jeffreys-shape"], default="uniform")
    common(p)
    p.set_defaults(fn=_cmd_binomial)

    p = sub.add_parser("poisson", help="event rate from a single count")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--exposure", type=float, default=1.0)
    p.add_argument("--lpd", choices=["uniform", "jeffreys-shape"], default="uniform")
    common(p)
    p.set_defaults(fn=_cmd_poisson)

    p = sub.add_parser("multinomial", help="joint proportions via Gibbs")
    p.add_argument("--counts", required=True, help="comma list, e.g. 0,1,2,3,4")
    p.add_argument("--lpd", choices=["uniform", "jeffreys-shape"], default="uniform")
    common(p, gibbs=True)
    p.set_defaults(fn=_cmd_multinomial)

    p = sub.add_parser("normal", help="normal mean/variance analyses")
    p.add_argument("--data", required=True, help="file of numbers (csv or whitespace)")
    p.add_argument("--sigma2", type=float, default=None, help="treat variance as known")
    p.add_argument("--mu0", type=float, default=None, help="lower bound on the mean")
    p.add_argument("--gpd", default=None,
                   help="weight grammar: neutral | neutral:(LO,HI) | "
                        "step:H@(LO,HI),H@(LO,HI),...  e.g. step:1@(-inf,0),2@(0,inf)")
    common(p, gibbs=True)
    p.set_defaults(fn=_cmd_normal)

    p = sub.add_parser("signal-noise", help="background + signal Poisson rates")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--x0", type=int, required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--lpd", choices=["uniform", "jeffreys-shape"], default="uniform")
    common(p)
    p.set_defaults(fn=_cmd_signal_noise)

    p = sub.add_parser("datagen-check", help="generating-algorithm validation")
    p.add_argument("--model", choices=["binomial", "poisson", "normal"], required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--p", type=float, default=0.3)
    p.add_argument("--rate", type=float, default=2.0)
    p.add_argument("--exposure", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_datagen_check)

    p = sub.add_parser("oracle-check", help="sampler vs grid-oracle equivalence")
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_oracle_check)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _VALIDATION_ERRORS as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 2
    except (FidError, FloatingPointError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 3


if __name__ == "__main__":
    sys.exit(main())
