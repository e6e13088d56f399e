"""Command-line interface: ``armacap {capacity,sweep,simulate,verify}``.

Exit codes: 0 success, 1 failed verification, 2 invalid parameters or sweep
file, 3 strategy fails the structural checks.
"""

import argparse
import json
import math
import sys

from .arma_model import make_channel
from .capacity import (
    Region,
    feedback_capacity,
    kappa_min,
    nonfeedback_lower_bound,
    rate_functional,
    regime_classify,
)
from .errors import InvalidParams, StructuralCheckFailed
from .riccati import Strategy, solve_are
from .simulate import error_stability_check, innovation_whiteness, run_coding_scheme, whiteness_band
from .sweep import load_sweep, render_csv

LN2 = math.log(2.0)


def to_json(obj):
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _spec_from(args):
    return make_channel(args.a, args.c, args.kw, args.kappa, args.s1)


def capacity_report(spec):
    res = feedback_capacity(spec)
    region = regime_classify(spec)
    kmin = kappa_min(spec) if region is not Region.OUTSIDE else None
    return {
        "a": spec.a,
        "c": spec.c,
        "kw": spec.k_w,
        "kappa": spec.kappa,
        "region": str(region),
        "regime": str(res.regime),
        "rate_nats": res.rate,
        "rate_bits": res.rate / LN2,
        "lambda": res.strategy.lam if res.strategy else None,
        "k_z": res.strategy.k_z if res.strategy else None,
        "k_inf": res.k_inf,
        "kappa_min": kmin,
        "are_residual": res.are_residual,
        "nonfeedback_rate_nats": nonfeedback_lower_bound(spec).rate,
    }


def simulate_report(spec, strat, n, seed, max_lag=5):
    """Run the scheme and summarise it; ``strat=None`` uses the optimum."""
    source = "explicit"
    if strat is None:
        res = feedback_capacity(spec)
        strat, source = res.strategy, f"closed-form ({res.regime})"
    trace = run_coding_scheme(spec, strat, n, seed)
    sol = solve_are(spec, strat)
    steady = rate_functional(spec, strat, sol.k_inf)
    lags = innovation_whiteness(trace, max_lag)
    return {
        "a": spec.a,
        "c": spec.c,
        "kw": spec.k_w,
        "kappa": spec.kappa,
        "n": n,
        "seed": seed,
        "strategy_source": source,
        "lambda": strat.lam,
        "k_z": strat.k_z,
        "k_inf": sol.k_inf,
        "analytic_rate": steady,
        "analytic_rate_finite_n": trace.analytic_rate,
        "empirical_rate": trace.empirical_rate,
        "empirical_rate_stderr": trace.rate_stderr,
        "rate_relative_gap": abs(trace.empirical_rate - steady) / steady if steady > 0 else None,
        "empirical_power": trace.empirical_power,
        "empirical_power_stderr": trace.power_stderr,
        "whiteness_lags": [float(x) for x in lags],
        "whiteness_band": whiteness_band(trace),
        "error_stable": error_stability_check(trace),
        "coordinates": trace.coordinates,
    }


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_capacity(args):
    rep = capacity_report(_spec_from(args))
    if args.format == "json":
        _emit(to_json(rep), args.out)
        return 0
    unit = "bits" if args.bits else "nats"
    rate = rep["rate_bits"] if args.bits else rep["rate_nats"]
    lines = [
        f"region        {rep['region']}",
        f"regime        {rep['regime']}",
        f"rate          {rate!r} {unit}",
        f"lambda        {rep['lambda']!r}",
        f"k_z           {rep['k_z']!r}",
        f"k_inf         {rep['k_inf']!r}",
    ]
    if rep["kappa_min"] is not None:
        lines.append(f"kappa_min     {rep['kappa_min']!r}")
    lines.append(f"are_residual  {rep['are_residual']!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_sweep(args):
    sweep = load_sweep(args.file)
    _emit(render_csv(sweep), args.out)
    return 0


def cmd_simulate(args):
    spec = _spec_from(args)
    if (args.lam is None) != (args.kz is None):
        raise InvalidParams("--lambda and --kz must be given together")
    strat = None if args.lam is None else Strategy(args.lam, args.kz)
    rep = simulate_report(spec, strat, args.n, args.seed)
    _emit(to_json(rep), args.out)
    return 0


def cmd_verify(args):
    from .verify import run_all

    results = run_all(points=args.points, tol=args.tol)
    lines = [chk.line() + f"  ({chk.seconds:.1f}s)" for chk in results]
    ok = all(chk.passed for chk in results)
    lines.append(f"{'ALL PASS' if ok else 'FAILED'}: {sum(c.passed for c in results)}/{len(results)} checks")
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="armacap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def channel_flags(p, kappa_required=True):
        p.add_argument("--a", type=float, required=True, help="noise zero")
        p.add_argument("--c", type=float, required=True, help="noise pole")
        p.add_argument("--kw", type=float, default=1.0, help="driving-noise variance (default 1)")
        p.add_argument("--kappa", type=float, required=kappa_required, help="power budget")
        p.add_argument("--s1", type=float, default=0.0, help="initial state (default 0)")

    p = sub.add_parser("capacity", help="closed-form capacity at one point")
    channel_flags(p)
    p.add_argument("--bits", action="store_true", help="report the rate in bits")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write to this path instead of stdout")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("sweep", help="CSV over a declarative sweep file")
    p.add_argument("file", help="sweep file (see sweeps/)")
    p.add_argument("--format", choices=("csv",), default="csv")
    p.add_argument("--out", help="write to this path instead of stdout")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo run of the feedback scheme (JSON)")
    channel_flags(p)
    p.add_argument("--lambda", dest="lam", type=float, help="explicit error gain")
    p.add_argument("--kz", type=float, help="explicit innovations variance")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json",), default="json")
    p.add_argument("--out", help="write to this path instead of stdout")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="closed forms vs oracle and simulation")
    p.add_argument("--points", type=int, default=None, help="oracle sample size (default 20+)")
    p.add_argument("--tol", type=float, default=None, help="oracle tolerance (default 1e-4)")
    p.add_argument("--out", help="write to this path instead of stdout")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StructuralCheckFailed as exc:
        print(f"armacap: {exc}", file=sys.stderr)
        return 3
    except (InvalidParams, OSError) as exc:
        print(f"armacap: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
