"""Numerical acceptance checks shared by ``armacap verify`` and the test suite.

Each check returns a :class:`Check` with the worst deviation it observed.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .arma_model import make_channel
from .capacity import (
    Region,
    butman_root,
    closed_form_optimum,
    feedback_capacity,
    kappa_min,
    nonfeedback_k_inf,
    nonfeedback_lower_bound,
    power_of_strategy,
    rate_functional,
    regime_classify,
    verify_by_search,
)
from .riccati import Strategy, are_residual, closed_loop_gain, dre_iterate
from .simulate import (
    DEFAULT_SEEDS,
    error_stability_check,
    innovation_whiteness,
    run_coding_scheme,
    whiteness_band,
)

# (a, c, kappa) in regions A/B above kappa_min; the c = 1.3 rows sit outside
# the literal region A (its a-interval is empty for 1 < c < sqrt 2) and are
# compared through the region-free closed form.
ORACLE_POINTS = [
    (0.2, 1.5, 5.0), (0.2, 2.0, 5.0), (0.2, 3.0, 10.0), (-1.0, -2.0, 0.5),
    (0.2, 1.5, 2.0), (0.2, 1.5, 10.0), (0.2, 2.0, 2.0), (0.2, 2.0, 10.0),
    (0.2, 3.0, 2.0), (0.2, 3.0, 5.0), (0.0, 1.5, 5.0), (-1.0, 2.0, 2.0),
    (0.6, 1.5, 1.0), (0.3, 2.5, 3.0), (-1.0, -2.0, 5.0), (-0.5, -3.0, 2.0),
    (1.0, -2.0, 5.0), (-2.0, -1.2, 10.0), (0.5, -3.0, 1.0), (7.0, -1.5, 100.0),
    (0.2, 1.3, 5.0), (0.2, 1.3, 10.0),
]
KMIN_PAIRS_A = [(0.2, 1.5), (0.2, 2.0), (0.2, 3.0), (0.0, 1.5), (0.6, 1.5), (-1.0, 2.0)]
KMIN_PAIRS_B = [(-1.0, -2.0), (-0.5, -3.0), (1.0, -2.0), (0.5, -3.0)]


@dataclass
class Check:
    name: str
    passed: bool
    max_dev: float
    tol: float
    detail: str = ""
    seconds: float = 0.0
    failures: list = field(default_factory=list)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<34} max_dev={self.max_dev:.3e}  tol={self.tol:.1e}  {self.detail}"


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        chk = fn(*args, **kwargs)
        chk.seconds = time.perf_counter() - t0
        return chk

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def check_oracle_equivalence(points=None, tol=1e-4):
    """Closed-form feedback capacity vs the search oracle."""
    points = ORACLE_POINTS if points is None else points
    worst, failures = 0.0, []
    for a, c, kappa in points:
        spec = make_channel(a, c, 1.0, kappa)
        if regime_classify(spec) is not Region.OUTSIDE:
            closed = feedback_capacity(spec).rate
        else:
            closed = closed_form_optimum(spec).rate
        gap = abs(closed - verify_by_search(spec).rate)
        worst = max(worst, gap)
        if not gap < tol:
            failures.append((a, c, kappa, gap))
    return Check("oracle equivalence", not failures, worst, tol, f"{len(points)} points", failures=failures)


@_timed
def check_are_consistency(points=None, tol=1e-9):
    """Closed-form triple: ARE residual, |F| < 1, active power budget."""
    points = ORACLE_POINTS if points is None else points
    worst, failures = 0.0, []
    for a, c, kappa in points:
        spec = make_channel(a, c, 1.0, kappa)
        opt = closed_form_optimum(spec)
        strat = Strategy(opt.lam, opt.k_z)
        res = are_residual(spec, strat, opt.k_inf)
        f, _ = closed_loop_gain(spec, strat, opt.k_inf)
        pow_gap = abs(power_of_strategy(strat, opt.k_inf) - kappa)
        worst = max(worst, res, pow_gap)
        if not (res < tol and pow_gap < tol and abs(f) < 1 and opt.k_inf >= 0):
            failures.append((a, c, kappa, res, pow_gap, f))
    return Check("ARE consistency", not failures, worst, tol, f"{len(points)} points", failures=failures)


def oracle_kappa_boundary(a, c, k_w=1.0, tol=1e-6, eps=1e-7):
    """Smallest power at which the oracle's optimal ``k_z`` leaves zero.

    Below it the best admissible strategy puts all power into the error term
    (``k_z = 0``); above it the interior optimum appears.
    """
    def interior(kappa):
        return verify_by_search(make_channel(a, c, k_w, kappa)).strategy.k_z > eps * max(1.0, kappa)

    lo, hi = 0.0, 1e-3
    while not interior(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise RuntimeError(f"no interior optimum found for a={a}, c={c}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if interior(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@_timed
def check_kappa_min(pairs_a=None, pairs_b=None, tol=1e-4):
    """kappa_min formula vs bisection of the oracle's interior boundary."""
    pairs = list(KMIN_PAIRS_A if pairs_a is None else pairs_a) + list(KMIN_PAIRS_B if pairs_b is None else pairs_b)
    worst, failures = 0.0, []
    for a, c in pairs:
        formula = kappa_min(make_channel(a, c, 1.0, 1.0))
        boundary = oracle_kappa_boundary(a, c, tol=min(tol, 1e-6) / 4)
        gap = abs(formula - boundary)
        worst = max(worst, gap)
        if not gap < tol:
            failures.append((a, c, formula, boundary))
    return Check("kappa_min consistency", not failures, worst, tol, f"{len(pairs)} (a,c) pairs", failures=failures)


def nonfeedback_grid():
    """30 (a, c, kappa) points over stable and unstable noise, c != a."""
    pts = []
    for a, c in [(0.0, 0.5), (0.5, 0.0), (0.2, 1.5), (-0.7, 0.9), (1.5, 0.3), (0.2, -2.0),
                 (2.0, 3.0), (-1.5, -1.2), (0.9, -0.9), (3.0, 1.0)]:
        for kappa in (0.5, 2.0, 10.0):
            pts.append((a, c, kappa))
    return pts


@_timed
def check_nonfeedback(tol=1e-8):
    """Nonfeedback K_inf: closed form vs DRE fixed point from zero."""
    worst, failures = 0.0, []
    for a, c, kappa in nonfeedback_grid():
        spec = make_channel(a, c, 1.0, kappa)
        k_closed, _ = nonfeedback_k_inf(spec)
        traj = dre_iterate(spec, Strategy(0.0, kappa), 0.0)
        gap = abs(k_closed - traj.limit)
        worst = max(worst, gap)
        if not (traj.converged and gap < tol):
            failures.append((a, c, kappa, gap))
    zero_rates = [nonfeedback_lower_bound(make_channel(a, c, 1.0, 0.0)).rate for a, c, _ in nonfeedback_grid()]
    if any(r != 0.0 for r in zero_rates):
        failures.append(("kappa=0", zero_rates))
    return Check("nonfeedback consistency", not failures, worst, tol, "30 points + kappa=0", failures=failures)


@_timed
def check_butman(tol=1e-12):
    """Quartic residual of the bisection root; c = 0 against 0.5 ln(1 + kappa)."""
    worst, failures = 0.0, []
    for c in (-1.0, -0.9, -0.5, 0.0, 0.3, 0.9, 1.0):
        for kappa in (0.1, 0.5, 1.0, 2.0, 5.0):
            chi = butman_root(c, kappa, 1.0)
            res = abs(chi**4 - chi**2 - kappa * (chi + abs(c)) ** 2)
            worst = max(worst, res)
            if not res < tol:
                failures.append((c, kappa, res))
    for kappa in (0.5, 1.0, 2.0):
        chi = butman_root(0.0, kappa, 1.0)
        gap = abs(math.log(chi) - 0.5 * math.log1p(kappa))
        worst = max(worst, gap)
        if not gap < tol:
            failures.append((0.0, kappa, gap))
    return Check("Butman quartic", not failures, worst, tol, "35 roots + 3 AWGN", failures=failures)


@_timed
def check_riccati_convergence(tol=2e-12):
    """DRE limits independent of K_1; a non-detectable case diverges."""
    cases = [
        (make_channel(0.2, 1.5, 1.0, 5.0), None),
        (make_channel(0.0, 0.5, 1.0, 1.0), Strategy(0.0, 1.0)),
        (make_channel(0.5, 0.0, 1.0, 1.0), Strategy(0.0, 1.0)),
        (make_channel(-1.0, -2.0, 1.0, 0.5), None),
        (make_channel(0.2, 3.0, 1.0, 10.0), Strategy(0.3, 2.0)),
    ]
    worst, failures = 0.0, []
    for spec, strat in cases:
        if strat is None:
            strat = feedback_capacity(spec).strategy
        limits = []
        for k1 in (0.0, 1.0, 10.0, 100.0):
            traj = dre_iterate(spec, strat, k1, tol=1e-13)
            if not traj.converged:
                failures.append((spec, strat, k1, "not converged"))
            limits.append(traj.limit)
        spread = max(limits) - min(limits)
        worst = max(worst, spread)
        if not spread < tol:
            failures.append((spec, strat, spread))
    bad = make_channel(0.0, 2.0, 1.0, 1.0)
    traj = dre_iterate(bad, Strategy(-2.0, 0.0), 1.0, max_steps=10_000, bound=1e6)
    if traj.converged or not traj.limit > 1e6:
        failures.append(("non-detectable case did not diverge", traj.limit))
    return Check("Riccati convergence", not failures, worst, tol, "4 initial conditions x 5 cases", failures=failures)


@_timed
def check_monte_carlo(n=100_000, seeds=DEFAULT_SEEDS, rate_rel_tol=0.02):
    """Simulated feedback scheme at (a, c, kappa) = (0.2, 1.5, 5)."""
    spec = make_channel(0.2, 1.5, 1.0, 5.0)
    fc = feedback_capacity(spec)
    worst, failures, slowest = 0.0, [], 0.0
    for seed in seeds:
        t0 = time.perf_counter()
        tr = run_coding_scheme(spec, fc.strategy, n, seed)
        slowest = max(slowest, time.perf_counter() - t0)
        rel = abs(tr.empirical_rate - fc.rate) / fc.rate
        power_z = abs(tr.empirical_power - spec.kappa) / tr.power_stderr
        rho1 = abs(innovation_whiteness(tr, 1)[0])
        stable = error_stability_check(tr)
        worst = max(worst, rel)
        if not (rel < rate_rel_tol and power_z < 3.0 and rho1 < whiteness_band(tr) and stable):
            failures.append((seed, rel, power_z, rho1, stable))
    if slowest >= 5.0:
        failures.append(("runtime", slowest))
    return Check(
        "Monte Carlo", not failures, worst, rate_rel_tol,
        f"{len(seeds)} seeds, n={n}, slowest run {slowest:.2f}s", failures=failures,
    )


@_timed
def check_figure_shapes(kappas=(1.0, 2.0, 5.0, 10.0)):
    """Shape of the two shipped sweeps.

    The c sweep (a = 0.2) must give feedback capacity increasing in c over
    region A and never below the nonfeedback rate (the two coincide, up to
    rounding, at a = 1/c). The kappa sweep (c = 0.5) must give nonfeedback
    rates increasing in kappa and decreasing in a below the pole.
    """
    from .sweep import parse_sweep, sweep_rows

    failures = []
    fig1 = parse_sweep(
        "parameter = c\nvalues = -5:5:0.1\na = 0.2\nkw = 1\n"
        f"series = kappa: {', '.join(map(str, kappas))}\noutputs = feedback, nonfeedback\n"
    )
    rows = list(sweep_rows(fig1))
    for kappa in kappas:
        fb = [r for r in rows if r["kappa"] == kappa and r["output"] == "feedback"]
        nf = {r["c"]: r for r in rows if r["kappa"] == kappa and r["output"] == "nonfeedback"}
        opt = [r for r in fb if r["regime"] == "FeedbackOptimal" and r["c"] > 1]
        rates = [r["rate_nats"] for r in opt]
        if len(rates) < 2 or any(b <= a for a, b in zip(rates, rates[1:])):
            failures.append(("fig1 not increasing in c", kappa))
        for r in fb:
            if r["regime"] == "FeedbackOptimal":
                if not r["kappa"] > r["kappa_min"]:
                    failures.append(("kappa <= kappa_min", r["c"], kappa))
                if r["rate_nats"] < nf[r["c"]]["rate_nats"] - 1e-12:
                    failures.append(("fig1 feedback below nonfeedback", r["c"], kappa))
    fig2 = parse_sweep(
        "parameter = kappa\nvalues = 0.1:10:0.1\nc = 0.5\nkw = 1\n"
        "series = a: -1, -0.75, -0.5, -0.25, 0, 0.25, 0.5, 0.75, 1\noutputs = nonfeedback\n"
    )
    rows = [r for r in sweep_rows(fig2) if r["regime"] != "Skipped"]
    curves = {}
    for r in rows:
        curves.setdefault(r["a"], []).append(r["rate_nats"])
    for a, rates in curves.items():
        if any(b < a_ for a_, b in zip(rates, rates[1:])):
            failures.append(("fig2 not monotone in kappa", a))
    below = sorted(a for a in curves if a < 0.5)
    for lo_a, hi_a in zip(below, below[1:]):
        if any(h >= l for l, h in zip(curves[lo_a], curves[hi_a])):
            failures.append(("fig2 not decreasing in a", lo_a, hi_a))
    return Check("figure shapes", not failures, float(len(failures)), 0.0, "c sweep + kappa sweep", failures=failures)


@_timed
def check_determinism():
    """Sweep CSV and simulate JSON are byte-identical across repeated runs."""
    from .cli import simulate_report, to_json
    from .sweep import parse_sweep, render_csv

    sweep = parse_sweep("parameter = kappa\nvalues = 0.5:5:0.5\na = 0.2\nkw = 1\nseries = c: 0.5, 1.5, 2\n"
                        "outputs = feedback, nonfeedback, butman, kappa_min\n")
    spec = make_channel(0.2, 1.5, 1.0, 5.0)
    first = (render_csv(sweep), to_json(simulate_report(spec, None, 20_000, 7)))
    second = (render_csv(sweep), to_json(simulate_report(spec, None, 20_000, 7)))
    same = first == second
    return Check("determinism", same, 0.0 if same else 1.0, 0.0, "sweep CSV + simulate JSON")


ALL_CHECKS = (
    check_oracle_equivalence,
    check_are_consistency,
    check_kappa_min,
    check_nonfeedback,
    check_butman,
    check_riccati_convergence,
    check_monte_carlo,
    check_figure_shapes,
    check_determinism,
)


def run_all(points=None, tol=None):
    """Run every check; ``points`` truncates the oracle sample, ``tol``
    overrides the oracle and kappa_min tolerances."""
    sample = ORACLE_POINTS if points is None else ORACLE_POINTS[: max(1, points)]
    oracle_tol = 1e-4 if tol is None else tol
    results = [
        check_oracle_equivalence(sample, oracle_tol),
        check_are_consistency(sample),
        check_kappa_min(
            KMIN_PAIRS_A if points is None else KMIN_PAIRS_A[: max(1, min(points, len(KMIN_PAIRS_A)))],
            KMIN_PAIRS_B if points is None else KMIN_PAIRS_B[: max(1, min(points, len(KMIN_PAIRS_B)))],
            oracle_tol,
        ),
        check_nonfeedback(),
        check_butman(),
        check_riccati_convergence(),
        check_monte_carlo(),
        check_figure_shapes(),
        check_determinism(),
    ]
    return results
