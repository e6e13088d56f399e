"""Closed-form rates for the ARMA(a, c) noise channel and a search-based oracle.

* :func:`feedback_capacity` -- time-invariant feedback capacity with regime
  classification and minimum power.
* :func:`nonfeedback_lower_bound` -- rate of the IID input ``X_t = Z_t``.
* :func:`butman_rate` -- ``0.5 ln chi^2`` from the stable-AR(c) quartic.
* :func:`verify_by_search` -- derivative-free maximisation of the rate over
  admissible strategies; shares no algebra with the closed forms.

All rates are in nats.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect, brentq

from .arma_model import ChannelSpec
from .errors import (
    ConsistencyFailure,
    EmptyFeasibleSet,
    InvalidParams,
    NegativeDiscriminant,
    NotStabilizable,
    NoStabilizingRoot,
    OutsideRegime,
)
from .riccati import ARE_TOL, Strategy, solve_are, structural_report

__all__ = [
    "Regime",
    "Region",
    "CapacityResult",
    "ClosedFormOptimum",
    "FeasibleSearchConfig",
    "SearchResult",
    "rate_functional",
    "power_of_strategy",
    "regime_classify",
    "kappa_min",
    "closed_form_optimum",
    "feedback_capacity",
    "nonfeedback_lower_bound",
    "nonfeedback_k_inf",
    "butman_rate",
    "butman_root",
    "verify_by_search",
    "default_lambda_range",
]

SQRT2 = math.sqrt(2.0)


class Regime(str, enum.Enum):
    FEEDBACK_OPTIMAL = "FeedbackOptimal"
    NONFEEDBACK_FALLBACK = "NonfeedbackFallback"
    INFEASIBLE_POWER = "InfeasiblePower"

    def __str__(self):
        return self.value


class Region(str, enum.Enum):
    A = "RegionA"
    B = "RegionB"
    OUTSIDE = "Outside"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class CapacityResult:
    regime: Regime
    rate: float
    strategy: Strategy | None
    k_inf: float
    kappa_min: float | None = None
    g: float | None = None
    h: float | None = None
    are_residual: float | None = None

    @property
    def rate_bits(self):
        return self.rate / math.log(2.0)


def rate_functional(spec, strat, k):
    """``0.5 ln(((lam + c - a)^2 k + k_z + k_w) / k_w)``."""
    big_c = strat.lam + spec.c - spec.a
    return 0.5 * math.log1p((big_c * big_c * k + strat.k_z) / spec.k_w)


def power_of_strategy(strat, k):
    """Steady-state input power ``lam^2 k + k_z``."""
    return strat.lam * strat.lam * k + strat.k_z


def regime_classify(spec):
    """Region of (a, c) in which feedback increases capacity.

    A: ``c`` in (1, sqrt 2) U (sqrt 2, inf) and ``-c/(c^2-2) <= a <= 1/c``.
    B: ``c`` in (-inf, -sqrt 2) U (-sqrt 2, -1) and
    ``a <= 1/c`` or ``a >= -c/(c^2-2)``. ``c = +-sqrt 2`` is Outside.
    """
    a, c = spec.a, spec.c
    if c > 1.0 and c != SQRT2:
        if -c / (c * c - 2.0) <= a <= 1.0 / c:
            return Region.A
    elif c < -1.0 and c != -SQRT2:
        if a <= 1.0 / c or a >= -c / (c * c - 2.0):
            return Region.B
    return Region.OUTSIDE


def kappa_min(spec):
    """Power above which the closed-form feedback optimum is admissible.

    This is the positive root of ``K_Z*(kappa) = 0``::

        k_w (-(1-ac)(2ac - ac^3 - c^2) + |1-ac| sqrt(c^3 q)) / (2 c^2 (c^2-1)^2)
        q = a^2 c^3 - 6ac^2 + 4a + 4c^3 - 3c

    Raises ``OutsideRegime`` outside regions A/B and ``NegativeDiscriminant``
    if ``c^3 q < 0``.
    """
    if regime_classify(spec) is Region.OUTSIDE:
        raise OutsideRegime(f"(a={spec.a}, c={spec.c}) is outside regions A/B")
    return _kappa_min_formula(spec.a, spec.c, spec.k_w)


def _kappa_min_formula(a, c, k_w):
    disc = c**3 * (a * a * c**3 - 6 * a * c * c + 4 * a + 4 * c**3 - 3 * c)
    if disc < 0:
        # tiny negatives are rounding when a = 1/c makes both terms vanish
        if disc > -1e-12 * max(1.0, abs(c) ** 6):
            disc = 0.0
        else:
            raise NegativeDiscriminant(f"discriminant {disc} < 0 at a={a}, c={c}")
    one_ac = 1.0 - a * c
    num = -one_ac * (2 * a * c - a * c**3 - c * c) + abs(one_ac) * math.sqrt(disc)
    return k_w * num / (2 * c * c * (c * c - 1) ** 2)


@dataclass(frozen=True)
class ClosedFormOptimum:
    strategy: Strategy | None
    lam: float
    k_z: float
    k_inf: float
    g: float
    rate: float


def closed_form_optimum(spec):
    """Optimal triple and rate of the time-invariant feedback problem.

    Evaluated for any ``|c| > 1`` regardless of region; ``strategy`` is None
    when ``K_Z* < 0`` (power below the minimum).
    """
    a, c, k_w, kappa = spec.a, spec.c, spec.k_w, spec.kappa
    c2m1 = c * c - 1.0
    if c2m1 == 0.0:
        raise OutsideRegime("closed form undefined for |c| = 1")
    amc2 = (a - c) ** 2
    g = k_w * (2 * a - c + a * a * c**3 - 2 * a * a * c) + c * kappa * c2m1**2
    k_inf = g / (c * c2m1 * amc2)
    lam = k_w * amc2 * (1 - a * c) / g
    k_z = (c * kappa * c2m1 * g - k_w**2 * amc2 * (1 - a * c) ** 2) / (c * c2m1 * g)
    rate = 0.5 * math.log((c * k_w * (c - 2 * a + a * a * c) + c * c * kappa * c2m1) / (k_w * c2m1))
    strat = Strategy(lam, k_z) if k_z >= 0 else None
    return ClosedFormOptimum(strategy=strat, lam=lam, k_z=k_z, k_inf=k_inf, g=g, rate=rate)


def nonfeedback_k_inf(spec):
    """Stabilizing ARE solution for ``lam = 0``, ``k_z = kappa``, with ``h``.

    ``K = (-h + sqrt(h^2 + 4 (c-a)^2 k_w kappa)) / (2 (c-a)^2)`` with
    ``h = kappa (1 - c^2) + k_w (1 - a^2)``; the rationalised form is used
    when ``h > 0``. At ``kappa = 0`` the input is silent and ``K = 0``.
    """
    a, c, k_w, kappa = spec.a, spec.c, spec.k_w, spec.kappa
    h = kappa * (1 - c * c) + k_w * (1 - a * a)
    if kappa == 0.0:
        return 0.0, h
    d2 = (c - a) ** 2
    root = math.sqrt(h * h + 4 * d2 * k_w * kappa)
    if h > 0:
        k = 2 * k_w * kappa / (h + root)
    else:
        k = (root - h) / (2 * d2)
    return k, h


def nonfeedback_lower_bound(spec, tol=ARE_TOL):
    """Rate of the IID Gaussian input ``X_t = Z_t ~ N(0, kappa)``."""
    k, h = nonfeedback_k_inf(spec)
    strat = Strategy(0.0, spec.kappa)
    if spec.kappa == 0.0:
        return CapacityResult(
            regime=Regime.NONFEEDBACK_FALLBACK, rate=0.0, strategy=strat, k_inf=0.0, h=h, are_residual=0.0
        )
    sol = solve_are(spec, strat, tol)
    scale = max(1.0, sol.k_inf)
    if abs(sol.k_inf - k) > 1e-8 * scale:
        raise ConsistencyFailure(f"nonfeedback K={k} disagrees with ARE root {sol.k_inf}")
    return CapacityResult(
        regime=Regime.NONFEEDBACK_FALLBACK,
        rate=rate_functional(spec, strat, k),
        strategy=strat,
        k_inf=k,
        h=h,
        are_residual=sol.residual,
    )


def feedback_capacity(spec, tol=ARE_TOL):
    """Feedback capacity under time-invariant strategies.

    Inside regions A/B with ``kappa > kappa_min`` the closed-form optimum is
    returned after checking it against the ARE and the structural tests;
    everywhere else the nonfeedback rate is returned.
    """
    if spec.kappa == 0.0:
        nf = nonfeedback_lower_bound(spec, tol)
        return CapacityResult(
            regime=Regime.INFEASIBLE_POWER, rate=0.0, strategy=nf.strategy, k_inf=0.0, h=nf.h, are_residual=0.0
        )
    region = regime_classify(spec)
    if region is Region.OUTSIDE:
        return nonfeedback_lower_bound(spec, tol)
    kmin = kappa_min(spec)
    if not spec.kappa > kmin:
        nf = nonfeedback_lower_bound(spec, tol)
        return _replace(nf, kappa_min=kmin)
    opt = closed_form_optimum(spec)
    if opt.strategy is None or opt.k_inf < 0:
        raise ConsistencyFailure(f"closed-form optimum infeasible above kappa_min at {spec}")
    rep = structural_report(spec, opt.strategy)
    if not (rep.detectable and rep.stabilizable):
        raise ConsistencyFailure(f"closed-form strategy not admissible at {spec}")
    try:
        sol = solve_are(spec, opt.strategy, tol)
    except (NotStabilizable, NoStabilizingRoot) as exc:
        raise ConsistencyFailure(str(exc)) from exc
    scale = max(1.0, opt.k_inf)
    if abs(sol.k_inf - opt.k_inf) > 1e-8 * scale or sol.residual > tol * scale:
        raise ConsistencyFailure(f"closed-form K={opt.k_inf} vs ARE root {sol.k_inf}")
    return CapacityResult(
        regime=Regime.FEEDBACK_OPTIMAL,
        rate=opt.rate,
        strategy=opt.strategy,
        k_inf=opt.k_inf,
        kappa_min=kmin,
        g=opt.g,
        are_residual=sol.residual,
    )


def _replace(result, **changes):
    fields = dict(result.__dict__)
    fields.update(changes)
    return CapacityResult(**fields)


def _butman_poly(chi, ratio, abs_c):
    return chi**4 - chi**2 - ratio * (chi + abs_c) ** 2


def butman_root(c, kappa, k_w, allow_unstable=False):
    """Positive root of ``chi^4 - chi^2 - (kappa/k_w)(chi + |c|)^2 = 0``.

    Bracketed bisection on ``[1, 1 + 2 sqrt(kappa/k_w) + |c|]``.
    ``allow_unstable`` evaluates the same quartic for ``|c| > 1``; the result
    is for comparison only.
    """
    if k_w <= 0 or kappa < 0:
        raise InvalidParams("need k_w > 0 and kappa >= 0")
    if abs(c) > 1 and not allow_unstable:
        raise InvalidParams(f"Butman's rate is defined for |c| <= 1, got c={c}")
    ratio = kappa / k_w
    abs_c = abs(c)
    if ratio == 0.0:
        return 1.0
    lo, hi = 1.0, 1.0 + 2.0 * math.sqrt(ratio) + abs_c
    chi = bisect(_butman_poly, lo, hi, args=(ratio, abs_c), xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)
    # snap to whichever neighbouring float has the smaller residual
    best = min(
        (chi, np.nextafter(chi, lo), np.nextafter(chi, hi)),
        key=lambda x: abs(_butman_poly(x, ratio, abs_c)),
    )
    return float(best)


def butman_rate(c, kappa, k_w, allow_unstable=False):
    """``0.5 ln chi^2`` (nats)."""
    chi = butman_root(c, kappa, k_w, allow_unstable)
    return math.log(chi)


# ---------------------------------------------------------------------------
# Search oracle


@dataclass(frozen=True)
class FeasibleSearchConfig:
    """Grid + interval-shrinking search over ``lam``.

    ``lambda_range`` of None selects ``+-(|c| + |a| + 5)``.
    """

    lambda_range: tuple | None = None
    grid_points: int = 801
    refine_iters: int = 40
    refine_points: int = 21
    tol: float = 1e-12
    near_optimal: float = 1e-6

    def __post_init__(self):
        if self.grid_points < 3 or self.refine_points < 3:
            raise InvalidParams("grid_points and refine_points must be >= 3")
        if self.refine_iters < 1:
            raise InvalidParams("refine_iters must be positive")
        if self.tol <= 0:
            raise InvalidParams("tol must be positive")
        if self.lambda_range is not None and not self.lambda_range[0] < self.lambda_range[1]:
            raise InvalidParams("lambda_range must be an increasing interval")


@dataclass(frozen=True)
class SearchResult:
    strategy: Strategy
    rate: float
    k_inf: float
    candidates: list = field(default_factory=list)


def default_lambda_range(spec):
    half = abs(spec.c) + abs(spec.a) + 5.0
    return (-half, half)


def _stabilizing_k(spec, lam, k_z):
    """Stabilizing ARE root, or None when ``(lam, k_z)`` is not admissible."""
    try:
        return solve_are(spec, Strategy(lam, k_z)).k_inf
    except (NotStabilizable, NoStabilizingRoot):
        return None


def _best_for_lambda(spec, lam, cfg):
    """Largest admissible ``k_z`` meeting the power budget at this ``lam``.

    Power ``lam^2 K(lam, k_z) + k_z`` increases with ``k_z``, so the budget is
    active at the optimum and pins ``k_z`` by a 1-D root solve.
    Returns ``(rate, k_z, K)`` or None.
    """
    kappa = spec.kappa
    if lam == 0.0:
        k_z = kappa
    else:
        floor = 0.0
        k0 = _stabilizing_k(spec, lam, 0.0)
        if k0 is None:
            # k_z = 0 not admissible: approach the boundary from inside
            floor = 1e-12 * max(kappa, 1e-300)
            k0 = _stabilizing_k(spec, lam, floor)
            if k0 is None:
                return None
        excess0 = lam * lam * k0 + floor - kappa
        if excess0 > 0:
            return None
        if excess0 == 0.0:
            k_z = floor
        else:
            def excess(kz):
                k = _stabilizing_k(spec, lam, kz)
                return lam * lam * k + kz - kappa
            k_z = brentq(excess, floor, kappa, xtol=cfg.tol, rtol=8.9e-16, maxiter=500)
    k = _stabilizing_k(spec, lam, k_z)
    if k is None:
        return None
    big_c = lam + spec.c - spec.a
    rate = 0.5 * math.log1p((big_c * big_c * k + k_z) / spec.k_w)
    return rate, k_z, k


def verify_by_search(spec, cfg=None):
    """Maximise the rate over admissible ``(lam, k_z)`` under the power budget.

    A uniform grid in ``lam`` is followed by ``refine_iters`` rounds of grid
    search on a shrinking interval around the incumbent. ``candidates`` lists
    grid-stage local maxima within ``near_optimal`` of the best rate.
    """
    cfg = cfg or FeasibleSearchConfig()
    if spec.kappa == 0.0:
        return SearchResult(Strategy(0.0, 0.0), 0.0, 0.0, [])
    lo, hi = cfg.lambda_range or default_lambda_range(spec)
    grid = np.linspace(lo, hi, cfg.grid_points)
    if not (lo <= 0.0 <= hi) or 0.0 not in grid:
        grid = np.sort(np.append(grid, 0.0)) if lo <= 0.0 <= hi else grid
    evals = [(lam, _best_for_lambda(spec, float(lam), cfg)) for lam in grid]
    feasible = [(lam, r) for lam, r in evals if r is not None]
    if not feasible:
        raise EmptyFeasibleSet(f"no admissible strategy for {spec}")
    rates = np.array([r[0] if r is not None else -np.inf for _, r in evals])
    # local maxima of the grid stage, each refined separately
    peaks = [
        i
        for i in range(len(grid))
        if np.isfinite(rates[i])
        and (i == 0 or rates[i] >= rates[i - 1])
        and (i == len(grid) - 1 or rates[i] >= rates[i + 1])
    ]
    top = rates.max()
    peaks = [i for i in peaks if rates[i] >= top - max(1e-3, 10 * cfg.near_optimal)] or [int(rates.argmax())]
    refined = []
    step = grid[1] - grid[0]
    for i in peaks:
        refined.append(_refine(spec, float(grid[i]), step, cfg, evals[i][1]))
    refined.sort(key=lambda item: -item[1][0])
    lam, (rate, k_z, k) = refined[0]
    candidates = [
        (l, Strategy(l, kz), r) for l, (r, kz, _) in refined if r >= rate - cfg.near_optimal
    ]
    return SearchResult(Strategy(lam, k_z), rate, k, candidates)


def _refine(spec, lam, half_width, cfg, best):
    for _ in range(cfg.refine_iters):
        pts = np.linspace(lam - half_width, lam + half_width, cfg.refine_points)
        for p in pts:
            res = _best_for_lambda(spec, float(p), cfg)
            if res is not None and res[0] > best[0]:
                best, lam = res, float(p)
        half_width *= 4.0 / (cfg.refine_points - 1)
    return lam, best
