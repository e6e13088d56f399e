"""Time-invariant Riccati recursion, its algebraic fixed point, and the
detectability / stabilizability tests that make the fixed point unique.

With ``C = lam + c - a`` and ``R = k_z + k_w`` the difference equation is::

    K' = c^2 K + k_w - (k_w + c K C)^2 / (R + C^2 K)

and a time-invariant strategy ``(lam, k_z)`` is admissible when ``{c, C}`` is
detectable and ``{A*, B*^(1/2)}`` is stabilizable.
"""

import math
from dataclasses import dataclass

from .errors import InvalidParams, NoStabilizingRoot, NotStabilizable

__all__ = [
    "Strategy",
    "StructuralReport",
    "AreSolution",
    "DreTrajectory",
    "structural_report",
    "filter_gain",
    "closed_loop_gain",
    "dre_step",
    "dre_rhs",
    "dre_iterate",
    "are_residual",
    "solve_are",
    "ARE_TOL",
    "DRE_TOL",
    "DRE_MAX_STEPS",
]

ARE_TOL = 1e-10
DRE_TOL = 1e-12
DRE_MAX_STEPS = 10**6


@dataclass(frozen=True)
class Strategy:
    """Time-invariant input law ``X_t = lam (S_t - S_hat_t) + Z_t``, ``Z_t ~ N(0, k_z)``."""

    lam: float
    k_z: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and math.isfinite(self.k_z)):
            raise InvalidParams("strategy parameters must be finite")
        if self.k_z < 0:
            raise InvalidParams(f"k_z must be nonnegative, got {self.k_z}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "k_z", float(self.k_z))


@dataclass(frozen=True)
class StructuralReport:
    a_coef: float
    c_coef: float
    r: float
    b: float
    a_star: float
    b_star_sqrt: float
    detectable: bool
    unit_circle_controllable: bool
    stabilizable: bool

    @property
    def admissible(self):
        return self.detectable and self.stabilizable


@dataclass(frozen=True)
class AreSolution:
    k_inf: float
    f: float
    m: float
    stabilizing: bool
    residual: float


@dataclass(frozen=True)
class DreTrajectory:
    k: list
    converged: bool

    @property
    def limit(self):
        return self.k[-1]


def _coefs(spec, strat):
    return strat.lam + spec.c - spec.a, strat.k_z + spec.k_w


def structural_report(spec, strat):
    """Scalar detectability / unit-circle-controllability / stabilizability."""
    c = spec.c
    big_c, r = _coefs(spec, strat)
    b = strat.k_z / r
    a_star = c - spec.k_w * big_c / r
    b_star_sqrt = math.sqrt(spec.k_w * b)
    b_star = b_star_sqrt**2
    # scalar case: some G moves A - G*C anywhere iff C != 0
    detectable = big_c != 0.0 or abs(c) < 1.0
    ucc = b_star != 0.0 or abs(a_star) != 1.0
    stabilizable = b_star != 0.0 or abs(a_star) < 1.0
    return StructuralReport(
        a_coef=c,
        c_coef=big_c,
        r=r,
        b=b,
        a_star=a_star,
        b_star_sqrt=b_star_sqrt,
        detectable=detectable,
        unit_circle_controllable=ucc,
        stabilizable=stabilizable,
    )


def filter_gain(spec, strat, k):
    """Kalman gain ``M = (k_w + c k C) / (k_z + k_w + C^2 k)``."""
    big_c, r = _coefs(spec, strat)
    return (spec.k_w + spec.c * k * big_c) / (r + big_c * big_c * k)


def closed_loop_gain(spec, strat, k):
    """Return ``(F, M)`` with ``F = c - M C`` the error-recursion pole."""
    big_c, _ = _coefs(spec, strat)
    m = filter_gain(spec, strat, k)
    return spec.c - m * big_c, m


def dre_step(spec, strat, k_t):
    """One step of the time-invariant difference Riccati equation.

    Evaluated in the cancellation-free form
    ``(k (c^2 k_z + k_w (lam - a)^2) + k_w k_z) / (k_z + k_w + C^2 k)``,
    algebraically identical to the textbook expression but never negative.
    """
    big_c, r = _coefs(spec, strat)
    d = strat.lam - spec.a
    num = k_t * (spec.c * spec.c * strat.k_z + spec.k_w * d * d) + spec.k_w * strat.k_z
    return num / (r + big_c * big_c * k_t)


def dre_rhs(spec, strat, k):
    """Right-hand side of the Riccati equation written term by term."""
    big_c, r = _coefs(spec, strat)
    c, k_w = spec.c, spec.k_w
    return c * c * k + k_w - (k_w + c * k * big_c) ** 2 / (r + big_c * big_c * k)


def are_residual(spec, strat, k):
    return abs(dre_rhs(spec, strat, k) - k)


def dre_iterate(spec, strat, k_1=0.0, max_steps=DRE_MAX_STEPS, tol=DRE_TOL, bound=math.inf):
    """Iterate the DRE from ``k_1``.

    Stops when ``|K_{t+1} - K_t| < tol`` (``converged=True``), when
    ``max_steps`` is exhausted, or when ``K_t`` exceeds ``bound``. Divergence
    is reported through the flag, not raised.
    """
    if tol <= 0:
        raise InvalidParams("tol must be positive")
    if k_1 < 0:
        raise InvalidParams("k_1 must be nonnegative")
    traj = [float(k_1)]
    k = float(k_1)
    for _ in range(int(max_steps)):
        k_next = dre_step(spec, strat, k)
        traj.append(k_next)
        if abs(k_next - k) < tol:
            return DreTrajectory(traj, True)
        if not math.isfinite(k_next) or k_next > bound:
            break
        k = k_next
    return DreTrajectory(traj, False)


def _are_roots(spec, strat):
    """Real roots of ``C^2 K^2 + q1 K - k_w k_z = 0``."""
    big_c, r = _coefs(spec, strat)
    c, k_w, k_z = spec.c, spec.k_w, strat.k_z
    d = strat.lam - spec.a
    q2 = big_c * big_c
    q1 = r - c * c * k_z - k_w * d * d
    q0 = -k_w * k_z
    if q2 == 0.0:
        return [] if q1 == 0.0 else [-q0 / q1]
    disc = q1 * q1 - 4.0 * q2 * q0
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    # avoid cancellation: one root from the quadratic formula, the other by Vieta
    t = -0.5 * (q1 + math.copysign(sq, q1))
    roots = [t / q2]
    if t != 0.0:
        roots.append(q0 / t)
    else:
        roots.append(0.0)
    return roots


def solve_are(spec, strat, tol=ARE_TOL):
    """Unique stabilizing solution of the algebraic Riccati equation.

    The scalar ARE is a quadratic in ``K``; the nonnegative root with
    ``|F| < 1`` is selected. If selection is ambiguous at ``tol`` the DRE is
    iterated from zero instead.

    Raises
    ------
    NotStabilizable
        If ``{c, C}`` is not detectable or ``{A*, B*^(1/2)}`` not stabilizable.
    NoStabilizingRoot
        If no admissible root is found.
    """
    rep = structural_report(spec, strat)
    if not (rep.detectable and rep.stabilizable and rep.unit_circle_controllable):
        raise NotStabilizable(
            f"strategy {strat} not admissible: detectable={rep.detectable}, "
            f"stabilizable={rep.stabilizable}"
        )
    scale = max(1.0, spec.k_w, strat.k_z)
    candidates = []
    for k in _are_roots(spec, strat):
        if k < -tol * scale:
            continue
        k = max(k, 0.0)
        f, m = closed_loop_gain(spec, strat, k)
        if abs(f) < 1.0:
            candidates.append((k, f, m))
    if len(candidates) == 2 and abs(candidates[0][0] - candidates[1][0]) <= tol * scale:
        candidates = candidates[:1]
    if len(candidates) != 1:
        traj = dre_iterate(spec, strat, 0.0)
        if not traj.converged:
            raise NoStabilizingRoot(f"no stabilizing ARE root for {strat} on {spec}")
        k = traj.limit
        f, m = closed_loop_gain(spec, strat, k)
        if abs(f) >= 1.0:
            raise NoStabilizingRoot(f"DRE limit {k} is not stabilizing (F={f})")
        candidates = [(k, f, m)]
    k, f, m = candidates[0]
    res = are_residual(spec, strat, k)
    return AreSolution(k_inf=k, f=f, m=m, stabilizing=abs(f) < 1.0, residual=res)
