"""Monte Carlo run of the time-invariant Kalman-filter feedback scheme.

Encoder: ``X_t = lam (S_t - S_hat_t) + Z_t``. Decoder: ``S_hat`` is updated
from channel outputs only, ``S_hat_{t+1} = c S_hat_t + M_t I_t`` with
``I_t = Y_t - (c - a) S_hat_t``; ``K_t`` follows the difference Riccati
equation from ``K_1 = 0``.

For ``|c| > 1`` the state and output grow like ``|c|^t`` and double precision
loses the innovation to cancellation within ~100 steps, so long unstable runs
propagate the estimation error ``E_t = S_t - S_hat_t`` directly (the same
law, written in error coordinates). ``s_hat`` and ``y`` are then not stored.
"""

import math
from dataclasses import dataclass

import numpy as np

from .arma_model import sample_noise
from .errors import StructuralCheckFailed
from .riccati import closed_loop_gain, dre_step, solve_are, structural_report

__all__ = [
    "SimTrace",
    "KalmanDecoder",
    "run_coding_scheme",
    "innovation_whiteness",
    "error_stability_check",
    "steady_window",
    "whiteness_band",
    "analytic_error_limit",
    "BURN_IN",
    "DEFAULT_N",
    "DEFAULT_SEEDS",
]

BURN_IN = 0.1
DEFAULT_N = 100_000
DEFAULT_SEEDS = (0, 1, 2, 3, 4)


@dataclass(frozen=True)
class SimTrace:
    n: int
    k_t: np.ndarray
    s_hat: np.ndarray | None
    innovations: np.ndarray
    x: np.ndarray
    y: np.ndarray | None
    e: np.ndarray
    empirical_power: float
    power_stderr: float
    empirical_rate: float
    rate_stderr: float
    analytic_rate: float
    analytic_innovation_var: np.ndarray
    k_w: float
    coordinates: str


def steady_window(n):
    """Final half of the run (lies entirely after the 10% burn-in)."""
    return slice(n - n // 2, n)


class KalmanDecoder:
    """Decoder-side filter; sees only channel outputs and the initial state."""

    def __init__(self, spec, gains, s1):
        self._c = spec.c
        self._cma = spec.c - spec.a
        self._gains = gains
        self.t = 0
        self.s_hat = float(s1)

    def step(self, y):
        """Consume ``Y_t``; return ``(I_t, S_hat_t)`` and advance to ``t + 1``."""
        s_hat = self.s_hat
        innov = y - self._cma * s_hat
        self.s_hat = self._c * s_hat + self._gains[self.t] * innov
        self.t += 1
        return innov, s_hat


def _batch_stderr(values, batches=50):
    """Standard error of the mean by non-overlapping batch means."""
    m = len(values) // batches
    if m < 2:
        return float(np.std(values, ddof=1) / math.sqrt(len(values)))
    means = values[: m * batches].reshape(batches, m).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(batches))


def run_coding_scheme(spec, strat, n=DEFAULT_N, seed=0, coordinates="auto", gain_scale=1.0, check=True):
    """Simulate ``n`` channel uses of the feedback scheme.

    Parameters
    ----------
    coordinates : {"auto", "state", "error"}
        ``"state"`` runs encoder, channel and an output-only decoder on the
        raw state; ``"error"`` propagates ``E_t``. ``"auto"`` picks ``"state"``
        for ``|c| <= 1``.
    gain_scale : float
        Multiplies the decoder gain; values other than 1 give a deliberately
        mismatched filter (negative controls).
    check : bool
        Refuse strategies that fail detectability/stabilizability.
    """
    n = int(n)
    if n < 2:
        raise ValueError("n must be >= 2")
    if check:
        rep = structural_report(spec, strat)
        if not (rep.detectable and rep.stabilizable):
            raise StructuralCheckFailed(
                f"strategy {strat} fails structural checks "
                f"(detectable={rep.detectable}, stabilizable={rep.stabilizable})"
            )
    if coordinates == "auto":
        coordinates = "state" if abs(spec.c) <= 1.0 else "error"
    if coordinates not in ("state", "error"):
        raise ValueError(f"unknown coordinates {coordinates!r}")

    big_c = strat.lam + spec.c - spec.a
    k_t = np.empty(n)
    k = 0.0
    for t in range(n):
        k_t[t] = k
        k = dre_step(spec, strat, k)
    gains = (spec.k_w + spec.c * k_t * big_c) / (strat.k_z + spec.k_w + big_c * big_c * k_t)
    gains = gains * gain_scale
    innov_var = big_c * big_c * k_t + strat.k_z + spec.k_w

    path = sample_noise(spec, n, seed)
    z = np.random.default_rng([seed, 1]).normal(0.0, math.sqrt(strat.k_z), size=n)
    w = path.w

    x = np.empty(n)
    innov = np.empty(n)
    e = np.empty(n)
    s_hat = y = None
    if coordinates == "state":
        s_hat = np.empty(n)
        y = np.empty(n)
        dec = KalmanDecoder(spec, gains, spec.s1)
        s, v = path.s, path.v
        for t in range(n):
            # the encoder tracks the decoder's estimate through feedback
            e_t = s[t] - dec.s_hat
            x_t = strat.lam * e_t + z[t]
            y_t = x_t + v[t]
            innov[t], s_hat[t] = dec.step(y_t)
            e[t], x[t], y[t] = e_t, x_t, y_t
    else:
        c, lam = spec.c, strat.lam
        e_t = 0.0
        with np.errstate(over="ignore", invalid="ignore"):
            for t in range(n):
                m = gains[t]
                e[t] = e_t
                x[t] = lam * e_t + z[t]
                innov[t] = big_c * e_t + z[t] + w[t]
                e_t = (c - m * big_c) * e_t - m * (z[t] + w[t]) + w[t]

    with np.errstate(over="ignore", invalid="ignore"):
        x2 = x * x
        empirical_power = float(x2.mean())
        power_stderr = _batch_stderr(x2)
        win = steady_window(n)
        i2 = innov[win] ** 2
        var_hat = float(i2.mean())
        empirical_rate = 0.5 * math.log(var_hat / spec.k_w) if var_hat > 0 else -math.inf
        rate_stderr = 0.5 * _batch_stderr(i2) / var_hat if var_hat > 0 else math.inf
    analytic_rate = float(np.mean(0.5 * np.log(innov_var / spec.k_w)))
    for arr in (k_t, innov, x, e, innov_var, s_hat, y):
        if arr is not None:
            arr.flags.writeable = False
    return SimTrace(
        n=n,
        k_t=k_t,
        s_hat=s_hat,
        innovations=innov,
        x=x,
        y=y,
        e=e,
        empirical_power=empirical_power,
        power_stderr=power_stderr,
        empirical_rate=empirical_rate,
        rate_stderr=rate_stderr,
        analytic_rate=analytic_rate,
        analytic_innovation_var=innov_var,
        k_w=spec.k_w,
        coordinates=coordinates,
    )


def innovation_whiteness(innovations, max_lag=10):
    """Sample autocorrelations at lags ``1..max_lag`` after a 10% burn-in.

    Accepts a :class:`SimTrace` or a bare sequence. For white innovations all
    values fall inside ``+-4 / sqrt(window length)``.
    """
    seq = innovations.innovations if isinstance(innovations, SimTrace) else np.asarray(innovations, float)
    n = len(seq)
    if n < 10 * max_lag:
        raise ValueError(f"need at least {10 * max_lag} samples, got {n}")
    u = seq[int(BURN_IN * n):]
    u = u - u.mean()
    denom = float(u @ u)
    return np.array([float(u[:-lag] @ u[lag:]) / denom for lag in range(1, max_lag + 1)])


def whiteness_band(innovations):
    seq = innovations.innovations if isinstance(innovations, SimTrace) else innovations
    n = len(seq)
    return 4.0 / math.sqrt(n - int(BURN_IN * n))


def error_stability_check(trace):
    """True iff the error variance over the final window stays within twice
    the analytic error variance at the window start (K_inf once converged)."""
    win = steady_window(trace.n)
    e = trace.e[win]
    with np.errstate(over="ignore", invalid="ignore"):
        var = float(np.mean(e * e))
    k_ref = float(trace.k_t[win.start])
    if not math.isfinite(var):
        return False
    return var <= 2.0 * k_ref


def analytic_error_limit(spec, strat):
    """``K_inf`` and ``F`` of the stabilizing ARE solution."""
    sol = solve_are(spec, strat)
    f, _ = closed_loop_gain(spec, strat, sol.k_inf)
    return sol.k_inf, f
