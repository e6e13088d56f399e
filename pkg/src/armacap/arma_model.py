"""ARMA(a, c) noise in state-space form and seeded trajectory sampling.

The noise ``V_t = c V_{t-1} + W_t - a W_{t-1}`` is carried by the scalar state
``S_{t+1} = c S_t + W_t`` with ``V_t = (c - a) S_t + W_t`` and a known initial
state ``S_1 = s1``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidParams

__all__ = ["ChannelSpec", "NoisePath", "make_channel", "sample_noise"]


@dataclass(frozen=True)
class ChannelSpec:
    """AGN channel driven by ARMA(a, c) noise.

    Attributes
    ----------
    a : float
        Zero of the noise (MA parameter).
    c : float
        Pole of the noise (AR parameter); ``|c| > 1`` is unstable.
    k_w : float
        Variance of the driving noise ``W_t``.
    kappa : float
        Average input power budget.
    s1 : float
        Initial state, known to encoder and decoder.
    """

    a: float
    c: float
    k_w: float = 1.0
    kappa: float = 1.0
    s1: float = 0.0

    def __post_init__(self):
        for name in ("a", "c", "k_w", "kappa", "s1"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise InvalidParams(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.c == self.a:
            raise InvalidParams(f"c must differ from a (got a = c = {self.a})")
        if self.k_w <= 0:
            raise InvalidParams(f"k_w must be positive, got {self.k_w}")
        if self.kappa < 0:
            raise InvalidParams(f"kappa must be nonnegative, got {self.kappa}")

    def with_(self, **changes):
        """Return a copy with some fields replaced (validated again)."""
        fields = dict(a=self.a, c=self.c, k_w=self.k_w, kappa=self.kappa, s1=self.s1)
        fields.update(changes)
        return ChannelSpec(**fields)


def make_channel(a, c, k_w=1.0, kappa=1.0, s1=0.0):
    """Build a validated :class:`ChannelSpec`; raises ``InvalidParams``."""
    return ChannelSpec(a=a, c=c, k_w=k_w, kappa=kappa, s1=s1)


@dataclass(frozen=True)
class NoisePath:
    """Sampled noise trajectory; index ``t`` holds time ``t + 1``."""

    w: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def n(self):
        return len(self.w)


def sample_noise(spec, n, seed):
    """Draw ``n`` steps of the driving noise, state and ARMA noise.

    ``W_t`` is IID ``N(0, k_w)`` from ``numpy.random.default_rng(seed)``. For
    ``|c| > 1`` the state grows geometrically and overflows to ``inf`` on long
    horizons; the simulator works in error coordinates for that reason.
    """
    n = int(n)
    if n < 1:
        raise InvalidParams(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, np.sqrt(spec.k_w), size=n)
    s = np.empty(n)
    s[0] = spec.s1
    with np.errstate(over="ignore", invalid="ignore"):
        if n > 1:
            # s[t+1] = c*s[t] + w[t]
            s[1:], _ = lfilter([1.0], [1.0, -spec.c], w[:-1], zi=[spec.c * spec.s1])
        v = (spec.c - spec.a) * s + w
    for arr in (w, s, v):
        arr.flags.writeable = False
    return NoisePath(w=w, s=s, v=v)
