import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from armacap import InvalidParams, make_channel, sample_noise


def test_make_channel_ar_spec():
    spec = make_channel(0.0, 0.5, 1.0, 1.0, 0.0)
    assert (spec.a, spec.c, spec.k_w, spec.kappa, spec.s1) == (0.0, 0.5, 1.0, 1.0, 0.0)


def test_make_channel_unstable_spec():
    spec = make_channel(0.2, 1.5, 1.0, 5.0, 0.0)
    assert spec.c == 1.5


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(a=0.2, c=0.2),
        dict(a=0.0, c=0.5, k_w=0.0),
        dict(a=0.0, c=0.5, k_w=-1.0),
        dict(a=0.0, c=0.5, kappa=-0.1),
        dict(a=float("nan"), c=0.5),
    ],
)
def test_make_channel_rejects(kwargs):
    with pytest.raises(InvalidParams):
        make_channel(**kwargs)


def test_driving_noise_variance():
    path = sample_noise(make_channel(0.0, 0.5), 10**5, seed=7)
    var = path.w.var()
    stderr = np.sqrt(2.0 / len(path.w))
    assert abs(var - 1.0) < 3 * stderr


def test_stationary_ar_variance():
    # brute force: average V_t^2 over many independent short paths at large t
    spec = make_channel(0.0, 0.5, 1.0, 1.0, 0.0)
    finals = np.array([sample_noise(spec, 60, seed=s).v[-1] for s in range(4000)])
    brute = float(np.mean(finals**2))
    # one long path, after burn-in
    long = sample_noise(spec, 10**6, seed=11).v[1000:]
    assert abs(long.var() - 4.0 / 3.0) < 0.01
    assert abs(brute - 4.0 / 3.0) < 4 * (4.0 / 3.0) * np.sqrt(2.0 / 4000)


def test_sampling_is_deterministic():
    spec = make_channel(0.3, -0.8, 2.0, 1.0, 0.5)
    p1, p2 = sample_noise(spec, 500, 3), sample_noise(spec, 500, 3)
    assert np.array_equal(p1.w, p2.w) and np.array_equal(p1.s, p2.s) and np.array_equal(p1.v, p2.v)
    assert not np.array_equal(p1.w, sample_noise(spec, 500, 4).w)


def test_initial_state_and_n_validation():
    spec = make_channel(0.3, -0.8, 1.0, 1.0, 2.5)
    assert sample_noise(spec, 1, 0).s[0] == 2.5
    with pytest.raises(InvalidParams):
        sample_noise(spec, 0, 0)


@settings(max_examples=40, deadline=None)
@given(
    a=st.floats(-3, 3),
    c=st.floats(-1.5, 1.5),
    s1=st.floats(-5, 5),
    seed=st.integers(0, 2**31),
)
def test_state_recursion_residuals(a, c, s1, seed):
    if a == c:
        return
    spec = make_channel(a, c, 1.0, 1.0, s1)
    p = sample_noise(spec, 300, seed)
    scale = np.maximum(1.0, np.abs(p.s[1:]))
    assert np.all(np.abs(p.s[1:] - (c * p.s[:-1] + p.w[:-1])) <= 1e-12 * scale)
    assert np.all(np.abs(p.v - ((c - a) * p.s + p.w)) <= 1e-12 * np.maximum(1.0, np.abs(p.v)))


def test_unstable_state_variance_grows():
    spec = make_channel(0.2, 1.5, 1.0, 1.0, 0.0)
    paths = np.array([sample_noise(spec, 41, seed=s).s for s in range(400)])
    times = [5, 10, 20, 40]
    variances = [paths[:, t].var() for t in times]
    assert all(b > a for a, b in zip(variances, variances[1:]))
    assert variances[-1] > 1e6
