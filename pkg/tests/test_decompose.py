import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonstat import LoessConfig, MultivariateSeries, decompose, loess_trend, seasonal_periodic_mean
from nonstat.errors import ConfigError


def series(values):
    return MultivariateSeries(np.asarray(values, dtype=float))


def test_loess_constant_recovered_exactly():
    s = series(np.full((60, 2), 3.7))
    trend = loess_trend(s)
    assert np.allclose(trend.values, 3.7, atol=1e-10)


def test_loess_reproduces_line():
    t = np.arange(80.0)
    s = series(2.0 * t + 1.0)
    trend = loess_trend(s, LoessConfig(span=0.3, degree=1))
    assert np.max(np.abs(trend.values[:, 0] - (2.0 * t + 1.0))) < 1e-8
    # any span: the local weighted fit is exact on polynomials of the degree
    trend_wide = loess_trend(s, LoessConfig(span=1.0, degree=1))
    assert np.max(np.abs(trend_wide.values[:, 0] - (2.0 * t + 1.0))) < 1e-8


def test_loess_reproduces_quadratic():
    t = np.arange(100.0)
    y = 0.05 * t**2 - 2.0 * t + 4.0
    trend = loess_trend(series(y), LoessConfig(span=0.25, degree=2))
    assert np.max(np.abs(trend.values[:, 0] - y)) < 1e-8


def test_loess_idempotent_on_polynomials():
    t = np.arange(90.0)
    y = 1.5 * t - 7.0
    cfg = LoessConfig(span=0.4, degree=2)
    once = loess_trend(series(y), cfg)
    twice = loess_trend(once, cfg)
    assert np.max(np.abs(twice.values - once.values)) < 1e-8


def test_loess_window_too_small():
    with pytest.raises(ConfigError):
        loess_trend(series(np.arange(10.0)), LoessConfig(span=0.2, degree=2))


def test_loess_robustness_iterations_damp_outlier():
    rng = np.random.default_rng(3)
    t = np.arange(200.0)
    y = 0.5 * t + rng.normal(0, 0.2, 200)
    y[100] += 50.0
    plain = loess_trend(series(y), LoessConfig(span=0.3, degree=1))
    robust = loess_trend(series(y), LoessConfig(span=0.3, degree=1, robustness_iters=2))
    target = 0.5 * t
    mask = np.abs(t - 100) < 15
    err_plain = np.abs(plain.values[mask, 0] - target[mask]).max()
    err_robust = np.abs(robust.values[mask, 0] - target[mask]).max()
    assert err_robust < err_plain


def test_loess_config_validation():
    with pytest.raises(ConfigError):
        LoessConfig(span=0.0)
    with pytest.raises(ConfigError):
        LoessConfig(degree=3)
    with pytest.raises(ConfigError):
        LoessConfig(robustness_iters=-1)


def test_seasonal_zero_series():
    s = series(np.zeros((48, 2)))
    out = seasonal_periodic_mean(s, 12)
    assert np.all(out.values == 0.0)


def test_seasonal_recovers_sinusoid():
    t = np.arange(240)
    y = np.sin(2.0 * np.pi * t / 12.0)
    out = seasonal_periodic_mean(series(y), 12)
    assert np.max(np.abs(out.values[:, 0] - y)) < 1e-8


def test_seasonal_white_noise_amplitude():
    # phase means of noise shrink like the standard error sigma/sqrt(T/P)
    rng = np.random.default_rng(11)
    out = seasonal_periodic_mean(series(rng.standard_normal(2400)), 12)
    assert np.max(np.abs(out.values)) <= 4.0 / np.sqrt(2400 / 12)


def test_seasonal_exactly_periodic_and_centered():
    rng = np.random.default_rng(5)
    s = series(rng.standard_normal((97, 2)))  # length not a multiple of the period
    out = seasonal_periodic_mean(s, 7)
    vals = out.values
    assert np.array_equal(vals[:90], vals[7:97])
    scale = max(1.0, np.abs(vals).max())
    assert np.all(np.abs(vals[:7].sum(axis=0)) <= 1e-9 * 7 * scale)


def test_seasonal_period_validation():
    with pytest.raises(ConfigError):
        seasonal_periodic_mean(series(np.arange(20.0)), 1)
    with pytest.warns(UserWarning, match="periods"):
        seasonal_periodic_mean(series(np.arange(20.0)), 15)


def test_decompose_without_period():
    rng = np.random.default_rng(8)
    s = series(rng.standard_normal((120, 3)))
    parts = decompose(s)
    assert np.all(parts.seasonal.values == 0.0)
    assert np.array_equal(parts.residual.values, s.values - parts.trend.values)


def test_decompose_reconstruction_identity_exact():
    rng = np.random.default_rng(21)
    s = series(rng.standard_normal((144, 2)) * 5.0 + 10.0)
    parts = decompose(s, LoessConfig(span=0.3), period=12)
    recon = s.values - parts.trend.values - parts.seasonal.values - parts.residual.values
    assert np.all(recon == 0.0)


@given(
    seed=st.integers(0, 10_000),
    t=st.integers(30, 120),
    l=st.integers(1, 3),
    scale=st.floats(1e-3, 1e6),
    use_period=st.booleans(),
)
@settings(max_examples=40, deadline=None)
def test_reconstruction_identity_property(seed, t, l, scale, use_period):
    rng = np.random.default_rng(seed)
    s = series(scale * rng.standard_normal((t, l)))
    parts = decompose(s, period=12 if use_period else None)
    recon = s.values - parts.trend.values - parts.seasonal.values - parts.residual.values
    assert np.all(recon == 0.0)


def test_decompose_day_of_subhourly_needs_no_seasonal():
    # one day of 5-minute data: decompose defaults leave the seasonal term out
    rng = np.random.default_rng(4)
    t = np.arange(288.0)
    s = series(8.0 + 3.0 * np.sin(2 * np.pi * t / 288.0) + rng.normal(0, 0.5, 288))
    parts = decompose(s)
    assert np.all(parts.seasonal.values == 0.0)
    assert parts.residual.values.std() < s.values.std()
