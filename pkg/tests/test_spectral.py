import numpy as np
import pytest

from nonstat import MultivariateSeries, deviation_profile, deviation_stat, dft_window, periodogram
from nonstat.errors import ConfigError, WindowError
from nonstat.spectral import (
    default_window,
    smoothed_spectral_density,
    smoothing_matrix,
)


def series(values):
    return MultivariateSeries(np.asarray(values, dtype=float))


def rand_series(seed, t, l):
    return series(np.random.default_rng(seed).standard_normal((t, l)))


class TestDftWindow:
    def test_zero_series(self):
        s = series(np.zeros((50, 2)))
        for omega in (0.1, 1.0, np.pi / 2):
            assert np.allclose(dft_window(s, 5, 20, omega), 0.0)

    def test_constant_series_vanishes_at_fourier_frequencies(self):
        # geometric sum over N consecutive integers vanishes off the zero bin
        n = 16
        s = series(np.ones(40))
        for k in (1, 3, 7, 15):
            val = dft_window(s, 3, 3 + n - 1, 2.0 * np.pi * k / n)
            assert abs(val[0]) < 1e-10

    def test_cosine_amplitude(self):
        n = 64
        omega_k = 2.0 * np.pi * 5 / n
        t = np.arange(1, n + 1)
        s = series(np.cos(omega_k * t))
        val = dft_window(s, 1, n, omega_k)
        assert abs(abs(val[0]) ** 2 - n / (8.0 * np.pi)) < 1e-8

    def test_window_validation(self):
        s = series(np.ones(10))
        with pytest.raises(WindowError):
            dft_window(s, 0, 5, 0.3)
        with pytest.raises(WindowError):
            dft_window(s, 4, 11, 0.3)
        with pytest.raises(WindowError):
            dft_window(s, 4, 4, 0.3)


class TestPeriodogram:
    def test_parseval(self):
        s = rand_series(7, 100, 3)
        lo, hi = 11, 42
        n = hi - lo + 1
        est = periodogram(s, lo, hi)
        lhs = (2.0 * np.pi / n) * est.matrices.sum(axis=0)
        w = s.values[lo - 1 : hi]
        rhs = np.einsum("ta,tb->ab", w, w) / n
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    def test_zero_series(self):
        est = periodogram(series(np.zeros((30, 2))), 1, 16)
        assert np.all(est.matrices == 0.0)

    def test_rank_one(self):
        est = periodogram(rand_series(3, 64, 3), 1, 32)
        for mat in est.matrices:
            eig = np.linalg.eigvalsh(mat)
            assert eig[-2] <= 1e-10 * max(np.trace(mat).real, 1e-300)

    def test_frequency_grid(self):
        est = periodogram(rand_series(5, 20, 1), 1, 8)
        js = np.round(est.frequencies * 8 / (2 * np.pi)).astype(int)
        assert list(js) == [-3, -2, -1, 0, 1, 2, 3, 4]


def hermitian_psd_conjugate_checks(est):
    mats = est.matrices
    herm = np.abs(mats - mats.conj().transpose(0, 2, 1)).max()
    norm = np.abs(mats).max()
    assert herm <= 1e-12 * max(norm, 1e-300)
    for mat in mats:
        eig = np.linalg.eigvalsh(mat)
        assert eig[0] >= -1e-10 * max(np.trace(mat).real, 1e-300)
    freqs = est.frequencies
    for i, w in enumerate(freqs):
        j = int(np.argmin(np.abs(freqs + w)))
        if abs(freqs[j] + w) < 1e-12:
            assert np.allclose(mats[i], mats[j].conj(), atol=1e-12 * max(norm, 1e-300))


class TestSmoothedDensity:
    def test_hermitian_psd_conjugate_invariants(self):
        for seed in range(5):
            est = smoothed_spectral_density(rand_series(seed, 80, 2), 1, 64)
            hermitian_psd_conjugate_checks(est)

    def test_white_noise_level(self):
        targets = []
        for seed in range(20):
            est = smoothed_spectral_density(rand_series(seed, 512, 1), 1, 512)
            targets.append(est.matrices[:, 0, 0].real)
        avg = np.mean(targets, axis=0)
        assert np.all(np.abs(avg - 1.0 / (2.0 * np.pi)) <= 0.15)

    def test_uniform_kernel_gives_lag_zero_moment(self):
        s = rand_series(11, 64, 2)
        est = smoothed_spectral_density(s, 1, 64, kernel="uniform", bandwidth=np.pi)
        w = s.values
        lag0 = np.einsum("ta,tb->ab", w, w) / 64
        expected = lag0 / (2.0 * np.pi)
        assert np.allclose(est.matrices, expected[None], atol=1e-12)
        spread = np.abs(est.matrices - est.matrices[0][None]).max()
        assert spread < 1e-12

    def test_bandwidth_validation(self):
        with pytest.raises(ConfigError):
            smoothed_spectral_density(rand_series(0, 40, 1), 1, 32, bandwidth=0.0)
        with pytest.raises(ConfigError):
            smoothing_matrix(16, kernel="nope")


class TestDeviationStat:
    def test_identical_windows_give_zero(self):
        rng = np.random.default_rng(2)
        block = rng.standard_normal((32, 2))
        s = series(np.vstack([block, block]))
        assert deviation_stat(s, 32, 32) < 1e-12

    def test_variance_break_closed_form(self):
        # white-noise spectra are sigma^2/(2*pi), so the integrated squared
        # difference is (1 - 4)^2 / (4*pi^2) for a 1 -> 4 variance break
        target = 9.0 / (4.0 * np.pi**2)
        vals = []
        for seed in range(50):
            g = np.random.default_rng(seed)
            x = np.concatenate([g.standard_normal(256), 2.0 * g.standard_normal(256)])
            vals.append(deviation_stat(series(x), 256, 256))
        assert abs(np.mean(vals) - target) <= 0.25 * target

    def test_nonnegative_and_range_checked(self):
        s = rand_series(9, 100, 2)
        assert deviation_stat(s, 50, 40) >= 0.0
        with pytest.raises(WindowError):
            deviation_stat(s, 30, 40)
        with pytest.raises(WindowError):
            deviation_stat(s, 80, 40)

    def test_swap_symmetry(self):
        rng = np.random.default_rng(4)
        a, b = rng.standard_normal((40, 2)), 2.0 * rng.standard_normal((40, 2))
        fwd = deviation_stat(series(np.vstack([a, b])), 40, 40)
        rev = deviation_stat(series(np.vstack([b, a])), 40, 40)
        assert np.isclose(fwd, rev, rtol=1e-10)


class TestDeviationProfile:
    def test_profile_length_and_taus(self):
        s = rand_series(1, 300, 1)
        p = deviation_profile(s, 64)
        assert len(p.d_hat) == 300 - 128 + 1
        assert p.tau_values[0] == 64 and p.tau_values[-1] == 300 - 64

    def test_stationary_profile_has_no_dominant_peak(self):
        # five-component white noise, the typical multi-site dimensionality
        ok = 0
        for seed in range(50):
            p = deviation_profile(rand_series(1000 + seed, 600, 5), 64)
            if p.d_hat.max() <= 3.0 * np.median(p.d_hat):
                ok += 1
        assert ok >= 45

    def test_variance_break_argmax_localized(self):
        # relative profile: the raw statistic's null level follows the local
        # scale, so the normalized variant is the one that localizes
        ok = 0
        for seed in range(50):
            g = np.random.default_rng(2000 + seed)
            y = np.vstack([g.standard_normal((300, 2)), 2.0 * g.standard_normal((300, 2))])
            p = deviation_profile(series(y), 64, relative=True)
            if abs(p.argmax_tau() - 300) <= 16:
                ok += 1
        assert ok >= 45

    def test_too_short_series(self):
        with pytest.raises(WindowError):
            deviation_profile(rand_series(0, 128, 1), 64)

    def test_scaling_fourth_power(self):
        s = rand_series(31, 200, 2)
        scaled = series(2.0 * s.values)
        p = deviation_profile(s, 48)
        q = deviation_profile(scaled, 48)
        assert np.array_equal(q.d_hat, 16.0 * p.d_hat)

    def test_relative_profile_scale_invariant(self):
        s = rand_series(13, 200, 2)
        p = deviation_profile(s, 48, relative=True)
        q = deviation_profile(series(2.0 * s.values), 48, relative=True)
        assert np.array_equal(p.d_hat, q.d_hat)

    def test_default_window(self):
        assert default_window(600) == 100
        assert default_window(60) == 32
        assert default_window(10_000) == 256


def test_periodogram_scaling_square():
    s = rand_series(17, 80, 2)
    est1 = periodogram(s, 1, 64)
    est2 = periodogram(series(3.0 * s.values), 1, 64)
    assert np.allclose(est2.matrices, 9.0 * est1.matrices, rtol=1e-12)
