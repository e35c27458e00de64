"""Windowed DFT, periodogram, kernel-smoothed spectral matrices, and the
spectral deviation metric used to score candidate change points.

Conventions
-----------
The DFT of a window of N observations carries the normalization
``(2*pi*N)**-0.5`` and uses the absolute time index in the exponent.  The
periodogram at Fourier frequency ``w_j = 2*pi*j/N`` is the rank-1 outer
product of the DFT vector.  Smoothing applies kernel weights on the circular
frequency distance, normalized to sum to one per target frequency, so flat
spectra are reproduced without bias and every smoothed matrix is a convex
combination of periodogram matrices (hence Hermitian PSD).

The deviation statistic at candidate ``tau`` compares the smoothed spectral
matrices of the N observations at each side of ``tau``: it is the Riemann
approximation, on the window's Fourier grid, of the integrated squared
Euclidean norm of their vectorized difference, divided by ``2*pi``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from ._backend import profile_kernel, relative_profile_kernel
from .errors import ConfigError, WindowError
from .series import MultivariateSeries

KernelLike = Union[str, Callable[[np.ndarray], np.ndarray]]

DEFAULT_KERNEL = "epanechnikov"
DEFAULT_BANDWIDTH_CONST = 1.0
MIN_WINDOW = 32
MAX_WINDOW = 256


def epanechnikov(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u**2), 0.0)


def uniform(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 0.5, 0.0)


def triangular(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 1.0 - np.abs(u), 0.0)


_KERNELS = {"epanechnikov": epanechnikov, "uniform": uniform, "triangular": triangular}


def kernel_function(kernel: KernelLike) -> Callable[[np.ndarray], np.ndarray]:
    if callable(kernel):
        return kernel
    try:
        return _KERNELS[kernel]
    except KeyError:
        raise ConfigError(f"unknown kernel {kernel!r}; choose from {sorted(_KERNELS)}") from None


def default_bandwidth(window: int, const: float = DEFAULT_BANDWIDTH_CONST) -> float:
    """Smoothing bandwidth h = const * N**(-1/5)."""
    return const * float(window) ** (-0.2)


def default_window(n_obs: int) -> int:
    """Per-side window: floor(T/6) clamped to [32, 256]."""
    return int(np.clip(n_obs // 6, MIN_WINDOW, MAX_WINDOW))


def fourier_bins(window: int) -> np.ndarray:
    """Integer indices j of the frequencies 2*pi*j/N in FFT bin order."""
    k = np.arange(window)
    return np.where(k <= window // 2, k, k - window)


def smoothing_matrix(window: int, kernel: KernelLike = DEFAULT_KERNEL, bandwidth: float | None = None) -> np.ndarray:
    """Row-stochastic N x N smoothing weights in FFT bin order.

    Entry (j, k) is the kernel weight given to the periodogram at frequency
    ``w_k`` when estimating the smoothed spectrum at ``w_j``; frequency
    differences are wrapped to (-pi, pi] so smoothing respects the
    2*pi-periodicity of the spectrum.
    """
    if bandwidth is None:
        bandwidth = default_bandwidth(window)
    if bandwidth <= 0:
        raise ConfigError(f"bandwidth must be positive, got {bandwidth}")
    func = kernel_function(kernel)
    omegas = 2.0 * np.pi * fourier_bins(window) / window
    diff = omegas[:, None] - omegas[None, :]
    wrapped = np.mod(diff + np.pi, 2.0 * np.pi) - np.pi
    raw = func(wrapped / bandwidth)
    if np.any(raw < 0):
        raise ConfigError("kernel must be nonnegative")
    sums = raw.sum(axis=1, keepdims=True)
    if np.any(sums <= 0):
        raise ConfigError("kernel assigns zero total weight at some frequency")
    return raw / sums


@dataclass(frozen=True)
class SpectralEstimate:
    """Spectral matrices on the window's Fourier grid, sorted by frequency.

    ``matrices[i]`` is the L x L Hermitian PSD estimate at
    ``frequencies[i]``; ``bandwidth`` is None for the raw periodogram.
    """

    frequencies: np.ndarray
    matrices: np.ndarray
    window_length: int
    bandwidth: float | None = None

    def matrix_at(self, omega: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.frequencies - omega)))
        return self.matrices[i]


@dataclass(frozen=True)
class DeviationProfile:
    """Deviation statistic over every admissible candidate index."""

    tau_values: np.ndarray
    d_hat: np.ndarray
    window: int

    def argmax_tau(self) -> int:
        return int(self.tau_values[int(np.argmax(self.d_hat))])


def _check_window(s: MultivariateSeries, lo: int, hi: int) -> int:
    if not (1 <= lo <= hi <= s.n_obs):
        raise WindowError(f"window [{lo}, {hi}] outside series of length {s.n_obs}")
    n = hi - lo + 1
    if n < 2:
        raise WindowError(f"window [{lo}, {hi}] has fewer than 2 observations")
    return n


def dft_window(s: MultivariateSeries, lo: int, hi: int, omega: float) -> np.ndarray:
    """Windowed DFT (2*pi*N)**-0.5 * sum_{t=lo}^{hi} r_t exp(-i*t*omega).

    ``lo`` and ``hi`` are 1-based inclusive positions; the exponent uses the
    absolute time index ``start_index + position - 1``.
    """
    n = _check_window(s, lo, hi)
    times = s.start_index + np.arange(lo - 1, hi)
    phases = np.exp(-1j * omega * times)
    return (phases @ s.values[lo - 1 : hi]) / np.sqrt(2.0 * np.pi * n)


def _window_periodogram_bins(s: MultivariateSeries, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    """Periodogram matrices in FFT bin order plus the bin indices."""
    n = _check_window(s, lo, hi)
    coef = np.fft.fft(s.values[lo - 1 : hi], axis=0) / np.sqrt(2.0 * np.pi * n)
    mats = np.einsum("ja,jb->jab", coef, coef.conj())
    return mats, fourier_bins(n)


def periodogram(s: MultivariateSeries, lo: int, hi: int) -> SpectralEstimate:
    """Raw periodogram I(w_j) = J(w_j) J(w_j)* on the window's Fourier grid."""
    mats, bins = _window_periodogram_bins(s, lo, hi)
    order = np.argsort(bins)
    n = hi - lo + 1
    return SpectralEstimate(
        frequencies=2.0 * np.pi * bins[order] / n,
        matrices=mats[order],
        window_length=n,
    )


def smoothed_spectral_density(
    s: MultivariateSeries,
    lo: int,
    hi: int,
    kernel: KernelLike = DEFAULT_KERNEL,
    bandwidth: float | None = None,
) -> SpectralEstimate:
    """Kernel-smoothed spectral density matrices on the window's Fourier grid."""
    mats, bins = _window_periodogram_bins(s, lo, hi)
    n = hi - lo + 1
    if bandwidth is None:
        bandwidth = default_bandwidth(n)
    weights = smoothing_matrix(n, kernel, bandwidth)
    smoothed = np.einsum("jk,kab->jab", weights, mats)
    order = np.argsort(bins)
    return SpectralEstimate(
        frequencies=2.0 * np.pi * bins[order] / n,
        matrices=smoothed[order],
        window_length=n,
        bandwidth=bandwidth,
    )


def deviation_stat(
    s: MultivariateSeries,
    tau: int,
    window: int,
    kernel: KernelLike = DEFAULT_KERNEL,
    bandwidth: float | None = None,
    relative: bool = False,
) -> float:
    """Deviation statistic at candidate ``tau`` with N = ``window`` per side.

    With ``relative=True`` each entry of the spectral-matrix difference is
    divided by the geometric mean of the two sides' averaged auto-spectra,
    making the statistic invariant to the local scale of the series.
    """
    n = int(window)
    if n < 2:
        raise WindowError(f"window must be >= 2, got {n}")
    if not (n <= tau <= s.n_obs - n):
        raise WindowError(f"tau={tau} outside [{n}, {s.n_obs - n}]")
    weights = smoothing_matrix(n, kernel, bandwidth)
    data = np.ascontiguousarray(s.values[tau - n : tau + n])
    kernel_fn = relative_profile_kernel if relative else profile_kernel
    return float(kernel_fn(data, n, weights)[0])


def deviation_profile(
    s: MultivariateSeries,
    window: int | None = None,
    kernel: KernelLike = DEFAULT_KERNEL,
    bandwidth: float | None = None,
    relative: bool = False,
) -> DeviationProfile:
    """Deviation statistic at every candidate tau in [N, T - N]."""
    n = int(window) if window is not None else default_window(s.n_obs)
    if n < 2:
        raise WindowError(f"window must be >= 2, got {n}")
    if s.n_obs < 2 * n + 1:
        raise WindowError(f"series of length {s.n_obs} too short for window {n} (need >= {2 * n + 1})")
    weights = smoothing_matrix(n, kernel, bandwidth)
    data = np.ascontiguousarray(s.values)
    kernel_fn = relative_profile_kernel if relative else profile_kernel
    d_hat = kernel_fn(data, n, weights)
    return DeviationProfile(tau_values=np.arange(n, s.n_obs - n + 1), d_hat=d_hat, window=n)
