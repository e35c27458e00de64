"""Pure numpy implementation of the deviation-profile kernels.

This is the fallback used when the compiled extension is unavailable; both
backends share the same contract:

    deviation_profile(data, window, weights)          -> (T - 2N + 1,)
    relative_deviation_profile(data, window, weights) -> (T - 2N + 1,)

``data`` is the T x L residual matrix, ``window`` the per-side length N and
``weights`` the N x N row-stochastic smoothing matrix in FFT-bin order.
Entry ``tau - N`` compares the kernel-smoothed spectral matrices of the
windows ``(tau - N, tau]`` and ``(tau, tau + N]``: the plain profile is the
mean over Fourier frequencies of the squared Frobenius norm of their
difference; the relative profile divides each entry of the difference by
the geometric mean of the two sides' averaged auto-spectra first, which
makes the null level invariant to the local scale of the series.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def window_periodograms(data: np.ndarray, window: int) -> np.ndarray:
    """Periodogram matrices for every sliding window of ``data``.

    Returns a complex array of shape (T - N + 1, N, L, L): one L x L
    rank-1 Hermitian matrix per window per FFT bin.
    """
    n = int(window)
    wins = np.lib.stride_tricks.sliding_window_view(data, n, axis=0)  # (n_win, L, N)
    coef = np.fft.fft(wins, axis=-1) / np.sqrt(2.0 * np.pi * n)  # J[w, a, j]
    return np.einsum("waj,wbj->wjab", coef, coef.conj())


def smoothed_window_matrices(data: np.ndarray, window: int, weights: np.ndarray) -> np.ndarray:
    """Kernel-smoothed spectral matrices for every sliding window."""
    pgram = window_periodograms(data, window)
    return np.einsum("jk,wkab->wjab", weights, pgram, optimize=True)


def _sides(data: np.ndarray, window: int, weights: np.ndarray):
    n = int(window)
    t = data.shape[0]
    n_tau = t - 2 * n + 1
    if n_tau < 1:
        raise ValueError(f"series of length {t} too short for window {n}")
    smoothed = smoothed_window_matrices(data, n, weights)
    # Left window of tau starts at row tau - N, right window at row tau.
    return smoothed[:n_tau], smoothed[n:]


def deviation_profile(data: np.ndarray, window: int, weights: np.ndarray) -> np.ndarray:
    left, right = _sides(data, window, weights)
    diff = left - right
    return np.einsum("wjab,wjab->w", diff, diff.conj()).real / int(window)


def relative_deviation_profile(data: np.ndarray, window: int, weights: np.ndarray) -> np.ndarray:
    left, right = _sides(data, window, weights)
    diff = left - right
    avg_diag = 0.5 * (
        np.einsum("wjaa->wja", left).real + np.einsum("wjaa->wja", right).real
    )
    scale_sq = avg_diag[:, :, :, None] * avg_diag[:, :, None, :]
    ratio = np.zeros_like(scale_sq)
    np.divide(np.abs(diff) ** 2, scale_sq, out=ratio, where=scale_sq > 0.0)
    return ratio.sum(axis=(1, 2, 3)) / int(window)
