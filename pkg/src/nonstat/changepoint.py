"""Sequential significance-tested covariance change point detection.

Candidates are scored by the scale-normalized spectral deviation profile
(division by the local auto-spectra level keeps the null level comparable
between low- and high-variance stretches, which the raw statistic is not);
significance is calibrated by a stationary bootstrap of the whole series,
which destroys location-specific covariance changes while preserving
short-range dependence.  The largest remaining statistic is accepted while
it exceeds the null threshold, an exclusion zone of one window is masked
around each accepted point, and detection stops at the first
non-significant candidate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._backend import relative_profile_kernel
from ._parallel import run_indexed
from .errors import ConfigError, WindowError
from .segsim import Segment, average_block_length
from .series import MultivariateSeries
from .spectral import (
    DEFAULT_KERNEL,
    DeviationProfile,
    KernelLike,
    default_window,
    deviation_profile,
    smoothing_matrix,
)


@dataclass(frozen=True)
class ChangePointResult:
    """Accepted change points with their statistics and the test threshold."""

    change_points: tuple[int, ...]
    statistics: tuple[float, ...]
    threshold: float
    alpha: float
    window: int
    profile: DeviationProfile
    seed: int

    @property
    def n_points(self) -> int:
        return len(self.change_points)

    def to_dict(self) -> dict:
        return {
            "change_points": list(self.change_points),
            "alpha": self.alpha,
            "window": self.window,
            "statistics": list(self.statistics),
            "threshold": self.threshold,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def stationary_bootstrap_indices(rng: np.random.Generator, n: int, mean_block: float) -> np.ndarray:
    """Wrap-around resampling indices with geometric block lengths."""
    p = 1.0 / max(1.0, float(mean_block))
    idx = np.empty(n, dtype=np.intp)
    pos = 0
    while pos < n:
        start = int(rng.integers(0, n))
        length = min(int(rng.geometric(p)), n - pos)
        idx[pos : pos + length] = (start + np.arange(length)) % n
        pos += length
    return idx


def null_threshold(
    r: MultivariateSeries,
    alpha: float,
    window: int | None = None,
    n_boot: int = 200,
    seed: int = 0,
    kernel: KernelLike = DEFAULT_KERNEL,
    bandwidth: float | None = None,
    mean_block: float | None = None,
    threads: int | None = None,
) -> float:
    """Empirical (1 - alpha) quantile of the bootstrap null max statistic.

    Each replicate resamples the whole series by stationary bootstrap
    (expected block length from the automatic selector), recomputes the
    scale-normalized deviation profile, and records its maximum.
    Replicates draw from RNG streams seeded by (seed, replicate), so the
    result is deterministic and independent of thread scheduling.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    if n_boot < 100:
        raise ConfigError(f"need n_boot >= 100 for a usable quantile, got {n_boot}")
    n = int(window) if window is not None else default_window(r.n_obs)
    t_len = r.n_obs
    if t_len < 2 * n + 1:
        raise WindowError(f"series of length {t_len} too short for window {n}")
    weights = smoothing_matrix(n, kernel, bandwidth)
    data = np.ascontiguousarray(r.values)
    if mean_block is None:
        # Blocks that fill a meaningful fraction of an estimation window let
        # resampled series keep the very window-scale structure the null
        # must destroy (the selector can return window-scale lengths on
        # piecewise inputs), so cap at an eighth of the window.
        mean_block = min(average_block_length(data), max(4.0, n / 8.0))

    def one_max(i: int) -> float:
        rng = np.random.default_rng((seed, i))
        idx = stationary_bootstrap_indices(rng, t_len, mean_block)
        return float(relative_profile_kernel(np.ascontiguousarray(data[idx]), n, weights).max())

    maxima = np.array(run_indexed(one_max, n_boot, threads))
    return float(np.quantile(maxima, 1.0 - alpha))


def _sequential_accept(
    tau_values: np.ndarray, d_hat: np.ndarray, threshold: float, separation: int
) -> tuple[list[int], list[float]]:
    live = np.ones(d_hat.shape[0], dtype=bool)
    accepted: list[int] = []
    stats: list[float] = []
    while live.any():
        masked = np.where(live, d_hat, -np.inf)
        i = int(np.argmax(masked))
        if not masked[i] > threshold:
            break
        tau = int(tau_values[i])
        accepted.append(tau)
        stats.append(float(d_hat[i]))
        live &= np.abs(tau_values - tau) > separation
    order = np.argsort(accepted)
    return [accepted[k] for k in order], [stats[k] for k in order]


def detect_changepoints(
    r: MultivariateSeries,
    alpha: float = 0.05,
    window: int | None = None,
    *,
    n_boot: int = 200,
    seed: int = 0,
    kernel: KernelLike = DEFAULT_KERNEL,
    bandwidth: float | None = None,
    min_separation: int | None = None,
    threads: int | None = None,
) -> ChangePointResult:
    """Detect covariance change points on a residual series.

    Returns the sorted accepted points; no two are within ``min_separation``
    (default: the window length) of each other.  Deterministic for a given
    (input, alpha, window, seed).
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    n = int(window) if window is not None else default_window(r.n_obs)
    profile = deviation_profile(r, n, kernel, bandwidth, relative=True)
    threshold = null_threshold(
        r, alpha, n, n_boot=n_boot, seed=seed, kernel=kernel, bandwidth=bandwidth, threads=threads
    )
    separation = int(min_separation) if min_separation is not None else n
    points, stats = _sequential_accept(profile.tau_values, profile.d_hat, threshold, separation)
    return ChangePointResult(
        change_points=tuple(points),
        statistics=tuple(stats),
        threshold=threshold,
        alpha=alpha,
        window=n,
        profile=profile,
        seed=seed,
    )


def segment(r: MultivariateSeries, cps: ChangePointResult | tuple[int, ...]) -> list[Segment]:
    """Split the series into the M + 1 segments (tau_k, tau_k+1] tiling (0, T]."""
    points = cps.change_points if isinstance(cps, ChangePointResult) else tuple(cps)
    t_len = r.n_obs
    bounds = [0, *points, t_len]
    for lo, hi in zip(bounds, bounds[1:]):
        if not 0 <= lo < hi <= t_len:
            raise ConfigError(f"change points {points} do not partition (0, {t_len}]")
    return [Segment(lo, hi, r.values[lo:hi]) for lo, hi in zip(bounds, bounds[1:])]
