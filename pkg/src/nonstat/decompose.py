"""Trend and seasonal removal so downstream analysis runs on residuals.

The additive model is ``observed = trend + seasonal + residual``.  Trend is
estimated per component with locally weighted polynomial regression (tricube
weights, optional bisquare robustness passes); the seasonal term with
phase-wise means of the detrended series.  The residual is defined by
subtraction, so the reconstruction identity holds exactly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .series import MultivariateSeries


@dataclass(frozen=True)
class LoessConfig:
    """Local regression settings.

    span is the fraction of points in each local window, degree the local
    polynomial degree (1 or 2), robustness_iters the number of bisquare
    reweighting passes.
    """

    span: float = 0.25
    degree: int = 2
    robustness_iters: int = 0

    def __post_init__(self):
        if not 0.0 < self.span <= 1.0:
            raise ConfigError(f"span must be in (0, 1], got {self.span}")
        if self.degree not in (1, 2):
            raise ConfigError(f"degree must be 1 or 2, got {self.degree}")
        if self.robustness_iters < 0:
            raise ConfigError(f"robustness_iters must be >= 0, got {self.robustness_iters}")


@dataclass(frozen=True)
class Decomposition:
    trend: MultivariateSeries
    seasonal: MultivariateSeries
    residual: MultivariateSeries
    period: int | None = None


def _loess_column(y: np.ndarray, q: int, degree: int, robustness_iters: int) -> np.ndarray:
    n = y.shape[0]
    t = np.arange(n, dtype=float)
    starts = np.clip(np.arange(n) - (q - 1) // 2, 0, n - q)
    idx = starts[:, None] + np.arange(q)[None, :]  # (n, q) window members
    dist = idx - np.arange(n)[:, None].astype(float)
    dmax = np.abs(dist).max(axis=1)
    u = np.abs(dist) / dmax[:, None]
    w = np.where(u < 1.0, (1.0 - u**3) ** 3, 0.0)
    # Tiny windows can leave fewer active points than coefficients; fall
    # back to an unweighted local fit there.
    degenerate = (w > 0).sum(axis=1) < degree + 1
    if degenerate.any():
        w[degenerate] = 1.0

    # Powers of the window offsets scaled to [-1, 1] for conditioning.
    z = dist / dmax[:, None]
    powers = np.stack([z**k for k in range(degree + 1)], axis=-1)  # (n, q, deg+1)
    y_win = y[idx]

    robust = np.ones_like(w)
    fitted = np.empty(n)
    for iteration in range(robustness_iters + 1):
        wt = w * robust
        a = np.einsum("nq,nqj,nqk->njk", wt, powers, powers)
        b = np.einsum("nq,nqj,nq->nj", wt, powers, y_win)
        beta = np.linalg.solve(a, b[..., None])[..., 0]
        fitted = beta[:, 0]  # window offsets are centered at the target point
        if iteration == robustness_iters:
            break
        resid = y - fitted
        s = np.median(np.abs(resid))
        if s <= 0:
            break
        r = np.clip(resid / (6.0 * s), -1.0, 1.0)
        robust = ((1.0 - r**2) ** 2)[idx]
    return fitted


def loess_trend(s: MultivariateSeries, cfg: LoessConfig | None = None) -> MultivariateSeries:
    """Per-component loess smooth of ``s`` with tricube weights.

    Windows are the nearest span*T points and truncate at the series ends.
    Raises ConfigError when the window cannot hold a degree-`d` fit.
    """
    cfg = cfg or LoessConfig()
    n = s.n_obs
    q = min(n, int(math.ceil(cfg.span * n)))
    if q < cfg.degree + 2:
        raise ConfigError(
            f"window of {q} points too small for degree {cfg.degree} (need >= {cfg.degree + 2})"
        )
    out = np.column_stack(
        [_loess_column(s.values[:, j], q, cfg.degree, cfg.robustness_iters) for j in range(s.n_components)]
    )
    return s.with_values(out)


def seasonal_periodic_mean(s: MultivariateSeries, period: int) -> MultivariateSeries:
    """Phase-wise means tiled to the series length, centered over one period.

    The input should already be detrended; the estimate for phase ``k`` is
    the mean of observations at positions congruent to ``k`` mod ``period``,
    shifted so the pattern sums to zero over one period.
    """
    if period <= 1:
        raise ConfigError(f"period must be >= 2, got {period}")
    n = s.n_obs
    if n < 2 * period:
        warnings.warn(
            f"series length {n} < 2 periods of {period}; seasonal estimate is noisy", stacklevel=2
        )
    phases = np.arange(n) % period
    pattern = np.empty((period, s.n_components))
    for k in range(period):
        pattern[k] = s.values[phases == k].mean(axis=0)
    pattern -= pattern.mean(axis=0)
    return s.with_values(pattern[phases])


def decompose(
    s: MultivariateSeries,
    cfg: LoessConfig | None = None,
    period: int | None = None,
) -> Decomposition:
    """Split ``s`` into trend + seasonal + residual.

    Trend comes from :func:`loess_trend`; the seasonal term from
    :func:`seasonal_periodic_mean` on the detrended series when ``period``
    is given, else it is zero.  The residual is the exact remainder.
    """
    trend = loess_trend(s, cfg)
    detrended = s.values - trend.values
    if period is not None:
        seasonal = seasonal_periodic_mean(s.with_values(detrended), period)
    else:
        seasonal = s.with_values(np.zeros_like(detrended))
    residual = s.with_values(detrended - seasonal.values)
    return Decomposition(trend=trend, seasonal=seasonal, residual=residual, period=period)
