"""Per-segment simulation: parametric VAR(p) and moving-block bootstrap.

A stationary segment is either fitted with a least-squares vector
autoregression and simulated by resampling its empirical innovations, or
resampled nonparametrically in contiguous blocks.  The parametric branch is
taken when the AIC-selected order is below the cutoff (default 5).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InsufficientData, RankDeficient, UnstableModel


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Segment:
    """Rows ``(lo, hi]`` of a series: data[k] is observation lo + 1 + k."""

    lo: int
    hi: int
    data: np.ndarray

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got ({self.lo}, {self.hi}]")
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.shape[0] != self.hi - self.lo:
            raise ValueError(f"({self.lo}, {self.hi}] expects {self.hi - self.lo} rows, got {data.shape[0]}")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def length(self) -> int:
        return self.hi - self.lo

    @property
    def n_components(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class VarModel:
    """Least-squares VAR(p) fit of one segment.

    ``coefficients[i]`` is the L x L matrix applied to lag i + 1;
    ``residuals`` holds the empirical innovations reused for simulation.
    """

    order: int
    coefficients: np.ndarray  # (p, L, L)
    intercept: np.ndarray  # (L,)
    residuals: np.ndarray  # (n - p, L)
    segment_length: int

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _frozen(self.coefficients))
        object.__setattr__(self, "intercept", _frozen(self.intercept))
        object.__setattr__(self, "residuals", _frozen(self.residuals))

    @property
    def n_components(self) -> int:
        return self.intercept.shape[0]

    def companion_spectral_radius(self) -> float:
        p, l = self.order, self.n_components
        if p == 0:
            return 0.0
        comp = np.zeros((p * l, p * l))
        for i in range(p):
            comp[:l, i * l : (i + 1) * l] = self.coefficients[i]
        if p > 1:
            comp[l:, : (p - 1) * l] = np.eye((p - 1) * l)
        return float(np.max(np.abs(np.linalg.eigvals(comp))))

    def is_stable(self) -> bool:
        return self.companion_spectral_radius() < 1.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "order": self.order,
                "intercept": list(self.intercept),
                "coefficients": [[list(row) for row in w] for w in self.coefficients],
                "segment_length": self.segment_length,
                "n_innovations": int(self.residuals.shape[0]),
            },
            sort_keys=True,
        )


@dataclass(frozen=True)
class BootstrapSampler:
    """Moving-block resampler over one segment."""

    source: Segment
    block_length: int

    def __post_init__(self):
        if not 1 <= self.block_length <= self.source.length:
            raise ConfigError(
                f"block length {self.block_length} outside [1, {self.source.length}]"
            )


def _lag_matrix(data: np.ndarray, p: int, offset: int) -> np.ndarray:
    """Regressors [1, r_{t-1}, ..., r_{t-p}] for t = offset .. n-1."""
    n, l = data.shape
    x = np.empty((n - offset, 1 + p * l))
    x[:, 0] = 1.0
    for i in range(1, p + 1):
        x[:, 1 + (i - 1) * l : 1 + i * l] = data[offset - i : n - i]
    return x


def fit_var(seg: Segment, p: int) -> VarModel:
    """Multivariate least squares of r_t on its p lagged values.

    Raises RankDeficient when the regressor matrix is singular (e.g. a
    constant segment) and InsufficientData when there are not strictly more
    usable observations than regressors.
    """
    if p < 0:
        raise ConfigError(f"order must be >= 0, got {p}")
    data = seg.data
    n, l = data.shape
    if n - p < p * l + 2:
        raise InsufficientData(f"{n} observations cannot support VAR({p}) in {l} dimensions")
    if n < 3 * (p * l + 1):
        warnings.warn(
            f"only {n} observations for {p * l * l + l} VAR({p}) parameters; estimates are noisy",
            stacklevel=2,
        )
    x = _lag_matrix(data, p, p)
    y = data[p:]
    coef, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    if rank < x.shape[1]:
        raise RankDeficient(f"regressor matrix has rank {rank} < {x.shape[1]}")
    resid = y - x @ coef
    return VarModel(
        order=p,
        coefficients=coef[1:].reshape(p, l, l).transpose(0, 2, 1) if p else np.empty((0, l, l)),
        intercept=coef[0],
        residuals=resid,
        segment_length=n,
    )


def select_order(seg: Segment, p_max: int | None = None, criterion: str = "aic") -> int:
    """Smallest information-criterion-minimizing VAR order in 0..p_max.

    All candidate orders are scored on the common sample t > p_max so the
    criteria are comparable; AIC(p) = m log det(Sigma_p) + 2(pL^2 + L) with
    Sigma_p the innovation covariance at order p.
    """
    if criterion not in ("aic", "bic"):
        raise ConfigError(f"criterion must be 'aic' or 'bic', got {criterion!r}")
    data = seg.data
    n, l = data.shape
    if p_max is None:
        p_max = min(10, (n - 1) // (3 * l))
    if p_max < 0:
        raise ConfigError(f"p_max must be >= 0, got {p_max}")
    while p_max > 0 and n - p_max < p_max * l + 2:
        p_max -= 1
    m = n - p_max
    if m < 2:
        raise InsufficientData(f"segment of {n} rows cannot score any VAR order")

    y = data[p_max:]
    best_p, best_score = None, np.inf
    for p in range(p_max + 1):
        x = _lag_matrix(data, p, p_max)
        coef, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
        if rank < x.shape[1]:
            continue
        resid = y - x @ coef
        sigma = resid.T @ resid / m
        sign, logdet = np.linalg.slogdet(sigma)
        loglik_term = m * logdet if sign > 0 else -np.inf
        n_params = p * l * l + l
        penalty = 2.0 * n_params if criterion == "aic" else math.log(m) * n_params
        score = loglik_term + penalty
        if score < best_score:
            best_p, best_score = p, score
        elif best_p is None:
            best_p, best_score = p, score
    if best_p is None:
        raise InsufficientData("no VAR order could be evaluated")
    return best_p


def simulate_var(model: VarModel, length: int, seed) -> Segment:
    """Simulate the VAR recursion with innovations resampled from the fit.

    Starts from zero lags and discards a burn-in of 10p steps; deterministic
    for a given seed.
    """
    if length < 1:
        raise ConfigError(f"length must be >= 1, got {length}")
    radius = model.companion_spectral_radius()
    if radius >= 1.0:
        raise UnstableModel(f"companion spectral radius {radius:.6g} >= 1")
    p, l = model.order, model.n_components
    rng = np.random.default_rng(seed)
    burn = 10 * p
    total = burn + length
    draws = rng.integers(0, model.residuals.shape[0], size=total)
    innov = model.residuals[draws]
    if p == 0:
        return Segment(0, length, model.intercept + innov[burn:])
    out = np.zeros((p + total, l))
    for t in range(total):
        acc = model.intercept + innov[t]
        for i in range(p):
            acc = acc + model.coefficients[i] @ out[p + t - 1 - i]
        out[p + t] = acc
    return Segment(0, length, out[p + burn :])


def _pw_block_length(x: np.ndarray) -> float:
    """Automatic block length for one component (Politis-White style rule,
    with the flat-top lag window and the moving/circular-block constant)."""
    n = x.shape[0]
    eps = x - x.mean()
    b_max = float(np.ceil(min(3.0 * math.sqrt(n), n / 3.0)))
    kn = max(5, int(math.log10(n)))
    m_max = int(math.ceil(math.sqrt(n))) + kn
    cv = 2.0 * math.sqrt(math.log10(n) / n)
    acv = np.zeros(m_max + 1)
    abs_acorr = np.zeros(m_max + 1)
    opt_m = None
    for i in range(m_max + 1):
        v1 = eps[i + 1 :] @ eps[i + 1 :]
        v2 = eps[: n - (i + 1)] @ eps[: n - (i + 1)]
        cross = eps[i:] @ eps[: n - i]
        acv[i] = cross / n
        abs_acorr[i] = abs(cross) / math.sqrt(v1 * v2) if v1 > 0 and v2 > 0 else 0.0
        if i >= kn and opt_m is None and np.all(abs_acorr[i - kn : i] < cv):
            opt_m = i - kn
    m = min(2 * max(opt_m, 1) if opt_m is not None else m_max, m_max)

    g = 0.0
    lr_acv = acv[0]
    for k in range(1, m + 1):
        lam = 1.0 if k / m <= 0.5 else 2.0 * (1.0 - k / m)
        g += 2.0 * lam * k * acv[k]
        lr_acv += 2.0 * lam * acv[k]
    if lr_acv <= 0:
        return 1.0
    d_cb = 4.0 / 3.0 * lr_acv**2
    b = (2.0 * g**2 / d_cb) ** (1.0 / 3.0) * n ** (1.0 / 3.0)
    return float(np.clip(b, 1.0, b_max))


def average_block_length(values: np.ndarray) -> float:
    """Mean of the per-component automatic block lengths, clamped to n/3."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[0] < 20:
        raise InsufficientData(f"need >= 20 observations, got {values.shape[0]}")
    per_component = [_pw_block_length(values[:, j]) for j in range(values.shape[1])]
    return float(np.clip(np.mean(per_component), 1.0, max(1.0, values.shape[0] / 3.0)))


def block_length(seg: Segment) -> int:
    """Averaged automatic block length, rounded half-up, within [1, n/3]."""
    avg = average_block_length(seg.data)
    b = int(math.floor(avg + 0.5))
    return int(np.clip(b, 1, max(1, seg.length // 3)))


def block_bootstrap(sampler: BootstrapSampler, length: int, seed) -> Segment:
    """Moving-block bootstrap: whole rows are copied in contiguous blocks of
    b with uniformly random starts, then truncated to ``length``."""
    if length < 1:
        raise ConfigError(f"length must be >= 1, got {length}")
    src = sampler.source.data
    n, b = src.shape[0], sampler.block_length
    rng = np.random.default_rng(seed)
    n_blocks = -(-length // b)
    starts = rng.integers(0, n - b + 1, size=n_blocks)
    out = np.concatenate([src[s : s + b] for s in starts], axis=0)[:length]
    return Segment(0, length, out)


@dataclass(frozen=True)
class SegmentSimulation:
    """One simulated segment plus how it was produced."""

    segment: Segment
    method: str  # "var(p)" or "bootstrap(b)"
    order: int
    block_len: int | None = None


def simulate_segment(
    seg: Segment,
    p_max: int | None = None,
    seed=0,
    order_cutoff: int = 5,
) -> SegmentSimulation:
    """Simulate one stationary segment by the order-based branch rule.

    The AIC order p is selected first; below ``order_cutoff`` the segment is
    simulated from the fitted VAR(p), otherwise by moving-block bootstrap
    with the automatic block length.  Output length equals the segment's.
    """
    n = seg.length
    if n < 20:
        raise InsufficientData(f"segment of {n} rows too short to simulate (need >= 20)")
    p = select_order(seg, p_max)
    if p < order_cutoff:
        model = fit_var(seg, p)
        sim = simulate_var(model, n, seed)
        return SegmentSimulation(Segment(seg.lo, seg.hi, sim.data), f"var({p})", p)
    b = block_length(seg)
    sim = block_bootstrap(BootstrapSampler(seg, b), n, seed)
    return SegmentSimulation(Segment(seg.lo, seg.hi, sim.data), f"bootstrap({b})", p, b)
