"""End-to-end wind simulation: decompose, detect change points, simulate
each stationary segment, reassemble, and re-add trend and seasonal terms.

Each segment's model (VAR below the order cutoff, block bootstrap at or
above it) is chosen and fitted once from the original data; the N requested
simulations then draw from per-(simulation, segment) RNG streams derived
from the master seed, so bundles are bit-reproducible and simulations can
run concurrently.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._backend import BACKEND
from ._parallel import run_indexed
from .changepoint import ChangePointResult, detect_changepoints, segment
from .decompose import Decomposition, LoessConfig, decompose
from .errors import ConfigError
from .segsim import (
    BootstrapSampler,
    Segment,
    block_bootstrap,
    block_length,
    fit_var,
    select_order,
    simulate_var,
)
from .series import MultivariateSeries, write_csv
from .spectral import DEFAULT_KERNEL, KernelLike, default_bandwidth

MIN_SEGMENT_FOR_MODEL = 20


@dataclass(frozen=True)
class SimulationBundle:
    """Original decomposition/detection plus the simulated realizations."""

    source: MultivariateSeries
    decomposition: Decomposition
    changepoints: ChangePointResult
    simulations: tuple[MultivariateSeries, ...]
    methods: tuple[str, ...]
    master_seed: int
    config: dict

    @property
    def n_sims(self) -> int:
        return len(self.simulations)


def _segment_generators(segments: list[Segment], p_max: int | None, order_cutoff: int):
    """Fit each segment once; return per-segment (method, simulate(seed)) pairs."""
    prepared = []
    for seg in segments:
        if seg.length < MIN_SEGMENT_FOR_MODEL:
            warnings.warn(
                f"segment ({seg.lo}, {seg.hi}] has only {seg.length} rows; "
                "falling back to i.i.d. row resampling",
                stacklevel=3,
            )
            sampler = BootstrapSampler(seg, 1)
            prepared.append(
                ("bootstrap(1)", lambda s, sp=sampler, ln=seg.length: block_bootstrap(sp, ln, s))
            )
            continue
        p = select_order(seg, p_max)
        if p < order_cutoff:
            model = fit_var(seg, p)
            prepared.append(
                (f"var({p})", lambda s, m=model, ln=seg.length: simulate_var(m, ln, s))
            )
        else:
            b = block_length(seg)
            sampler = BootstrapSampler(seg, b)
            prepared.append(
                (f"bootstrap({b})", lambda s, sp=sampler, ln=seg.length: block_bootstrap(sp, ln, s))
            )
    return prepared


def simulate_wind(
    w: MultivariateSeries,
    alpha: float = 0.05,
    n_sims: int = 1,
    master_seed: int = 0,
    *,
    loess_cfg: LoessConfig | None = None,
    period: int | None = None,
    window: int | None = None,
    kernel: KernelLike = DEFAULT_KERNEL,
    bandwidth: float | None = None,
    n_boot: int = 200,
    p_max: int | None = None,
    order_cutoff: int = 5,
    threads: int | None = None,
) -> SimulationBundle:
    """Produce ``n_sims`` statistically consistent realizations of ``w``.

    Steps: loess decomposition, change point detection on the residual at
    level ``alpha``, per-segment simulation by the order cutoff rule, then
    reassembly with the original trend and seasonal terms added back.
    """
    if n_sims < 1:
        raise ConfigError(f"n_sims must be >= 1, got {n_sims}")
    cfg = loess_cfg or LoessConfig()
    parts = decompose(w, cfg, period)
    result = detect_changepoints(
        parts.residual,
        alpha,
        window,
        n_boot=n_boot,
        seed=master_seed,
        kernel=kernel,
        bandwidth=bandwidth,
        threads=threads,
    )
    segments = segment(parts.residual, result)
    generators = _segment_generators(segments, p_max, order_cutoff)
    add_back = parts.trend.values + parts.seasonal.values

    def one_sim(i: int) -> MultivariateSeries:
        pieces = [gen((master_seed, i, k)) for k, (_, gen) in enumerate(generators)]
        residual_sim = np.concatenate([p.data for p in pieces], axis=0)
        return w.with_values(add_back + residual_sim)

    sims = run_indexed(one_sim, n_sims, threads)

    resolved_window = result.window
    config = {
        "alpha": alpha,
        "window": resolved_window,
        "n_sims": n_sims,
        "master_seed": master_seed,
        "loess_span": cfg.span,
        "loess_degree": cfg.degree,
        "loess_robustness_iters": cfg.robustness_iters,
        "seasonal_period": period,
        "kernel": kernel if isinstance(kernel, str) else getattr(kernel, "__name__", "custom"),
        "bandwidth": bandwidth if bandwidth is not None else default_bandwidth(resolved_window),
        "n_boot": n_boot,
        "p_max": p_max,
        "order_cutoff": order_cutoff,
        "backend": BACKEND,
        "seed_derivation": "per-simulation stream (master_seed, sim_index, segment_index)",
    }
    return SimulationBundle(
        source=w,
        decomposition=parts,
        changepoints=result,
        simulations=tuple(sims),
        methods=tuple(m for m, _ in generators),
        master_seed=master_seed,
        config=config,
    )


def write_bundle(bundle: SimulationBundle, directory) -> None:
    """Write the bundle as CSV/JSON artifacts into ``directory``.

    Layout: original_decomposition_{trend,seasonal,residual}.csv,
    changepoints.json, sim_0001.csv ... sim_NNNN.csv, manifest.json.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(bundle.decomposition.trend, out / "original_decomposition_trend.csv")
    write_csv(bundle.decomposition.seasonal, out / "original_decomposition_seasonal.csv")
    write_csv(bundle.decomposition.residual, out / "original_decomposition_residual.csv")
    (out / "changepoints.json").write_text(bundle.changepoints.to_json() + "\n", encoding="utf-8")
    sim_files = []
    for i, sim in enumerate(bundle.simulations, start=1):
        name = f"sim_{i:04d}.csv"
        write_csv(sim, out / name)
        sim_files.append(name)
    manifest = {
        "config": bundle.config,
        "methods": list(bundle.methods),
        "change_points": list(bundle.changepoints.change_points),
        "master_seed": bundle.master_seed,
        "n_sims": bundle.n_sims,
        "sim_files": sim_files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
