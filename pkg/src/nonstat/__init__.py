"""Covariance change point detection, segment-wise simulation, and economic
dispatch for nonstationary multivariate time series."""

from ._backend import BACKEND
from .changepoint import ChangePointResult, Segment, detect_changepoints, null_threshold, segment
from .decompose import Decomposition, LoessConfig, decompose, loess_trend, seasonal_periodic_mean
from .dispatch import (
    DispatchTrace,
    NetworkCase,
    PowerCurve,
    build_qp,
    extract_lmp,
    rolling_horizon,
    solve_qp,
    wind_to_power,
)
from .pipeline import SimulationBundle, simulate_wind, write_bundle
from .segsim import (
    BootstrapSampler,
    VarModel,
    block_bootstrap,
    block_length,
    fit_var,
    select_order,
    simulate_segment,
    simulate_var,
)
from .series import CorrelationMatrix, MultivariateSeries, correlation_matrix, load_csv, write_csv
from .spectral import (
    DeviationProfile,
    SpectralEstimate,
    deviation_profile,
    deviation_stat,
    dft_window,
    periodogram,
    smoothed_spectral_density,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BootstrapSampler",
    "ChangePointResult",
    "CorrelationMatrix",
    "Decomposition",
    "DeviationProfile",
    "DispatchTrace",
    "LoessConfig",
    "MultivariateSeries",
    "NetworkCase",
    "PowerCurve",
    "Segment",
    "SimulationBundle",
    "SpectralEstimate",
    "VarModel",
    "block_bootstrap",
    "block_length",
    "build_qp",
    "correlation_matrix",
    "decompose",
    "detect_changepoints",
    "deviation_profile",
    "deviation_stat",
    "dft_window",
    "extract_lmp",
    "fit_var",
    "load_csv",
    "loess_trend",
    "null_threshold",
    "periodogram",
    "rolling_horizon",
    "seasonal_periodic_mean",
    "segment",
    "select_order",
    "simulate_segment",
    "simulate_var",
    "simulate_wind",
    "smoothed_spectral_density",
    "solve_qp",
    "wind_to_power",
    "write_bundle",
    "write_csv",
]
