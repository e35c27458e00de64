"""Command-line front end.

Subcommands: decompose, detect, simulate, dispatch.  Exit codes: 0 success,
1 usage error, 2 data or model error.  NONSTAT_THREADS caps the worker
count; seeded invocations write byte-identical outputs regardless of it.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from ._parallel import thread_count
from .changepoint import detect_changepoints
from .decompose import LoessConfig, decompose
from .dispatch import NetworkCase, PowerCurve, rolling_horizon
from .errors import NonstatError
from .pipeline import simulate_wind, write_bundle
from .series import load_csv, write_csv
from .svgplot import write_chart


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="nonstat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--emit-plot", choices=["svg"], default=None, help="also write SVG charts")

    p_dec = sub.add_parser("decompose", parents=[common], help="split a series into trend/seasonal/residual")
    p_dec.add_argument("--input", required=True)
    p_dec.add_argument("--output", "--out", dest="output", required=True, help="output directory")
    p_dec.add_argument("--span", type=float, default=0.25)
    p_dec.add_argument("--degree", type=int, default=2)
    p_dec.add_argument("--robustness-iters", type=int, default=0)
    p_dec.add_argument("--period", type=int, default=None)

    p_det = sub.add_parser("detect", parents=[common], help="detect covariance change points on a residual series")
    p_det.add_argument("--input", required=True)
    p_det.add_argument("--output", "--out", dest="output", required=True, help="output JSON path")
    p_det.add_argument("--alpha", type=float, default=0.05)
    p_det.add_argument("--window", type=int, default=None)
    p_det.add_argument("--seed", type=int, default=0)
    p_det.add_argument("--n-boot", type=int, default=200)
    p_det.add_argument("--kernel", default="epanechnikov")
    p_det.add_argument("--bandwidth", type=float, default=None)

    p_sim = sub.add_parser("simulate", parents=[common], help="simulate realizations of a wind speed series")
    p_sim.add_argument("--input", required=True)
    p_sim.add_argument("--output", "--out", dest="output", required=True, help="output directory")
    p_sim.add_argument("--alpha", type=float, default=0.05)
    p_sim.add_argument("--n", type=int, default=1, help="number of simulations")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--window", type=int, default=None)
    p_sim.add_argument("--n-boot", type=int, default=200)
    p_sim.add_argument("--span", type=float, default=0.25)
    p_sim.add_argument("--degree", type=int, default=2)
    p_sim.add_argument("--robustness-iters", type=int, default=0)
    p_sim.add_argument("--period", type=int, default=None)
    p_sim.add_argument("--kernel", default="epanechnikov")
    p_sim.add_argument("--bandwidth", type=float, default=None)
    p_sim.add_argument("--order-cutoff", type=int, default=5)

    p_dis = sub.add_parser("dispatch", parents=[common], help="rolling-horizon economic dispatch")
    p_dis.add_argument("--case", required=True, help="network case JSON")
    p_dis.add_argument("--wind", required=True, help="wind speed CSV, one column per wind generator")
    p_dis.add_argument("--output", "--out", dest="output", required=True, help="trace CSV path")
    p_dis.add_argument("--demand", default=None, help="optional per-period demand CSV")
    p_dis.add_argument("--cut-in", type=float, default=3.0)
    p_dis.add_argument("--rated-speed", type=float, default=13.0)
    p_dis.add_argument("--cut-out", type=float, default=25.0)
    p_dis.add_argument("--rated-power", type=float, default=21.02)
    p_dis.add_argument("--tol", type=float, default=1e-6)
    return parser


def _cmd_decompose(args) -> int:
    series = load_csv(args.input)
    cfg = LoessConfig(span=args.span, degree=args.degree, robustness_iters=args.robustness_iters)
    parts = decompose(series, cfg, args.period)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(parts.trend, out / "trend.csv")
    write_csv(parts.seasonal, out / "seasonal.csv")
    write_csv(parts.residual, out / "residual.csv")
    if args.emit_plot:
        write_chart(
            out / "decomposition.svg",
            {"observed": series.values[:, 0], "trend": parts.trend.values[:, 0]},
            f"{series.names[0]}: observed and trend",
        )
    return 0


def _cmd_detect(args) -> int:
    series = load_csv(args.input)
    result = detect_changepoints(
        series,
        alpha=args.alpha,
        window=args.window,
        n_boot=args.n_boot,
        seed=args.seed,
        kernel=args.kernel,
        bandwidth=args.bandwidth,
        threads=thread_count(),
    )
    out = Path(args.output)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(result.to_json() + "\n", encoding="utf-8")
    if args.emit_plot:
        stem = out.with_suffix("")
        marks = result.change_points
        write_chart(
            Path(f"{stem}_series.svg"),
            {name: series.values[:, j] for j, name in enumerate(series.names)},
            f"residual series with {len(marks)} change points",
            vlines=marks,
            x_start=series.start_index,
        )
        write_chart(
            Path(f"{stem}_profile.svg"),
            {"deviation": result.profile.d_hat, "threshold": np.full_like(result.profile.d_hat, result.threshold)},
            "deviation profile",
            x_start=int(result.profile.tau_values[0]),
        )
    return 0


def _cmd_simulate(args) -> int:
    series = load_csv(args.input)
    cfg = LoessConfig(span=args.span, degree=args.degree, robustness_iters=args.robustness_iters)
    bundle = simulate_wind(
        series,
        alpha=args.alpha,
        n_sims=args.n,
        master_seed=args.seed,
        loess_cfg=cfg,
        period=args.period,
        window=args.window,
        kernel=args.kernel,
        bandwidth=args.bandwidth,
        n_boot=args.n_boot,
        order_cutoff=args.order_cutoff,
        threads=thread_count(),
    )
    out = Path(args.output)
    write_bundle(bundle, out)
    if args.emit_plot:
        marks = bundle.changepoints.change_points
        write_chart(
            out / "residual_changepoints.svg",
            {name: bundle.decomposition.residual.values[:, j] for j, name in enumerate(series.names)},
            f"residual series with {len(marks)} change points",
            vlines=marks,
        )
        write_chart(
            out / "sim_0001.svg",
            {name: bundle.simulations[0].values[:, j] for j, name in enumerate(series.names)},
            "first simulated series",
            vlines=marks,
        )
    return 0


def _cmd_dispatch(args) -> int:
    case = NetworkCase.from_json(args.case)
    wind = load_csv(args.wind)
    demand = load_csv(args.demand) if args.demand else None
    curve = PowerCurve(
        cut_in=args.cut_in,
        rated_speed=args.rated_speed,
        cut_out=args.cut_out,
        rated_power=args.rated_power,
    )
    trace = rolling_horizon(case, wind, curve, demand, tol=args.tol)
    out = Path(args.output)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    trace.to_csv(out)
    if args.emit_plot:
        stem = out.with_suffix("")
        write_chart(
            Path(f"{stem}_generation.svg"),
            {"total conventional": trace.total_conventional},
            "total conventional generation",
            y_label="MW",
        )
        first_bus = trace.case.buses[0].id
        write_chart(
            Path(f"{stem}_lmp_bus{first_bus}.svg"),
            {f"bus {first_bus}": trace.prices[:, 0]},
            f"locational marginal price at bus {first_bus}",
            y_label="price",
        )
    return 0


_COMMANDS = {
    "decompose": _cmd_decompose,
    "detect": _cmd_detect,
    "simulate": _cmd_simulate,
    "dispatch": _cmd_dispatch,
}


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"nonstat: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except NonstatError as exc:
        print(f"nonstat {args.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"nonstat {args.command}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
