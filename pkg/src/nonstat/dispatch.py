"""Economic dispatch: DC-network QP with ramping, duals as nodal prices,
and a rolling-horizon driver.

Per period the model minimizes total generation cost minus bid revenue
subject to per-bus power balance, the DC flow relation
``f_ij = (V_i V_j / X_ij)(theta_i - theta_j)``, line/generator/demand
bounds, and ramping around the previous period's optimal generation.  The
dual of each bus's balance constraint is the locational marginal price.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CaseError, ConfigError, DomainError, Infeasible, PeriodInfeasible, StateError
from .qp import AdmmQpSolver, QpSolution
from .series import MultivariateSeries, format_value


@dataclass(frozen=True)
class Bus:
    id: int
    V: float = 1.0


@dataclass(frozen=True)
class Line:
    from_bus: int
    to_bus: int
    X: float
    fmin: float
    fmax: float


@dataclass(frozen=True)
class Generator:
    bus: int
    a: float
    b: float
    gmin: float
    gmax: float
    ramp_dn: float
    ramp_up: float
    wind: bool = False


@dataclass(frozen=True)
class Load:
    bus: int
    beta: float
    demand: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "demand", tuple(float(v) for v in np.atleast_1d(self.demand)))


@dataclass(frozen=True)
class NetworkCase:
    """Grid description: buses, lines, generators, and loads."""

    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    generators: tuple[Generator, ...]
    loads: tuple[Load, ...]

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "loads", tuple(self.loads))
        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            raise CaseError("duplicate bus ids")
        if not ids:
            raise CaseError("case has no buses")
        known = set(ids)
        for b in self.buses:
            if b.V <= 0:
                raise CaseError(f"bus {b.id}: voltage must be positive")
        for ln in self.lines:
            if ln.from_bus not in known or ln.to_bus not in known:
                raise CaseError(f"line ({ln.from_bus}, {ln.to_bus}) references unknown bus")
            if ln.X <= 0:
                raise CaseError(f"line ({ln.from_bus}, {ln.to_bus}): impedance must be positive")
            if ln.fmin > ln.fmax:
                raise CaseError(f"line ({ln.from_bus}, {ln.to_bus}): fmin > fmax")
        for g in self.generators:
            if g.bus not in known:
                raise CaseError(f"generator at unknown bus {g.bus}")
            if g.a < 0:
                raise CaseError(f"generator at bus {g.bus}: quadratic cost must be >= 0")
            if g.gmin > g.gmax:
                raise CaseError(f"generator at bus {g.bus}: gmin > gmax")
            if not g.ramp_dn <= 0.0 <= g.ramp_up:
                raise CaseError(f"generator at bus {g.bus}: need ramp_dn <= 0 <= ramp_up")
        for d in self.loads:
            if d.bus not in known:
                raise CaseError(f"load at unknown bus {d.bus}")
            if any(v < 0 for v in d.demand):
                raise CaseError(f"load at bus {d.bus}: negative demand")
        self._check_connected()

    def _check_connected(self):
        if len(self.buses) == 1:
            return
        adj: dict[int, set[int]] = {b.id: set() for b in self.buses}
        for ln in self.lines:
            adj[ln.from_bus].add(ln.to_bus)
            adj[ln.to_bus].add(ln.from_bus)
        seen = {self.buses[0].id}
        stack = [self.buses[0].id]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if len(seen) != len(self.buses):
            missing = sorted(set(b.id for b in self.buses) - seen)
            raise CaseError(f"network graph is disconnected (unreachable buses {missing})")

    @property
    def bus_index(self) -> dict[int, int]:
        return {b.id: i for i, b in enumerate(self.buses)}

    @property
    def reference_bus(self) -> int:
        return min(b.id for b in self.buses)

    @property
    def wind_indices(self) -> tuple[int, ...]:
        return tuple(i for i, g in enumerate(self.generators) if g.wind)

    @property
    def conventional_indices(self) -> tuple[int, ...]:
        return tuple(i for i, g in enumerate(self.generators) if not g.wind)

    def to_json(self) -> str:
        doc = {
            "buses": [{"id": b.id, "V": b.V} for b in self.buses],
            "lines": [
                {"from": ln.from_bus, "to": ln.to_bus, "X": ln.X, "fmin": ln.fmin, "fmax": ln.fmax}
                for ln in self.lines
            ],
            "generators": [
                {
                    "bus": g.bus,
                    "a": g.a,
                    "b": g.b,
                    "gmin": g.gmin,
                    "gmax": g.gmax,
                    "ramp_dn": g.ramp_dn,
                    "ramp_up": g.ramp_up,
                    "wind": g.wind,
                }
                for g in self.generators
            ],
            "loads": [{"bus": d.bus, "beta": d.beta, "demand": list(d.demand)} for d in self.loads],
        }
        return json.dumps(doc, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, source) -> "NetworkCase":
        if isinstance(source, (str, Path)) and "\n" not in str(source) and Path(str(source)).exists():
            doc = json.loads(Path(source).read_text(encoding="utf-8"))
        elif isinstance(source, (str, bytes)):
            doc = json.loads(source)
        else:
            doc = source
        try:
            return cls(
                buses=tuple(Bus(int(b["id"]), float(b.get("V", 1.0))) for b in doc["buses"]),
                lines=tuple(
                    Line(int(x["from"]), int(x["to"]), float(x["X"]), float(x["fmin"]), float(x["fmax"]))
                    for x in doc["lines"]
                ),
                generators=tuple(
                    Generator(
                        int(g["bus"]),
                        float(g["a"]),
                        float(g["b"]),
                        float(g["gmin"]),
                        float(g["gmax"]),
                        float(g["ramp_dn"]),
                        float(g["ramp_up"]),
                        bool(g.get("wind", False)),
                    )
                    for g in doc["generators"]
                ),
                loads=tuple(
                    Load(int(d["bus"]), float(d["beta"]), tuple(d["demand"])) for d in doc["loads"]
                ),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CaseError(f"malformed network case document: {exc}") from exc


@dataclass(frozen=True)
class PowerCurve:
    """Piecewise wind-speed to power map: zero outside [cut_in, cut_out),
    cubic ramp between cut_in and rated_speed, flat at rated_power after."""

    cut_in: float = 3.0
    rated_speed: float = 13.0
    cut_out: float = 25.0
    rated_power: float = 21.02

    def __post_init__(self):
        if not 0.0 <= self.cut_in < self.rated_speed < self.cut_out:
            raise ConfigError("need 0 <= cut_in < rated_speed < cut_out")
        if self.rated_power <= 0:
            raise ConfigError("rated_power must be positive")


def wind_to_power(speed, curve: PowerCurve):
    """Convert wind speed (m/s) to available power (MW) through the curve."""
    v = np.asarray(speed, dtype=float)
    if np.any(v < 0):
        raise DomainError("wind speed cannot be negative")
    ci3 = curve.cut_in**3
    ramp = curve.rated_power * (v**3 - ci3) / (curve.rated_speed**3 - ci3)
    power = np.where(
        v < curve.cut_in,
        0.0,
        np.where(v < curve.rated_speed, ramp, np.where(v < curve.cut_out, curve.rated_power, 0.0)),
    )
    return float(power) if np.isscalar(speed) else power


@dataclass
class QpInstance:
    """Assembled dispatch QP with its variable and constraint index maps."""

    p_diag: np.ndarray
    q: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    g_slice: slice
    d_slice: slice
    f_slice: slice
    theta_slice: slice
    balance_rows: slice
    flow_rows: slice
    ref_row: int
    case: NetworkCase

    @property
    def n_vars(self) -> int:
        return self.p_diag.shape[0]


def _structure(case: NetworkCase):
    n_g, n_d, n_l, n_b = len(case.generators), len(case.loads), len(case.lines), len(case.buses)
    g_sl = slice(0, n_g)
    d_sl = slice(n_g, n_g + n_d)
    f_sl = slice(n_g + n_d, n_g + n_d + n_l)
    t_sl = slice(n_g + n_d + n_l, n_g + n_d + n_l + n_b)
    return n_g, n_d, n_l, n_b, g_sl, d_sl, f_sl, t_sl


def _cost_and_equalities(case: NetworkCase):
    n_g, n_d, n_l, n_b, g_sl, d_sl, f_sl, t_sl = _structure(case)
    n = n_g + n_d + n_l + n_b
    p_diag = np.zeros(n)
    q = np.zeros(n)
    for i, g in enumerate(case.generators):
        p_diag[g_sl.start + i] = 2.0 * g.a
        q[g_sl.start + i] = g.b
    for i, d in enumerate(case.loads):
        q[d_sl.start + i] = -d.beta

    idx = case.bus_index
    m = n_b + n_l + 1
    a = np.zeros((m, n))
    for i, g in enumerate(case.generators):
        a[idx[g.bus], g_sl.start + i] = 1.0
    for i, d in enumerate(case.loads):
        a[idx[d.bus], d_sl.start + i] = -1.0
    for i, ln in enumerate(case.lines):
        a[idx[ln.to_bus], f_sl.start + i] = 1.0
        a[idx[ln.from_bus], f_sl.start + i] = -1.0
        vv = case.buses[idx[ln.from_bus]].V * case.buses[idx[ln.to_bus]].V
        coef = vv / ln.X
        row = n_b + i
        a[row, f_sl.start + i] = 1.0
        a[row, t_sl.start + idx[ln.from_bus]] = -coef
        a[row, t_sl.start + idx[ln.to_bus]] = coef
    a[n_b + n_l, t_sl.start + idx[case.reference_bus]] = 1.0
    return p_diag, q, a, np.zeros(m)


def _bounds(case: NetworkCase, wind_cap, g_star, demand, first_period: bool):
    n_g, n_d, n_l, n_b, g_sl, d_sl, f_sl, t_sl = _structure(case)
    n = n_g + n_d + n_l + n_b
    lb = np.full(n, -np.inf)
    ub = np.full(n, np.inf)

    wind_cap = np.atleast_1d(np.asarray(wind_cap, dtype=float)) if wind_cap is not None else None
    wind_pos = {gen_idx: k for k, gen_idx in enumerate(case.wind_indices)}
    if wind_cap is not None and wind_cap.shape[0] != len(wind_pos):
        raise ConfigError(f"{wind_cap.shape[0]} wind caps for {len(wind_pos)} wind generators")

    g_star = None if first_period else np.asarray(g_star, dtype=float)
    if g_star is not None:
        if g_star.shape[0] != n_g:
            raise ConfigError(f"g_star has {g_star.shape[0]} entries for {n_g} generators")
        for i, g in enumerate(case.generators):
            if not g.gmin - 1e-7 <= g_star[i] <= g.gmax + 1e-7:
                raise ConfigError(f"g_star[{i}]={g_star[i]} outside [{g.gmin}, {g.gmax}]")

    for i, g in enumerate(case.generators):
        lo, hi = g.gmin, g.gmax
        if g.wind and wind_cap is not None:
            hi = min(hi, wind_cap[wind_pos[i]])
        if g_star is not None:
            lo = max(lo, g_star[i] + g.ramp_dn)
            hi = min(hi, g_star[i] + g.ramp_up)
        lb[g_sl.start + i] = lo
        ub[g_sl.start + i] = hi

    demand = np.atleast_1d(np.asarray(demand, dtype=float))
    if demand.shape[0] != n_d:
        raise ConfigError(f"demand has {demand.shape[0]} entries for {n_d} loads")
    lb[d_sl] = 0.0
    ub[d_sl] = demand

    for i, ln in enumerate(case.lines):
        lb[f_sl.start + i] = ln.fmin
        ub[f_sl.start + i] = ln.fmax
    return lb, ub


def build_qp(
    case: NetworkCase,
    wind_cap=None,
    g_star=None,
    demand=None,
    first_period: bool = False,
) -> QpInstance:
    """Assemble the dispatch QP for one period.

    ``wind_cap`` holds the available power of each wind generator (in their
    order among the case's generators); ``demand`` the per-load caps;
    ``g_star`` the previous period's generation (ignored when
    ``first_period`` disables ramping).
    """
    n_g, n_d, n_l, n_b, g_sl, d_sl, f_sl, t_sl = _structure(case)
    if demand is None:
        demand = np.array([d.demand[0] for d in case.loads])
    p_diag, q, a, b = _cost_and_equalities(case)
    lb, ub = _bounds(case, wind_cap, g_star, demand, first_period or g_star is None)
    return QpInstance(
        p_diag=p_diag,
        q=q,
        a_eq=a,
        b_eq=b,
        lb=lb,
        ub=ub,
        g_slice=g_sl,
        d_slice=d_sl,
        f_slice=f_sl,
        theta_slice=t_sl,
        balance_rows=slice(0, n_b),
        flow_rows=slice(n_b, n_b + n_l),
        ref_row=n_b + n_l,
        case=case,
    )


def solve_qp(instance: QpInstance, tol: float = 1e-6, warm=None, solver: AdmmQpSolver | None = None) -> QpSolution:
    """Solve the assembled instance; returns primal and equality duals with
    KKT residual <= tol (absolute, relative to the data scale)."""
    if solver is None:
        solver = AdmmQpSolver(instance.p_diag, instance.q, instance.a_eq, instance.b_eq)
    return solver.solve(instance.lb, instance.ub, warm=warm, tol=tol)


def extract_lmp(sol: QpSolution, instance: QpInstance) -> np.ndarray:
    """Locational marginal prices: marginal system cost of one extra MW of
    load at each bus, read off the balance-constraint duals."""
    if sol.status != "optimal":
        raise StateError(f"cannot extract prices from a {sol.status!r} solution")
    return -sol.y_eq[instance.balance_rows]


@dataclass
class DispatchTrace:
    """Per-period primal dispatch and prices from the rolling horizon."""

    generation: np.ndarray  # (T, |G|)
    demand_met: np.ndarray  # (T, |D|)
    flows: np.ndarray  # (T, |L|)
    prices: np.ndarray  # (T, |B|)
    total_conventional: np.ndarray  # (T,)
    objectives: np.ndarray  # (T,)
    case: NetworkCase

    @property
    def n_periods(self) -> int:
        return self.generation.shape[0]

    def to_csv(self, dest) -> None:
        n_g = self.generation.shape[1]
        n_d = self.demand_met.shape[1]
        n_b = self.prices.shape[1]
        header = (
            ["t"]
            + [f"g_{i + 1}" for i in range(n_g)]
            + [f"d_{i + 1}" for i in range(n_d)]
            + [f"pi_{i + 1}" for i in range(n_b)]
            + ["total_conventional"]
        )
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for t in range(self.n_periods):
            cells = [str(t + 1)]
            cells += [format_value(v) for v in self.generation[t]]
            cells += [format_value(v) for v in self.demand_met[t]]
            cells += [format_value(v) for v in self.prices[t]]
            cells.append(format_value(self.total_conventional[t]))
            buf.write(",".join(cells) + "\n")
        text = buf.getvalue()
        if isinstance(dest, (str, Path)):
            Path(dest).write_text(text, encoding="utf-8")
        else:
            dest.write(text)


def _demand_matrix(case: NetworkCase, n_periods: int, demand_profile) -> np.ndarray:
    n_d = len(case.loads)
    if demand_profile is not None:
        values = demand_profile.values if isinstance(demand_profile, MultivariateSeries) else np.asarray(demand_profile, dtype=float)
        values = np.atleast_2d(values)
        if values.shape[1] != n_d:
            raise ConfigError(f"demand profile has {values.shape[1]} columns for {n_d} loads")
        if values.shape[0] < n_periods:
            raise ConfigError(f"demand profile covers {values.shape[0]} periods, need {n_periods}")
        return values[:n_periods]
    out = np.empty((n_periods, n_d))
    for j, load in enumerate(case.loads):
        if len(load.demand) == 1:
            out[:, j] = load.demand[0]
        elif len(load.demand) >= n_periods:
            out[:, j] = load.demand[:n_periods]
        else:
            raise ConfigError(
                f"load at bus {load.bus} lists {len(load.demand)} demand periods, need {n_periods}"
            )
    return out


def rolling_horizon(
    case: NetworkCase,
    wind_speeds: MultivariateSeries,
    curve: PowerCurve | None = None,
    demand_profile=None,
    tol: float = 1e-6,
) -> DispatchTrace:
    """Solve the dispatch QP period by period, chaining ramping constraints.

    Wind speeds (one component per wind generator) are converted to caps via
    the power curve.  Raises PeriodInfeasible (with the partial trace) at
    the first infeasible period.
    """
    curve = curve or PowerCurve()
    wind_idx = case.wind_indices
    if wind_speeds.n_components != len(wind_idx):
        raise ConfigError(
            f"{wind_speeds.n_components} wind speed components for {len(wind_idx)} wind generators"
        )
    n_periods = wind_speeds.n_obs
    demand = _demand_matrix(case, n_periods, demand_profile)
    caps = wind_to_power(wind_speeds.values, curve)

    n_g, n_d, n_l, n_b = len(case.generators), len(case.loads), len(case.lines), len(case.buses)
    conv = np.array([not g.wind for g in case.generators])
    instance = build_qp(case, caps[0], None, demand[0], first_period=True)
    solver = AdmmQpSolver(instance.p_diag, instance.q, instance.a_eq, instance.b_eq)

    generation = np.zeros((n_periods, n_g))
    demand_met = np.zeros((n_periods, n_d))
    flows = np.zeros((n_periods, n_l))
    prices = np.zeros((n_periods, n_b))
    objectives = np.zeros(n_periods)

    g_star = None
    warm = None
    for t in range(n_periods):
        lb, ub = _bounds(case, caps[t], g_star, demand[t], first_period=(t == 0))
        try:
            sol = solver.solve(lb, ub, warm=warm, tol=tol)
        except Infeasible as exc:
            partial = DispatchTrace(
                generation=generation[:t].copy(),
                demand_met=demand_met[:t].copy(),
                flows=flows[:t].copy(),
                prices=prices[:t].copy(),
                total_conventional=generation[:t, conv].sum(axis=1),
                objectives=objectives[:t].copy(),
                case=case,
            )
            raise PeriodInfeasible(t + 1, partial) from exc
        generation[t] = sol.x[instance.g_slice]
        demand_met[t] = sol.x[instance.d_slice]
        flows[t] = sol.x[instance.f_slice]
        prices[t] = extract_lmp(sol, instance)
        objectives[t] = sol.objective
        gmin = np.array([g.gmin for g in case.generators])
        gmax = np.array([g.gmax for g in case.generators])
        g_star = np.clip(generation[t], gmin, gmax)
        warm = (sol.x, sol.y_eq, sol.y_bounds)

    return DispatchTrace(
        generation=generation,
        demand_met=demand_met,
        flows=flows,
        prices=prices,
        total_conventional=generation[:, conv].sum(axis=1),
        objectives=objectives,
        case=case,
    )
