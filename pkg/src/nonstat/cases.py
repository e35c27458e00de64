"""Bundled example network cases.

``ieee30_case()`` follows the classic 30-bus test system topology (41
branches with standard per-unit reactances, generators at buses 1, 2, 5, 8,
11, 13, and the 21 standard load buses), with the generators at buses 8 and
13 flagged as wind and every line capped at 50 MW.  Cost coefficients, bid
prices, ramp limits, and the hourly demand shape are synthetic: the study
this case supports needs a plausible, always-feasible grid rather than a
benchmark-accurate one (shedding is allowed, so the model stays feasible
for any wind input).
"""

from __future__ import annotations

import numpy as np

from .dispatch import Bus, Generator, Line, Load, NetworkCase

# (from, to, X) in per-unit for the standard 41-branch topology.
_IEEE30_BRANCHES = [
    (1, 2, 0.0575), (1, 3, 0.1852), (2, 4, 0.1737), (3, 4, 0.0379),
    (2, 5, 0.1983), (2, 6, 0.1763), (4, 6, 0.0414), (5, 7, 0.1160),
    (6, 7, 0.0820), (6, 8, 0.0420), (6, 9, 0.2080), (6, 10, 0.5560),
    (9, 11, 0.2080), (9, 10, 0.1100), (4, 12, 0.2560), (12, 13, 0.1400),
    (12, 14, 0.2559), (12, 15, 0.1304), (12, 16, 0.1987), (14, 15, 0.1997),
    (16, 17, 0.1923), (15, 18, 0.2185), (18, 19, 0.1292), (19, 20, 0.0680),
    (10, 20, 0.2090), (10, 17, 0.0845), (10, 21, 0.0749), (10, 22, 0.1499),
    (21, 22, 0.0236), (15, 23, 0.2020), (22, 24, 0.1790), (23, 24, 0.2700),
    (24, 25, 0.3292), (25, 26, 0.3800), (25, 27, 0.2087), (28, 27, 0.3960),
    (27, 29, 0.4153), (27, 30, 0.6027), (29, 30, 0.4533), (8, 28, 0.2000),
    (6, 28, 0.0599),
]

# Standard nonzero bus demands (MW); 21 load buses.
_IEEE30_LOADS = {
    2: 21.7, 3: 2.4, 4: 7.6, 5: 94.2, 7: 22.8, 8: 30.0, 10: 5.8,
    12: 11.2, 14: 6.2, 15: 8.2, 16: 3.5, 17: 9.0, 18: 3.2, 19: 9.5,
    20: 2.2, 21: 17.5, 23: 3.2, 24: 8.7, 26: 3.5, 29: 2.4, 30: 10.6,
}

_HOURLY_SHAPE = [
    0.72, 0.68, 0.66, 0.65, 0.67, 0.73, 0.82, 0.91, 0.97, 1.00, 1.00, 0.98,
    0.96, 0.95, 0.96, 0.98, 1.00, 1.00, 0.97, 0.93, 0.88, 0.83, 0.78, 0.74,
]


def ieee30_case(line_cap: float = 50.0, periods_per_hour: int = 12, n_hours: int = 24) -> NetworkCase:
    """30-bus case with wind at buses 8 and 13 and hourly-varying demand."""
    buses = tuple(Bus(i, 1.0) for i in range(1, 31))
    lines = tuple(Line(f, t, x, -line_cap, line_cap) for f, t, x in _IEEE30_BRANCHES)
    generators = (
        Generator(bus=1, a=0.020, b=2.00, gmin=0.0, gmax=200.0, ramp_dn=-40.0, ramp_up=40.0),
        Generator(bus=2, a=0.035, b=1.75, gmin=0.0, gmax=80.0, ramp_dn=-25.0, ramp_up=25.0),
        Generator(bus=5, a=0.060, b=1.00, gmin=0.0, gmax=50.0, ramp_dn=-20.0, ramp_up=20.0),
        Generator(bus=8, a=0.0, b=0.0, gmin=0.0, gmax=80.0, ramp_dn=-80.0, ramp_up=80.0, wind=True),
        Generator(bus=11, a=0.070, b=3.00, gmin=0.0, gmax=30.0, ramp_dn=-15.0, ramp_up=15.0),
        Generator(bus=13, a=0.0, b=0.0, gmin=0.0, gmax=40.0, ramp_dn=-40.0, ramp_up=40.0, wind=True),
    )
    shape = np.repeat(_HOURLY_SHAPE[:n_hours], periods_per_hour)
    loads = tuple(
        Load(bus=bus, beta=40.0, demand=tuple(np.round(base * shape, 6)))
        for bus, base in sorted(_IEEE30_LOADS.items())
    )
    return NetworkCase(buses=buses, lines=lines, generators=generators, loads=loads)


def five_bus_case(line_cap: float = 500.0) -> NetworkCase:
    """Small uncongested case: two conventional units, one wind unit, and a
    single load; wind is free, so conventional generation mirrors demand
    minus wind whenever the wind unit is within its bounds."""
    buses = tuple(Bus(i, 1.0) for i in range(1, 6))
    lines = (
        Line(1, 2, 0.10, -line_cap, line_cap),
        Line(2, 3, 0.12, -line_cap, line_cap),
        Line(3, 4, 0.15, -line_cap, line_cap),
        Line(4, 5, 0.11, -line_cap, line_cap),
        Line(1, 5, 0.20, -line_cap, line_cap),
        Line(2, 4, 0.18, -line_cap, line_cap),
    )
    generators = (
        Generator(bus=1, a=0.040, b=8.0, gmin=0.0, gmax=300.0, ramp_dn=-300.0, ramp_up=300.0),
        Generator(bus=3, a=0.060, b=9.0, gmin=0.0, gmax=200.0, ramp_dn=-200.0, ramp_up=200.0),
        Generator(bus=5, a=0.0, b=0.0, gmin=0.0, gmax=100.0, ramp_dn=-100.0, ramp_up=100.0, wind=True),
    )
    loads = (Load(bus=4, beta=60.0, demand=(150.0,)),)
    return NetworkCase(buses=buses, lines=lines, generators=generators, loads=loads)
