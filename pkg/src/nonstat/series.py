"""Canonical multivariate series container plus CSV ingestion and emission.

The time axis is index-based: row ``i`` of ``values`` is observation
``start_index + i``.  All downstream analysis assumes a uniform time step.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateComponent, EmptyInput, InsufficientData, ParseError

_TIME_COLUMN_NAMES = {"time", "timestamp"}


def _frozen_array(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MultivariateSeries:
    """A T x L real-valued series with component names.

    Parameters
    ----------
    values : ndarray
        T x L matrix; every entry must be finite.
    names : sequence of str, optional
        L component labels.  Generated as ``series1`` ... ``seriesL`` when
        omitted.
    start_index : int
        Time index of the first row (default 1).
    """

    values: np.ndarray
    names: tuple[str, ...] = ()
    start_index: int = 1

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValueError(f"values must be 2-dimensional, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"series must be at least 1x1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise ValueError(f"non-finite entry at row {bad[0] + 1}, column {bad[1] + 1}")
        names = tuple(self.names) if self.names else tuple(f"series{i + 1}" for i in range(arr.shape[1]))
        if len(names) != arr.shape[1]:
            raise ValueError(f"{len(names)} names for {arr.shape[1]} components")
        object.__setattr__(self, "values", _frozen_array(arr))
        object.__setattr__(self, "names", names)

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_components(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def component(self, i: int) -> np.ndarray:
        return self.values[:, i]

    def with_values(self, values: np.ndarray) -> "MultivariateSeries":
        """Same names/origin, new data of identical shape."""
        if np.shape(values) != self.shape:
            raise ValueError(f"shape {np.shape(values)} != {self.shape}")
        return MultivariateSeries(values, self.names, self.start_index)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pearson correlation of the series components (symmetric, unit diagonal)."""

    entries: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen_array(self.entries))
        object.__setattr__(self, "names", tuple(self.names))


def correlation_matrix(s: MultivariateSeries) -> CorrelationMatrix:
    """Pairwise Pearson correlations of the components of ``s``.

    Raises
    ------
    InsufficientData
        If fewer than 3 observations are available.
    DegenerateComponent
        If any component has zero sample variance.
    """
    if s.n_obs < 3:
        raise InsufficientData(f"need at least 3 observations, got {s.n_obs}")
    centered = s.values - s.values.mean(axis=0)
    scale = np.sqrt((centered**2).sum(axis=0))
    if np.any(scale == 0.0):
        idx = int(np.argwhere(scale == 0.0)[0][0])
        raise DegenerateComponent(f"component {s.names[idx]!r} has zero variance")
    normed = centered / scale
    corr = normed.T @ normed
    corr = np.clip((corr + corr.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return CorrelationMatrix(corr, s.names)


def _decode(source) -> str:
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        return Path(source).read_bytes().decode("utf-8")
    if isinstance(source, str):
        return source
    if isinstance(source, bytes):
        return source.decode("utf-8")
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def _parse_cell(cell: str, row: int, col: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(
            f"row {row} column {col}: {cell.strip()!r} is not a number", row=row, column=col
        ) from None
    if not np.isfinite(value):
        raise ParseError(f"row {row} column {col}: non-finite value {cell.strip()!r}", row=row, column=col)
    return value


def load_csv(source, header: bool | None = None) -> MultivariateSeries:
    """Read a comma-separated series.

    Parameters
    ----------
    source : path, str, bytes, or file object
        UTF-8 CSV text with '.' decimal separator and '\\n' or '\\r\\n'
        line endings.
    header : bool or None
        True/False force the first row to be treated as labels/data;
        None auto-detects (a first row with any non-numeric cell is a header).

    Notes
    -----
    A leading column whose header is named ``time`` or ``timestamp`` is
    dropped with a warning; the analysis runs on index time only.
    """
    text = _decode(source)
    lines = text.replace("\r\n", "\n").split("\n")
    rows = [line for line in lines if line.strip() != ""]
    if not rows:
        raise EmptyInput("no data rows in input")

    first = rows[0].split(",")
    if header is None:
        header = False
        for cell in first:
            try:
                float(cell)
            except ValueError:
                header = True
                break
    names: tuple[str, ...] | None = None
    data_rows = rows
    if header:
        names = tuple(cell.strip() for cell in first)
        data_rows = rows[1:]
        if not data_rows:
            raise EmptyInput("header present but no data rows")

    n_cols = len(data_rows[0].split(","))
    parsed = np.empty((len(data_rows), n_cols))
    for i, line in enumerate(data_rows):
        cells = line.split(",")
        row_number = i + (2 if header else 1)
        if len(cells) != n_cols:
            raise ParseError(
                f"row {row_number} has {len(cells)} columns, expected {n_cols}", row=row_number
            )
        for j, cell in enumerate(cells):
            parsed[i, j] = _parse_cell(cell, row_number, j + 1)

    if names is not None and len(names) != n_cols:
        raise ParseError(f"header has {len(names)} labels for {n_cols} columns", row=1)

    if names is not None and n_cols > 1 and names[0].lower() in _TIME_COLUMN_NAMES:
        warnings.warn(
            f"dropping leading {names[0]!r} column; analysis uses index time only",
            stacklevel=2,
        )
        names = names[1:]
        parsed = parsed[:, 1:]

    return MultivariateSeries(parsed, names if names is not None else ())


def format_value(x: float) -> str:
    """Shortest decimal string that round-trips to the same float."""
    return repr(float(x))


def write_csv(s: MultivariateSeries, dest, header: bool = True) -> None:
    """Emit ``s`` as CSV with shortest round-trip decimal formatting."""
    buf = io.StringIO()
    if header:
        buf.write(",".join(s.names) + "\n")
    for row in s.values:
        buf.write(",".join(format_value(v) for v in row) + "\n")
    text = buf.getvalue()
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    elif hasattr(dest, "write"):
        try:
            dest.write(text)
        except TypeError:
            dest.write(text.encode("utf-8"))
    else:
        raise TypeError(f"cannot write CSV to {type(dest).__name__}")
