"""Amplitude-modulated series: container, construction and CSV I/O.

The observation model is ``y_i = c_i * x_i`` with weights ``c_i`` in [0, 1].
A weight of zero means the point is missing. Files always hold the observed
``y`` together with ``c``; the latent ``x`` only exists inside simulations.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CensacvError

MISSING_MARKERS = ("", "nan")


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ModulatedSeries:
    """Observed values ``y`` and modulation weights ``c``.

    Points with ``c == 0`` are zeroed in ``y`` at construction.
    Instances are immutable.
    """

    y: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        y = np.array(self.y, dtype=float).ravel()
        c = np.array(self.c, dtype=float).ravel()
        if y.shape != c.shape:
            raise CensacvError(f"length mismatch: len(y)={y.size}, len(c)={c.size}")
        if y.size == 0:
            raise CensacvError("series must contain at least one point")
        if not np.all(np.isfinite(c)) or np.any(c < 0) or np.any(c > 1):
            raise CensacvError("modulation weights must lie in [0, 1]")
        y[c == 0] = 0.0
        if not np.all(np.isfinite(y)):
            raise CensacvError("observed values must be finite where c > 0")
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "c", _frozen(c))

    @property
    def N(self) -> int:
        return int(self.y.size)

    def __len__(self):
        return self.N

    @property
    def observed_fraction(self) -> float:
        return float(np.count_nonzero(self.c)) / self.N

    def reversed(self) -> "ModulatedSeries":
        return ModulatedSeries(self.y[::-1], self.c[::-1])

    def metadata(self) -> dict:
        return {"N": self.N, "observed_fraction": self.observed_fraction}


@dataclass(frozen=True, eq=False)
class LatentPair:
    """Latent series and its modulation, available in simulations only."""

    x: np.ndarray
    c: np.ndarray

    @property
    def series(self) -> ModulatedSeries:
        return modulate(self.x, self.c)


def modulate(x, c) -> ModulatedSeries:
    """Return the observed series ``y = c * x``."""
    x = np.asarray(x, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    if x.shape != c.shape:
        raise CensacvError(f"length mismatch: len(x)={x.size}, len(c)={c.size}")
    if np.any(c < 0) or np.any(c > 1):
        raise CensacvError("modulation weights must lie in [0, 1]")
    return ModulatedSeries(c * x, c)


def _parse_cell(cell: str, row: int) -> float:
    text = cell.strip()
    try:
        return float(text)
    except ValueError:
        raise CensacvError(f"row {row}: non-numeric cell {cell!r}") from None


def _is_header(row: list[str]) -> bool:
    names = [cell.strip().lower() for cell in row]
    return names in (["y"], ["y", "c"])


def parse_csv(text: str) -> ModulatedSeries:
    """Parse CSV text with columns ``y[,c]``.

    A blank or ``NaN`` value cell marks a censored point and maps to
    ``(y, c) = (0, 0)``. With a single column every other row has ``c = 1``.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(cell.strip() for cell in r)]
    if rows and _is_header(rows[0]):
        rows = rows[1:]
    if not rows:
        raise CensacvError("empty input: no data rows")
    ys, cs = [], []
    for lineno, row in enumerate(rows, start=1):
        if len(row) > 2:
            raise CensacvError(f"row {lineno}: expected at most 2 columns, got {len(row)}")
        value = row[0].strip()
        if value.lower() in MISSING_MARKERS:
            ys.append(0.0)
            cs.append(0.0)
            continue
        y = _parse_cell(value, lineno)
        if math.isnan(y):
            ys.append(0.0)
            cs.append(0.0)
            continue
        c = _parse_cell(row[1], lineno) if len(row) == 2 else 1.0
        if not 0.0 <= c <= 1.0:
            raise CensacvError(f"row {lineno}: weight {c} outside [0, 1]")
        ys.append(y)
        cs.append(c)
    return ModulatedSeries(ys, cs)


def read_csv(path) -> ModulatedSeries:
    return parse_csv(Path(path).read_text())


def format_csv(series: ModulatedSeries, header: bool = True) -> str:
    # repr() round-trips every finite float exactly
    lines = ["y,c"] if header else []
    lines += [f"{float(y)!r},{float(c)!r}" for y, c in zip(series.y, series.c)]
    return "\n".join(lines) + "\n"


def write_csv(series: ModulatedSeries, path, header: bool = True) -> None:
    Path(path).write_text(format_csv(series, header=header))
