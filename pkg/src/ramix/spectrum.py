"""Wavenumber grids, spectra, mixture labels and elementary spectral arithmetic.

All values are immutable after construction: intensity arrays are stored as
read-only float64 copies.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateSpectrumError, GridError, LabelError, ShapeError, SpectrumFormatError

CSV_HEADER = ("wavenumber_cm1", "intensity")


@dataclass(frozen=True)
class WavenumberGrid:
    """Uniform, endpoint-inclusive wavenumber axis in cm^-1."""

    start_cm1: float
    end_cm1: float
    n_points: int

    def __post_init__(self):
        if not (np.isfinite(self.start_cm1) and np.isfinite(self.end_cm1)):
            raise GridError("grid bounds must be finite")
        if not self.start_cm1 < self.end_cm1:
            raise GridError(f"grid start {self.start_cm1} must be below end {self.end_cm1}")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise GridError(f"grid needs at least 2 points, got {self.n_points}")
        object.__setattr__(self, "start_cm1", float(self.start_cm1))
        object.__setattr__(self, "end_cm1", float(self.end_cm1))
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def spacing(self) -> float:
        return (self.end_cm1 - self.start_cm1) / (self.n_points - 1)

    def point(self, i: int) -> float:
        return grid_point(self, i)

    def points(self) -> np.ndarray:
        x = self.start_cm1 + np.arange(self.n_points) * self.spacing
        x[-1] = self.end_cm1
        return x

    def covers(self, other: "WavenumberGrid") -> bool:
        return self.start_cm1 <= other.start_cm1 and self.end_cm1 >= other.end_cm1

    def to_dict(self) -> dict:
        return {"start_cm1": self.start_cm1, "end_cm1": self.end_cm1, "n_points": self.n_points}

    @classmethod
    def from_dict(cls, d: dict) -> "WavenumberGrid":
        return cls(d["start_cm1"], d["end_cm1"], d["n_points"])


CANONICAL_GRID = WavenumberGrid(300.0, 2500.0, 2201)


def grid_point(grid: WavenumberGrid, i: int) -> float:
    """Wavenumber of point ``i``; both endpoints are returned exactly."""
    if not 0 <= i < grid.n_points:
        raise IndexError(f"grid index {i} out of range [0, {grid.n_points})")
    if i == grid.n_points - 1:
        return grid.end_cm1
    return grid.start_cm1 + i * grid.spacing


def _frozen(values, length=None) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise ShapeError(f"expected {length} values, got {arr.shape[0]}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Intensity vector sampled on a :class:`WavenumberGrid`."""

    grid: WavenumberGrid
    intensities: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.intensities, self.grid.n_points)
        if not np.all(np.isfinite(arr)):
            raise ValueError("spectrum intensities must be finite")
        object.__setattr__(self, "intensities", arr)

    def __len__(self):
        return self.grid.n_points

    def __eq__(self, other):
        if not isinstance(other, Spectrum):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.intensities, other.intensities)

    __hash__ = None

    @property
    def wavenumbers(self) -> np.ndarray:
        return self.grid.points()

    def with_intensities(self, values) -> "Spectrum":
        return Spectrum(self.grid, values)


@dataclass(frozen=True, eq=False)
class MixtureLabel:
    """Presence bits and ratios per compound; serialises to ``[presence | ratios]``."""

    presence: np.ndarray
    ratios: np.ndarray = field(default=None)

    def __post_init__(self):
        presence = np.asarray(self.presence)
        ratios = _frozen(self.ratios)
        if presence.ndim != 1 or presence.shape != ratios.shape:
            raise LabelError("presence and ratios must be vectors of equal length")
        if ratios.size == 0:
            raise LabelError("label needs at least one component")
        if not np.all(np.isin(presence, (0, 1))):
            raise LabelError("presence entries must be 0 or 1")
        if np.any(ratios < 0) or np.any(ratios > 1) or not np.all(np.isfinite(ratios)):
            raise LabelError("ratios must lie in [0, 1]")
        if not np.array_equal(presence.astype(bool), ratios > 0):
            raise LabelError("presence bit must be set exactly where ratio > 0")
        presence = presence.astype(np.int8)
        presence.setflags(write=False)
        object.__setattr__(self, "presence", presence)
        object.__setattr__(self, "ratios", ratios)

    @property
    def n_components(self) -> int:
        return self.ratios.shape[0]

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.presence.astype(np.float64), self.ratios])

    @classmethod
    def from_vector(cls, vec) -> "MixtureLabel":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.ndim != 1 or vec.size == 0 or vec.size % 2:
            raise LabelError(f"serialised label must have even length 2C, got {vec.shape}")
        c = vec.size // 2
        return cls(vec[:c], vec[c:])

    @classmethod
    def from_ratios(cls, ratios) -> "MixtureLabel":
        ratios = np.asarray(ratios, dtype=np.float64)
        if np.any(ratios < 0) or np.any(ratios > 1):
            raise LabelError(f"ratios out of [0, 1]: {ratios.tolist()}")
        return cls((ratios > 0).astype(np.int8), ratios)

    def __eq__(self, other):
        if not isinstance(other, MixtureLabel):
            return NotImplemented
        return np.array_equal(self.to_vector(), other.to_vector())

    __hash__ = None


def resample(src: Spectrum, dst_grid: WavenumberGrid) -> Spectrum:
    """Piecewise-linear interpolation of ``src`` onto ``dst_grid``."""
    if src.grid == dst_grid:
        return src
    if not src.grid.covers(dst_grid):
        raise GridError(
            f"source range [{src.grid.start_cm1}, {src.grid.end_cm1}] does not cover "
            f"[{dst_grid.start_cm1}, {dst_grid.end_cm1}]"
        )
    y = np.interp(dst_grid.points(), src.grid.points(), src.intensities)
    return Spectrum(dst_grid, y)


def normalize_minmax(s: Spectrum) -> Spectrum:
    y = s.intensities
    lo, hi = y.min(), y.max()
    if not hi > lo:
        raise DegenerateSpectrumError("cannot min-max normalise a constant spectrum")
    return Spectrum(s.grid, (y - lo) / (hi - lo))


def linear_combine(spectra: Sequence[Spectrum], weights: Sequence[float]) -> Spectrum:
    """Pointwise weighted sum of spectra sharing one grid."""
    if len(spectra) != len(weights):
        raise ShapeError(f"{len(spectra)} spectra but {len(weights)} weights")
    if not spectra:
        raise ShapeError("need at least one spectrum")
    grid = spectra[0].grid
    for s in spectra[1:]:
        if s.grid != grid:
            raise GridError("all spectra must share one grid")
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    out = np.zeros(grid.n_points)
    for wk, s in zip(w, spectra):
        out += wk * s.intensities
    return Spectrum(grid, out)


# ---------------------------------------------------------------- CSV I/O


def format_spectrum_csv(s: Spectrum) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    for x, y in zip(s.grid.points(), s.intensities):
        buf.write(f"{float(x):.6f},{float(y)!r}\n")
    return buf.getvalue()


def write_spectrum_csv(s: Spectrum, path) -> None:
    from .io_utils import atomic_write_text

    atomic_write_text(path, format_spectrum_csv(s))


def parse_spectrum_csv(text: str, path=None, grid: WavenumberGrid | None = CANONICAL_GRID) -> Spectrum:
    """Parse the two-column CSV format; resample onto ``grid`` unless it is None.

    The file's own axis must be ascending and uniform.
    """
    rows = csv.reader(io.StringIO(text))
    try:
        header = next(rows)
    except StopIteration:
        raise SpectrumFormatError("empty file", path, 1) from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise SpectrumFormatError(f"expected header {','.join(CSV_HEADER)!r}", path, 1)
    xs, ys = [], []
    for lineno, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise SpectrumFormatError(f"expected 2 columns, got {len(row)}", path, lineno)
        try:
            x, y = float(row[0]), float(row[1])
        except ValueError:
            raise SpectrumFormatError(f"non-numeric value in {row!r}", path, lineno) from None
        if not (np.isfinite(x) and np.isfinite(y)):
            raise SpectrumFormatError("non-finite value", path, lineno)
        if xs and x <= xs[-1]:
            raise SpectrumFormatError("wavenumbers must be strictly ascending", path, lineno)
        xs.append(x)
        ys.append(y)
    if len(xs) < 2:
        raise SpectrumFormatError("need at least 2 data rows", path)
    x = np.asarray(xs)
    src_grid = WavenumberGrid(x[0], x[-1], len(x))
    if not np.allclose(x, src_grid.points(), rtol=0, atol=1e-6 * max(1.0, src_grid.spacing) + 1e-4):
        raise SpectrumFormatError("wavenumber axis is not uniformly spaced", path)
    src = Spectrum(src_grid, ys)
    if grid is None:
        return src
    try:
        return resample(src, grid)
    except GridError as exc:
        raise SpectrumFormatError(str(exc), path) from None


def read_spectrum_csv(path, grid: WavenumberGrid | None = CANONICAL_GRID) -> Spectrum:
    with open(os.fspath(path), encoding="utf-8", newline="") as fh:
        return parse_spectrum_csv(fh.read(), path=path, grid=grid)
