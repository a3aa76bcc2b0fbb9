"""Pure-compound stand-in spectra and combinatorial mixture enumeration."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import LabelError, ShapeError
from .spectrum import CANONICAL_GRID, MixtureLabel, Spectrum, WavenumberGrid, linear_combine

LORENTZIAN = "lorentzian"
GAUSSIAN = "gaussian"

STANDARD_COMPOUNDS = ("aniline", "o-xylene", "pyridine", "toluene")

# Full-scale volume (ul) that a ratio of 1.0 corresponds to.
FULL_SCALE_UL = 200.0


@dataclass(frozen=True)
class PeakModel:
    center: float
    half_width: float
    amplitude: float
    shape: str = LORENTZIAN

    def __post_init__(self):
        if self.shape not in (LORENTZIAN, GAUSSIAN):
            raise ValueError(f"unknown peak shape {self.shape!r}")
        if not self.half_width > 0:
            raise ValueError("peak half_width must be positive")
        if not self.amplitude > 0:
            raise ValueError("peak amplitude must be positive")

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        d = x - self.center
        w = self.half_width
        if self.shape == LORENTZIAN:
            return self.amplitude * w * w / (d * d + w * w)
        return self.amplitude * np.exp(-d * d / (2.0 * w * w))


def _p(center, amplitude, half_width=6.0, shape=LORENTZIAN):
    return PeakModel(center, half_width, amplitude, shape)


# Desk-scale stand-ins for the four aromatic compounds. Every table shares the
# ring-breathing band at 1000 cm^-1; the remaining peaks are unique per compound.
# Do not edit: trained checkpoints and golden files depend on these constants.
STANDARD_PEAKS = {
    "aniline": (
        _p(1000.0, 1.00),
        _p(812.0, 0.55),
        _p(1176.0, 0.35),
        _p(1280.0, 0.25, 8.0),
        _p(1603.0, 0.50, 7.0),
    ),
    "o-xylene": (
        _p(1000.0, 0.45),
        _p(582.0, 0.30),
        _p(735.0, 1.00),
        _p(1052.0, 0.50),
        _p(1222.0, 0.35),
        _p(1450.0, 0.20, 10.0, GAUSSIAN),
    ),
    "pyridine": (
        _p(1000.0, 0.95),
        _p(652.0, 0.25),
        _p(1032.0, 1.00),
        _p(1148.0, 0.20),
        _p(1575.0, 0.22, 8.0),
    ),
    "toluene": (
        _p(1000.0, 1.00),
        _p(521.0, 0.15),
        _p(785.0, 0.45),
        _p(1210.0, 0.30),
        _p(1380.0, 0.18, 9.0, GAUSSIAN),
    ),
}


@dataclass(frozen=True)
class CompoundLibrary:
    names: tuple
    pure_spectra: tuple

    def __post_init__(self):
        names = tuple(self.names)
        spectra = tuple(self.pure_spectra)
        if not names:
            raise ValueError("library needs at least one compound")
        if len(set(names)) != len(names):
            raise ValueError("compound names must be unique")
        if len(names) != len(spectra):
            raise ShapeError("one spectrum per compound name required")
        grid = spectra[0].grid
        for name, s in zip(names, spectra):
            if s.grid != grid:
                raise ValueError("all library spectra must share one grid")
            if not np.isclose(s.intensities.max(), 1.0, rtol=0, atol=1e-12):
                raise ValueError(f"spectrum for {name!r} is not max-normalised to 1")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "pure_spectra", spectra)

    @property
    def n_compounds(self) -> int:
        return len(self.names)

    @property
    def grid(self) -> WavenumberGrid:
        return self.pure_spectra[0].grid

    def matrix(self) -> np.ndarray:
        """Pure spectra stacked as rows, shape (C, n_points)."""
        return np.stack([s.intensities for s in self.pure_spectra])


@dataclass(frozen=True)
class MixtureGenConfig:
    levels: int = 10
    include_full_scale: bool = True

    def __post_init__(self):
        if int(self.levels) != self.levels or self.levels < 2:
            raise ValueError(f"levels must be an integer >= 2, got {self.levels}")

    def level_ratio(self, k: int) -> float:
        if self.include_full_scale:
            return k / (self.levels - 1)
        return k / self.levels


def synth_pure_spectrum(peaks: Sequence[PeakModel], grid: WavenumberGrid = CANONICAL_GRID) -> Spectrum:
    """Sum of peak profiles on ``grid``, scaled so the maximum is exactly 1."""
    if not peaks:
        raise ValueError("at least one peak is required")
    x = grid.points()
    y = np.zeros_like(x)
    for p in peaks:
        if not grid.start_cm1 <= p.center <= grid.end_cm1:
            raise ValueError(f"peak centre {p.center} outside grid range")
        y += p.evaluate(x)
    return Spectrum(grid, y / y.max())


def standard_library(n_compounds: int = 4, grid: WavenumberGrid = CANONICAL_GRID) -> CompoundLibrary:
    """The checked-in stand-in library, truncated to the first ``n_compounds``."""
    if not 1 <= n_compounds <= len(STANDARD_COMPOUNDS):
        raise ValueError(f"n_compounds must be in 1..{len(STANDARD_COMPOUNDS)}")
    names = STANDARD_COMPOUNDS[:n_compounds]
    return CompoundLibrary(names, tuple(synth_pure_spectrum(STANDARD_PEAKS[n], grid) for n in names))


def make_label(ratios) -> MixtureLabel:
    ratios = np.asarray(ratios, dtype=np.float64)
    if ratios.ndim != 1:
        raise LabelError("ratios must be a vector")
    return MixtureLabel.from_ratios(ratios)


def level_tuples(n_compounds: int, cfg: MixtureGenConfig) -> Iterator[tuple]:
    """Nonzero level tuples in lexicographic order (last compound varies fastest)."""
    it = itertools.product(range(cfg.levels), repeat=n_compounds)
    next(it)  # all-zero tuple
    return it


def mixture_ratios(n_compounds: int, cfg: MixtureGenConfig) -> np.ndarray:
    """All ratio vectors produced by :func:`enumerate_mixtures`, shape (t^C - 1, C)."""
    ks = np.array(list(level_tuples(n_compounds, cfg)), dtype=np.float64).reshape(-1, n_compounds)
    denom = cfg.levels - 1 if cfg.include_full_scale else cfg.levels
    return ks / denom


def count_mixtures(n_compounds: int, cfg: MixtureGenConfig) -> int:
    return cfg.levels**n_compounds - 1


def enumerate_mixtures(lib: CompoundLibrary, cfg: MixtureGenConfig) -> Iterator[tuple]:
    """Yield ``(MixtureLabel, Spectrum)`` for every nonzero level tuple.

    Spectra are plain linear combinations of the pure spectra; they are not
    re-normalised here.
    """
    for ks in level_tuples(lib.n_compounds, cfg):
        ratios = [cfg.level_ratio(k) for k in ks]
        yield make_label(ratios), linear_combine(lib.pure_spectra, ratios)


# Compositions of the six held-out test solutions, in library order
# (aniline, o-xylene, pyridine, toluene). Each component is a full 200 ul dose.
STANDARD_MIXTURES = {
    "S1": (0, 1, 0, 1),
    "S2": (1, 0, 1, 0),
    "S3": (1, 1, 0, 0),
    "S4": (0, 1, 1, 0),
    "S5": (0, 1, 1, 1),
    "S6": (1, 0, 0, 1),
}

# Separates held-out test baselines from every training substream.
TEST_STREAM_TAG = 0x7E57


def standard_test_set(lib: CompoundLibrary, seed: int = 0, augment_cfg=None) -> list:
    """Six equal-part test mixtures S1..S6, each with a held-out random baseline.

    Returns a list of ``(name, MixtureLabel, Spectrum)``.
    """
    from .augment import AugmentConfig, augment_spectrum, substream

    if lib.names != STANDARD_COMPOUNDS:
        raise ValueError(f"standard test set needs the compounds {STANDARD_COMPOUNDS}, got {lib.names}")
    cfg = augment_cfg if augment_cfg is not None else AugmentConfig(seed=seed)
    out = []
    for i, (name, bits) in enumerate(STANDARD_MIXTURES.items()):
        ratios = np.asarray(bits, dtype=np.float64)
        mix = linear_combine(lib.pure_spectra, ratios)
        rng = substream(seed, i, stream=TEST_STREAM_TAG)
        aug = augment_spectrum(mix, cfg, rng)
        out.append((name, make_label(ratios), aug.spectrum))
    return out
