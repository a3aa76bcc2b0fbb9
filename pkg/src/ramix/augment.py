"""Random shift/scale transforms and additive parametric baselines.

Randomness comes from numpy's PCG64 bit generator. Per-item substreams are
seeded with ``SeedSequence([seed, stream, index])`` so every item can be
regenerated on its own, in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import BaselineError
from .spectrum import Spectrum, WavenumberGrid, normalize_minmax

GAUSSIAN = "gaussian"
SIGMOID = "sigmoid"
EXPONENTIAL = "exponential"
POLYNOMIAL = "polynomial"
FAMILIES = (GAUSSIAN, SIGMOID, EXPONENTIAL, POLYNOMIAL)

# Sampling intervals per baseline family (closed, in the grid's cm^-1 units).
GAUSSIAN_MEAN_RANGE = (1000.0, 1500.0)
GAUSSIAN_SIGMA2 = 800.0
GAUSSIAN_AMPLITUDE_RANGE = (0.0, 0.3)
SIGMOID_SLOPE_RANGE = (0.001, 0.03)
SIGMOID_CENTRE_RANGE = (100.0, 2400.0)
SIGMOID_AMPLITUDE_RANGE = (0.0, 0.5)
EXPONENTIAL_SLOPE_RANGE = (0.001, 0.009)
EXPONENTIAL_AMPLITUDE_RANGE = (0.0, 1.0)
POLYNOMIAL_DEGREE_RANGE = (1, 5)
# sum_i 0.009 * 2.5**i over i = 1..5 is about 1.45, so the baseline stays within 1.5
DEFAULT_POLY_COEFF_RANGE = (-0.009, 0.009)
POLY_AXIS_HALF_SPAN = 2.5

TRAIN_STREAM = 0


def substream(seed: int, index: int, stream: int = TRAIN_STREAM) -> np.random.Generator:
    """Independent generator for item ``index`` of ``stream`` under master ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(stream), int(index)])))


def _in(value, bounds) -> bool:
    return bounds[0] <= value <= bounds[1]


@dataclass(frozen=True)
class BaselineSpec:
    """One sampled baseline: a family tag and its parameters.

    Parameter keys per family: gaussian ``mu, sigma2, amplitude``; sigmoid
    ``slope, centre, amplitude``; exponential ``slope, amplitude``;
    polynomial ``coefficients`` (a_1..a_n, no constant term).
    """

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise BaselineError(f"unknown baseline family {self.family!r}")
        params = dict(self.params)
        if "coefficients" in params:
            params["coefficients"] = tuple(float(a) for a in params["coefficients"])
        object.__setattr__(self, "params", params)

    @property
    def degree(self) -> int:
        return len(self.params["coefficients"])

    def validate(self, poly_coeff_range=DEFAULT_POLY_COEFF_RANGE) -> None:
        p = self.params
        try:
            if self.family == GAUSSIAN:
                ok = (
                    _in(p["mu"], GAUSSIAN_MEAN_RANGE)
                    and p["sigma2"] == GAUSSIAN_SIGMA2
                    and _in(p["amplitude"], GAUSSIAN_AMPLITUDE_RANGE)
                )
            elif self.family == SIGMOID:
                ok = (
                    _in(p["slope"], SIGMOID_SLOPE_RANGE)
                    and _in(p["centre"], SIGMOID_CENTRE_RANGE)
                    and _in(p["amplitude"], SIGMOID_AMPLITUDE_RANGE)
                )
            elif self.family == EXPONENTIAL:
                ok = _in(p["slope"], EXPONENTIAL_SLOPE_RANGE) and _in(p["amplitude"], EXPONENTIAL_AMPLITUDE_RANGE)
            else:
                coeffs = p["coefficients"]
                ok = _in(len(coeffs), POLYNOMIAL_DEGREE_RANGE) and all(_in(a, poly_coeff_range) for a in coeffs)
        except KeyError as exc:
            raise BaselineError(f"{self.family} baseline missing parameter {exc}") from None
        if not ok:
            raise BaselineError(f"{self.family} baseline parameters out of range: {p}")

    def to_dict(self) -> dict:
        params = dict(self.params)
        if "coefficients" in params:
            params["coefficients"] = list(params["coefficients"])
        return {"family": self.family, "params": params}

    @classmethod
    def from_dict(cls, d: dict) -> "BaselineSpec":
        return cls(d["family"], d["params"])


@dataclass(frozen=True)
class AugmentConfig:
    shift_range: tuple = (-0.1, 0.1)
    scale_range: tuple = (0.8, 1.2)
    families: tuple = FAMILIES
    polynomial_coeff_range: tuple = DEFAULT_POLY_COEFF_RANGE
    seed: int = 0
    repeats: int = 2
    include_clean: bool = True
    renormalize_after_baseline: bool = False

    def __post_init__(self):
        for name in ("shift_range", "scale_range", "polynomial_coeff_range"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} must be a non-empty interval, got {(lo, hi)}")
            object.__setattr__(self, name, (float(lo), float(hi)))
        if not self.scale_range[0] > 0:
            raise ValueError("scale_range must be strictly positive")
        fams = tuple(self.families)
        for f in fams:
            if f not in FAMILIES:
                raise ValueError(f"unknown baseline family {f!r}")
        # canonical order keeps sampling independent of how the set was spelled
        object.__setattr__(self, "families", tuple(f for f in FAMILIES if f in fams))
        if self.repeats < 0:
            raise ValueError("repeats must be >= 0")


def poly_axis(grid: WavenumberGrid) -> np.ndarray:
    """Grid mapped linearly onto [-2.5, 2.5], endpoints inclusive."""
    return -POLY_AXIS_HALF_SPAN + 2 * POLY_AXIS_HALF_SPAN * np.arange(grid.n_points) / (grid.n_points - 1)


def eval_baseline(spec: BaselineSpec, grid: WavenumberGrid, poly_coeff_range=DEFAULT_POLY_COEFF_RANGE) -> Spectrum:
    spec.validate(poly_coeff_range)
    p = spec.params
    if spec.family == GAUSSIAN:
        x = grid.points()
        y = p["amplitude"] * np.exp(-((x - p["mu"]) ** 2) / (2.0 * p["sigma2"]))
    elif spec.family == SIGMOID:
        x = grid.points()
        # for the allowed slopes/centres the exponent stays far below overflow
        y = p["amplitude"] / (1.0 + np.exp(-p["slope"] * (x - p["centre"])))
    elif spec.family == EXPONENTIAL:
        x = grid.points()
        y = p["amplitude"] * np.exp(-p["slope"] * x)
    else:
        xt = poly_axis(grid)
        y = np.zeros(grid.n_points)
        term = np.ones(grid.n_points)
        for a in p["coefficients"]:
            term = term * xt
            y += a * term
    return Spectrum(grid, y)


def sample_baseline(cfg: AugmentConfig, rng: np.random.Generator) -> BaselineSpec:
    if not cfg.families:
        raise ValueError("no baseline family enabled")
    family = cfg.families[int(rng.integers(len(cfg.families)))]
    u = rng.uniform
    if family == GAUSSIAN:
        params = {
            "mu": u(*GAUSSIAN_MEAN_RANGE),
            "sigma2": GAUSSIAN_SIGMA2,
            "amplitude": u(*GAUSSIAN_AMPLITUDE_RANGE),
        }
    elif family == SIGMOID:
        params = {
            "slope": u(*SIGMOID_SLOPE_RANGE),
            "centre": u(*SIGMOID_CENTRE_RANGE),
            "amplitude": u(*SIGMOID_AMPLITUDE_RANGE),
        }
    elif family == EXPONENTIAL:
        params = {"slope": u(*EXPONENTIAL_SLOPE_RANGE), "amplitude": u(*EXPONENTIAL_AMPLITUDE_RANGE)}
    else:
        degree = int(rng.integers(POLYNOMIAL_DEGREE_RANGE[0], POLYNOMIAL_DEGREE_RANGE[1] + 1))
        params = {"coefficients": tuple(float(a) for a in u(*cfg.polynomial_coeff_range, size=degree))}
    return BaselineSpec(family, {k: (float(v) if not isinstance(v, tuple) else v) for k, v in params.items()})


class Augmented(NamedTuple):
    spectrum: Spectrum
    baseline: BaselineSpec
    shift: float
    scale: float

    def provenance(self) -> dict:
        return {"baseline": self.baseline.to_dict(), "shift": self.shift, "scale": self.scale}


def augment_spectrum(s: Spectrum, cfg: AugmentConfig, rng: np.random.Generator) -> Augmented:
    """Scale, shift, min-max normalise, then add a random baseline."""
    scale = float(rng.uniform(*cfg.scale_range))
    shift = float(rng.uniform(*cfg.shift_range))
    spec = sample_baseline(cfg, rng)
    return Augmented(apply_augmentation(s, spec, shift, scale, cfg), spec, shift, scale)


def apply_augmentation(s: Spectrum, spec: BaselineSpec, shift: float, scale: float, cfg: AugmentConfig) -> Spectrum:
    """Deterministic part of :func:`augment_spectrum` given recorded provenance."""
    base = normalize_minmax(s.with_intensities(scale * s.intensities + shift))
    y = base.intensities + eval_baseline(spec, s.grid, cfg.polynomial_coeff_range).intensities
    out = s.with_intensities(y)
    if cfg.renormalize_after_baseline:
        out = normalize_minmax(out)
    return out


def strip_augmentation(augmented: Spectrum, spec: BaselineSpec, shift: float, scale: float, cfg: AugmentConfig) -> Spectrum:
    """Remove the baseline and undo shift/scale, giving the normalised clean input.

    Min-max normalisation absorbs any positive affine map, so once the baseline
    is subtracted the remaining signal is already ``normalize_minmax(input)``.
    Not available when ``renormalize_after_baseline`` is set.
    """
    if cfg.renormalize_after_baseline:
        raise ValueError("augmentation with re-normalisation after the baseline is not invertible")
    if not scale > 0 or not math.isfinite(shift):
        raise ValueError("invalid recorded shift/scale")
    base = eval_baseline(spec, augmented.grid, cfg.polynomial_coeff_range)
    return augmented.with_intensities(augmented.intensities - base.intensities)
