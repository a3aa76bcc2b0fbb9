"""Synthetic Raman mixtures and the RaMixNet classifiers, built on numpy."""

from .errors import (
    BaselineError,
    CheckpointError,
    ConfigError,
    DegenerateSpectrumError,
    GridError,
    LabelError,
    NumericalError,
    RamixError,
    ShapeError,
    SpectrumFormatError,
)
from .spectrum import CANONICAL_GRID, MixtureLabel, Spectrum, WavenumberGrid, normalize_minmax, resample
from .synthgen import CompoundLibrary, MixtureGenConfig, enumerate_mixtures, standard_library
from .augment import AugmentConfig, BaselineSpec, augment_spectrum, strip_augmentation
from .model import ModelConfig, RaMixNet, build_model, predict, ratios_to_volume

__version__ = "0.1.0"
