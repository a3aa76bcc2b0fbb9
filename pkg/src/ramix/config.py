"""Run configuration: one JSON document, schema-validated, with documented defaults."""

from __future__ import annotations

import copy

import jsonschema

from .augment import FAMILIES, AugmentConfig
from .errors import ConfigError
from .io_utils import read_json
from .model import MSE_WEIGHT_MODES, VARIANTS, ModelConfig
from .spectrum import WavenumberGrid
from .synthgen import FULL_SCALE_UL, STANDARD_COMPOUNDS, MixtureGenConfig
from .train import TrainConfig

DEFAULTS = {
    "seed": 0,
    "grid": {"start_cm1": 300.0, "end_cm1": 2500.0, "n_points": 2201},
    "compounds": {"count": 4},
    "mixture_gen": {"levels": 10, "include_full_scale": True},
    "augment": {
        "enabled": True,
        "repeats": 2,
        "include_clean": True,
        "shift_range": [-0.1, 0.1],
        "scale_range": [0.8, 1.2],
        "families": list(FAMILIES),
        "polynomial_coeff_range": [-0.009, 0.009],
        "renormalize_after_baseline": False,
    },
    "model": {
        "variant": "ramixnet1",
        "conv_blocks": [[16, 9], [32, 9], [64, 9]],
        "pool_window": 2,
        "dense_sizes": [256],
    },
    "train": {
        "epochs": 50,
        "batch_size": 32,
        "learning_rate": 0.001,
        "lambda_reg": 1.0,
        "validation_fraction": 0.1,
        "patience": 20,
        "mse_weight_mode": "uniform",
        "absent_weight": 0.25,
        "samples_per_epoch": None,
    },
    "eval": {"threshold": 0.5, "full_scale_ul": FULL_SCALE_UL},
    "paths": {
        "compounds": "compounds",
        "dataset": "dataset",
        "test_set": "testset",
        "model": "model",
        "eval": "eval",
        "plots": "plots",
    },
}

_interval = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}


def _obj(props, required=()):
    return {"type": "object", "additionalProperties": False, "properties": props, "required": list(required)}


SCHEMA = _obj(
    {
        "seed": {"type": "integer", "minimum": 0},
        "grid": _obj(
            {
                "start_cm1": {"type": "number"},
                "end_cm1": {"type": "number"},
                "n_points": {"type": "integer", "minimum": 2},
            }
        ),
        "compounds": _obj({"count": {"type": "integer", "minimum": 1, "maximum": len(STANDARD_COMPOUNDS)}}),
        "mixture_gen": _obj({"levels": {"type": "integer", "minimum": 2}, "include_full_scale": {"type": "boolean"}}),
        "augment": _obj(
            {
                "enabled": {"type": "boolean"},
                "repeats": {"type": "integer", "minimum": 0},
                "include_clean": {"type": "boolean"},
                "shift_range": _interval,
                "scale_range": _interval,
                "families": {"type": "array", "items": {"enum": list(FAMILIES)}, "uniqueItems": True},
                "polynomial_coeff_range": _interval,
                "renormalize_after_baseline": {"type": "boolean"},
            }
        ),
        "model": _obj(
            {
                "variant": {"enum": list(VARIANTS)},
                "conv_blocks": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2, "maxItems": 2},
                },
                "pool_window": {"type": "integer", "minimum": 1},
                "dense_sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            }
        ),
        "train": _obj(
            {
                "epochs": {"type": "integer", "minimum": 1},
                "batch_size": {"type": "integer", "minimum": 1},
                "learning_rate": {"type": "number", "exclusiveMinimum": 0},
                "lambda_reg": {"type": "number", "minimum": 0},
                "validation_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "patience": {"type": "integer", "minimum": 1},
                "mse_weight_mode": {"enum": list(MSE_WEIGHT_MODES)},
                "absent_weight": {"type": "number", "minimum": 0},
                "samples_per_epoch": {"type": ["integer", "null"], "minimum": 1},
            }
        ),
        "eval": _obj({"threshold": {"type": "number"}, "full_scale_ul": {"type": "number", "exclusiveMinimum": 0}}),
        "paths": _obj({k: {"type": "string", "minLength": 1} for k in DEFAULTS["paths"]}),
    }
)


def _merge(base, override):
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def validate(raw: dict) -> None:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None


def resolve(raw: dict | None = None, overrides: dict | None = None) -> dict:
    """Validate ``raw``, fill defaults, apply ``overrides`` (validated as well)."""
    raw = raw or {}
    validate(raw)
    cfg = _merge(DEFAULTS, raw)
    if overrides:
        validate(overrides)
        cfg = _merge(cfg, overrides)
    validate(cfg)
    return cfg


def load(path=None, overrides: dict | None = None) -> dict:
    raw = {}
    if path is not None:
        try:
            raw = read_json(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
    return resolve(raw, overrides)


# -- typed views


def grid(cfg: dict) -> WavenumberGrid:
    g = cfg["grid"]
    try:
        return WavenumberGrid(g["start_cm1"], g["end_cm1"], g["n_points"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def mixture_gen(cfg: dict) -> MixtureGenConfig:
    return MixtureGenConfig(**cfg["mixture_gen"])


def augment(cfg: dict) -> AugmentConfig | None:
    a = cfg["augment"]
    if not a["enabled"]:
        return None
    try:
        return AugmentConfig(
            shift_range=tuple(a["shift_range"]),
            scale_range=tuple(a["scale_range"]),
            families=tuple(a["families"]),
            polynomial_coeff_range=tuple(a["polynomial_coeff_range"]),
            seed=cfg["seed"],
            repeats=a["repeats"],
            include_clean=a["include_clean"],
            renormalize_after_baseline=a["renormalize_after_baseline"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def model(cfg: dict, num_classes: int, input_length: int) -> ModelConfig:
    m = cfg["model"]
    try:
        return ModelConfig(
            conv_blocks=tuple(tuple(b) for b in m["conv_blocks"]),
            pool_window=m["pool_window"],
            dense_sizes=tuple(m["dense_sizes"]),
            num_classes=num_classes,
            variant=m["variant"],
            input_length=input_length,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def train(cfg: dict) -> TrainConfig:
    t = dict(cfg["train"])
    try:
        return TrainConfig(seed=cfg["seed"], threshold=cfg["eval"]["threshold"], **t)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
