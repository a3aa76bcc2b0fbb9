"""RaMixNet I (multi-label classifier) and RaMixNet II (classifier + ratio regressor)."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, GridError, ShapeError
from .nn.layers import Conv1D, Dense, Flatten, MaxPool1D, ReLU, Sequential, sigmoid
from .nn.losses import bce_loss, weighted_mse_loss
from .spectrum import CANONICAL_GRID, Spectrum
from .synthgen import FULL_SCALE_UL

RAMIXNET1 = "ramixnet1"
RAMIXNET2 = "ramixnet2"
VARIANTS = (RAMIXNET1, RAMIXNET2)
MSE_WEIGHT_MODES = ("uniform", "presence_emphasis")


@dataclass(frozen=True)
class ModelConfig:
    conv_blocks: tuple = ((16, 9), (32, 9), (64, 9))
    pool_window: int = 2
    dense_sizes: tuple = (256,)
    num_classes: int = 4
    variant: str = RAMIXNET1
    input_length: int = CANONICAL_GRID.n_points

    def __post_init__(self):
        blocks = tuple(tuple(int(v) for v in b) for b in self.conv_blocks)
        object.__setattr__(self, "conv_blocks", blocks)
        object.__setattr__(self, "dense_sizes", tuple(int(d) for d in self.dense_sizes))
        if not blocks:
            raise ConfigError("at least one conv block is required")
        for m, n in blocks:
            if m < 1 or n < 1 or n % 2 == 0:
                raise ConfigError(f"conv block ({m}, {n}) needs positive filters and an odd kernel size")
        if self.pool_window < 1 or self.num_classes < 1 or self.input_length < 1:
            raise ConfigError("pool_window, num_classes and input_length must be positive")
        if any(d < 1 for d in self.dense_sizes):
            raise ConfigError("dense sizes must be positive")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")

    def encoded_length(self) -> int:
        length = self.input_length
        for _ in self.conv_blocks:
            length = -(-length // self.pool_window)
        return length

    def to_dict(self) -> dict:
        d = asdict(self)
        d["conv_blocks"] = [list(b) for b in self.conv_blocks]
        d["dense_sizes"] = list(self.dense_sizes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


def parameter_count(cfg: ModelConfig) -> int:
    """Closed-form parameter count of the network built from ``cfg``."""
    total = 0
    cin = 1
    for m, n in cfg.conv_blocks:
        total += m * cin * n + m
        cin = m
    width = cfg.encoded_length() * cin
    head = 0
    for d in cfg.dense_sizes:
        head += width * d + d
        width = d
    head += width * cfg.num_classes + cfg.num_classes
    return total + head * (2 if cfg.variant == RAMIXNET2 else 1)


@dataclass
class LossParts:
    total: float
    bce: float
    mse: float | None
    grads: dict = field(repr=False)


class RaMixNet:
    """Shared convolutional encoder followed by one (I) or two (II) dense heads.

    Inputs are spectra batches of shape (batch, input_length). Every head ends
    in ``num_classes`` logits; sigmoid turns them into presence probabilities
    (``cls``) or mixture ratios (``reg``).
    """

    def __init__(self, cfg: ModelConfig, seed: int = 0):
        self.cfg = cfg
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x1A17]))
        layers = []
        cin = 1
        for i, (m, n) in enumerate(cfg.conv_blocks):
            conv = Conv1D(cin, m, n, rng=rng, init="he")
            conv.needs_input_grad = i > 0
            layers += [conv, ReLU(), MaxPool1D(cfg.pool_window)]
            cin = m
        layers.append(Flatten())
        self.encoder = Sequential(layers)
        flat = cfg.encoded_length() * cin
        self.heads = {"cls": self._head(flat, rng)}
        if cfg.variant == RAMIXNET2:
            self.heads["reg"] = self._head(flat, rng)

    def _head(self, width, rng):
        layers = []
        for d in self.cfg.dense_sizes:
            layers += [Dense(width, d, rng=rng, init="he"), ReLU()]
            width = d
        layers.append(Dense(width, self.cfg.num_classes, rng=rng, init="glorot"))
        return Sequential(layers)

    @property
    def variant(self) -> str:
        return self.cfg.variant

    # -- parameters

    def params(self) -> dict:
        out = self.encoder.named_params("encoder.")
        for name, head in self.heads.items():
            out.update(head.named_params(f"{name}."))
        return out

    def grads(self) -> dict:
        out = self.encoder.named_grads("encoder.")
        for name, head in self.heads.items():
            out.update(head.named_grads(f"{name}."))
        return out

    def n_params(self) -> int:
        return sum(p.size for p in self.params().values())

    def get_weights(self) -> dict:
        return {k: v.copy() for k, v in self.params().items()}

    def set_weights(self, weights: dict) -> None:
        params = self.params()
        if params.keys() != weights.keys():
            raise ShapeError("weight names do not match the model")
        for k, p in params.items():
            if p.shape != weights[k].shape:
                raise ShapeError(f"weight {k} has shape {weights[k].shape}, expected {p.shape}")
            p[...] = weights[k]

    # -- forward / backward

    def _as_input(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.cfg.input_length:
            raise ShapeError(f"expected (batch, {self.cfg.input_length}) input, got {x.shape}")
        return x[:, :, None]

    def forward(self, x) -> dict:
        """Logits per head for a batch of spectra."""
        z = self.encoder.forward(self._as_input(x))
        return {name: head.forward(z) for name, head in self.heads.items()}

    def compute_loss(self, x, y, lambda_reg=1.0, mse_weight_mode="uniform", absent_weight=0.25) -> LossParts:
        """Forward + backward on one batch.

        ``y`` holds serialised labels ``[presence | ratios]`` of width 2C. The
        total loss is BCE for RaMixNet I and ``BCE + lambda_reg * weighted MSE``
        on the sigmoid ratio outputs for RaMixNet II.
        """
        c = self.cfg.num_classes
        y = np.asarray(y, dtype=np.float64)
        if y.ndim != 2 or y.shape[1] != 2 * c:
            raise ShapeError(f"labels must have shape (batch, {2 * c}), got {y.shape}")
        presence, ratios = y[:, :c], y[:, c:]
        logits = self.forward(x)
        bce, dcls = bce_loss(logits["cls"], presence)
        total = bce
        dz = self.heads["cls"].backward(dcls)
        mse = None
        if "reg" in self.heads:
            pred = sigmoid(logits["reg"])
            weights = mse_weights(presence, mse_weight_mode, absent_weight)
            mse, dpred = weighted_mse_loss(pred, ratios, weights)
            total = bce + lambda_reg * mse
            if lambda_reg != 0.0:
                dz = dz + self.heads["reg"].backward(lambda_reg * dpred * pred * (1.0 - pred))
            else:
                for layer in self.heads["reg"].layers:
                    layer.zero_grad()
        self.encoder.backward(dz)
        return LossParts(float(total), float(bce), None if mse is None else float(mse), self.grads())

    def loss_and_grads(self, x, y, lambda_reg=1.0, mse_weight_mode="uniform", absent_weight=0.25):
        parts = self.compute_loss(x, y, lambda_reg, mse_weight_mode, absent_weight)
        return parts.total, parts.grads

    def forward_batched(self, x, batch_size=64) -> dict:
        """Logits per head for many spectra, computed in chunks."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        chunks = {name: [] for name in self.heads}
        for start in range(0, x.shape[0], batch_size):
            for name, z in self.forward(x[start : start + batch_size]).items():
                chunks[name].append(z)
        c = self.cfg.num_classes
        return {name: np.concatenate(v) if v else np.zeros((0, c)) for name, v in chunks.items()}

    def predict_arrays(self, x, batch_size=64):
        """Sigmoid outputs for many spectra: ``(class_probs, ratios_or_None)``."""
        logits = self.forward_batched(x, batch_size)
        ratios = sigmoid(logits["reg"]) if "reg" in logits else None
        return sigmoid(logits["cls"]), ratios

def mse_weights(presence, mode="uniform", absent_weight=0.25):
    if mode == "uniform":
        return None
    if mode == "presence_emphasis":
        return np.where(np.asarray(presence) > 0, 1.0, absent_weight)
    raise ConfigError(f"unknown mse_weight_mode {mode!r}")


def build_model(cfg: ModelConfig, seed: int = 0) -> RaMixNet:
    return RaMixNet(cfg, seed)


@dataclass(frozen=True, eq=False)
class Prediction:
    class_probs: np.ndarray
    presence: np.ndarray
    ratios: np.ndarray | None = None
    threshold: float = 0.5

    def volumes_ul(self, full_scale_ul=FULL_SCALE_UL):
        if self.ratios is None:
            return None
        return ratios_to_volume(self.ratios, full_scale_ul)

    def to_dict(self) -> dict:
        d = {
            "class_probs": [float(p) for p in self.class_probs],
            "presence": [int(b) for b in self.presence],
            "threshold": self.threshold,
        }
        if self.ratios is not None:
            d["ratios"] = [float(r) for r in self.ratios]
            d["volumes_ul"] = [float(v) for v in self.volumes_ul()]
        return d


def threshold_presence(probs, threshold=0.5) -> np.ndarray:
    return (np.asarray(probs) >= threshold).astype(np.int8)


def predict(model: RaMixNet, s: Spectrum, threshold: float = 0.5) -> Prediction:
    if s.grid.n_points != model.cfg.input_length or (
        model.cfg.input_length == CANONICAL_GRID.n_points and s.grid != CANONICAL_GRID
    ):
        raise GridError("spectrum is not on the model's input grid; resample it first")
    probs, ratios = model.predict_arrays(s.intensities[None, :])
    return Prediction(probs[0], threshold_presence(probs[0], threshold), None if ratios is None else ratios[0], threshold)


def ratios_to_volume(ratios, full_scale_ul=FULL_SCALE_UL) -> np.ndarray:
    """Convert ratios in [0, 1] to volumes in ul, rounded to 1e-6 ul."""
    r = np.asarray(ratios, dtype=np.float64)
    if np.any(r < 0) or np.any(r > 1) or not np.all(np.isfinite(r)):
        raise ValueError(f"ratios must lie in [0, 1], got {r.tolist()}")
    return np.round(r * full_scale_ul, 6) + 0.0
