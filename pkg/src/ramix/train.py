"""Mini-batch Adam training with best-validation model selection."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .dataset import Dataset
from .errors import ConfigError, GridError, NumericalError
from .model import MSE_WEIGHT_MODES, RaMixNet, mse_weights
from .nn.layers import sigmoid
from .nn.losses import bce_loss, weighted_mse_loss
from .nn.optim import AdamState, adam_step

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 1e-3
    lambda_reg: float = 1.0
    validation_fraction: float = 0.1
    seed: int = 0
    patience: int = 20
    mse_weight_mode: str = "uniform"
    absent_weight: float = 0.25
    threshold: float = 0.5
    samples_per_epoch: int | None = None  # None: full pass over the training set

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be positive")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")
        if self.lambda_reg < 0:
            raise ConfigError("lambda_reg must be >= 0")
        if not 0 < self.validation_fraction < 1:
            raise ConfigError("validation_fraction must lie strictly between 0 and 1")
        if self.patience < 1:
            raise ConfigError("patience must be >= 1")
        if self.mse_weight_mode not in MSE_WEIGHT_MODES:
            raise ConfigError(f"mse_weight_mode must be one of {MSE_WEIGHT_MODES}")
        if self.samples_per_epoch is not None and self.samples_per_epoch < 1:
            raise ConfigError("samples_per_epoch must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


def split_dataset(ds: Dataset, validation_fraction: float, seed: int = 0, by_mixture: bool = True):
    """Random train/validation split.

    With ``by_mixture`` all copies of one enumerated mixture land on the same
    side, so validation mixtures are unseen during training.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x5B117]))
    groups = None
    if by_mixture and ds.records and all("mixture" in r for r in ds.records):
        groups = np.array([r["mixture"] for r in ds.records])
    if groups is None:
        groups = np.arange(len(ds))
    uniq = np.unique(groups)
    n_val = max(1, int(round(validation_fraction * uniq.size)))
    if n_val >= uniq.size:
        raise ConfigError("validation split leaves no training data")
    val_groups = rng.permutation(uniq)[:n_val]
    is_val = np.isin(groups, val_groups)
    return ds.subset(np.flatnonzero(~is_val)), ds.subset(np.flatnonzero(is_val))


def evaluate_losses(model: RaMixNet, X, Y, tcfg: TrainConfig, batch_size: int = 128) -> dict:
    """Forward-only losses and presence accuracy over a whole set."""
    c = model.cfg.num_classes
    logits = model.forward_batched(X, batch_size)
    presence = Y[:, :c]
    probs = sigmoid(logits["cls"])
    ratios = sigmoid(logits["reg"]) if "reg" in logits else None
    bce, _ = bce_loss(logits["cls"], presence)
    out = {"bce": bce, "mse": None, "total": bce}
    if ratios is not None:
        mse, _ = weighted_mse_loss(ratios, Y[:, c:], mse_weights(presence, tcfg.mse_weight_mode, tcfg.absent_weight))
        out["mse"] = mse
        out["total"] = bce + tcfg.lambda_reg * mse
    pred = probs >= tcfg.threshold
    truth = presence > 0
    out["label_accuracy"] = float(np.mean(pred == truth))
    out["exact_match"] = float(np.mean(np.all(pred == truth, axis=1)))
    return out


def train(model: RaMixNet, train_set: Dataset, val_set: Dataset, tcfg: TrainConfig, progress=None):
    """Train in place; returns ``(model, history)`` with the best-validation weights loaded.

    ``progress`` is an optional callable receiving each epoch's history row.
    """
    if len(train_set) == 0:
        raise ValueError("training set is empty")
    if len(val_set) == 0:
        raise ValueError("validation set is empty")
    L = model.cfg.input_length
    for ds in (train_set, val_set):
        if ds.X.shape[1] != L:
            raise GridError(f"dataset spectra have {ds.X.shape[1]} points, model expects {L}")
        if ds.n_classes != model.cfg.num_classes:
            raise ValueError("dataset class count does not match the model")

    rng = np.random.default_rng(np.random.SeedSequence([int(tcfg.seed), 0x7A11]))
    opt = AdamState(lr=tcfg.learning_rate)
    params = model.params()
    best = None
    best_loss = np.inf
    best_epoch = 0
    stale = 0
    rows = []
    n_all = len(train_set)
    n = min(n_all, tcfg.samples_per_epoch or n_all)
    for epoch in range(1, tcfg.epochs + 1):
        order = rng.permutation(n_all)[:n]
        sums = {"total": 0.0, "bce": 0.0, "mse": 0.0}
        for start in range(0, n, tcfg.batch_size):
            idx = np.sort(order[start : start + tcfg.batch_size])
            parts = model.compute_loss(
                train_set.X[idx],
                train_set.Y[idx],
                lambda_reg=tcfg.lambda_reg,
                mse_weight_mode=tcfg.mse_weight_mode,
                absent_weight=tcfg.absent_weight,
            )
            if not np.isfinite(parts.total):
                raise NumericalError(f"non-finite training loss at epoch {epoch}, batch starting {start}")
            adam_step(opt, params, parts.grads)
            w = idx.size
            sums["total"] += parts.total * w
            sums["bce"] += parts.bce * w
            if parts.mse is not None:
                sums["mse"] += parts.mse * w
        val = evaluate_losses(model, val_set.X, val_set.Y, tcfg)
        if not np.isfinite(val["total"]):
            raise NumericalError(f"non-finite validation loss at epoch {epoch}")
        row = {
            "epoch": epoch,
            "train_loss": sums["total"] / n,
            "train_bce": sums["bce"] / n,
            "train_mse": sums["mse"] / n if "reg" in model.heads else None,
            "val_loss": val["total"],
            "val_bce": val["bce"],
            "val_mse": val["mse"],
            "val_label_accuracy": val["label_accuracy"],
            "val_exact_match": val["exact_match"],
        }
        rows.append(row)
        log.info("epoch %d train %.5f val %.5f acc %.4f", epoch, row["train_loss"], row["val_loss"], row["val_label_accuracy"])
        if progress is not None:
            progress(row)
        if val["total"] < best_loss:
            best_loss = val["total"]
            best_epoch = epoch
            best = model.get_weights()
            stale = 0
        else:
            stale += 1
            if stale >= tcfg.patience:
                break
    model.set_weights(best)
    history = {
        "variant": model.variant,
        "epochs": rows,
        "epochs_run": len(rows),
        "best_epoch": best_epoch,
        "best_val_loss": best_loss,
        "stopped_early": len(rows) < tcfg.epochs,
        "train_config": tcfg.to_dict(),
    }
    return model, history
