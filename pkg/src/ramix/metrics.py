"""Per-component confusion counts, derived rates and regression scores.

Rates that would divide zero by zero are reported as ``None`` (``null`` in
JSON, ``undef`` in text tables) rather than coerced to 0 or 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import jsonschema
import numpy as np

from .errors import ShapeError

UNDEFINED = "undef"


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    def as_tuple(self) -> tuple:
        return (self.tp, self.fn, self.fp, self.tn)


@dataclass(frozen=True)
class Rates:
    tpr: float | None
    tnr: float | None
    ppv: float | None
    npv: float | None
    accuracy: float | None
    f1: float | None

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in RATE_NAMES}


RATE_NAMES = ("tpr", "tnr", "ppv", "npv", "accuracy", "f1")


def _as_bits(rows, name):
    arr = np.asarray(rows)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be a list of equal-length presence vectors")
    return arr.astype(bool)


def confusion_per_component(preds, gts) -> list:
    """One :class:`ConfusionCounts` per component, counted over samples."""
    if len(preds) != len(gts):
        raise ShapeError(f"{len(preds)} predictions but {len(gts)} ground-truth vectors")
    p = _as_bits(preds, "preds")
    g = _as_bits(gts, "gts")
    if p.shape != g.shape:
        raise ShapeError(f"prediction shape {p.shape} differs from ground truth {g.shape}")
    return [
        ConfusionCounts(
            int(np.sum(p[:, i] & g[:, i])),
            int(np.sum(~p[:, i] & g[:, i])),
            int(np.sum(p[:, i] & ~g[:, i])),
            int(np.sum(~p[:, i] & ~g[:, i])),
        )
        for i in range(p.shape[1])
    ]


def _ratio(num, den):
    return None if den == 0 else num / den


def derived_metrics(c: ConfusionCounts) -> Rates:
    if c.total == 0:
        raise ValueError("cannot derive rates from empty confusion counts")
    tpr = _ratio(c.tp, c.tp + c.fn)
    ppv = _ratio(c.tp, c.tp + c.fp)
    if tpr is None or ppv is None:
        f1 = None
    else:
        f1 = _ratio(2 * ppv * tpr, ppv + tpr)
    return Rates(
        tpr=tpr,
        tnr=_ratio(c.tn, c.tn + c.fp),
        ppv=ppv,
        npv=_ratio(c.tn, c.tn + c.fn),
        accuracy=(c.tp + c.tn) / c.total,
        f1=f1,
    )


def _pairs(preds, gts):
    p = np.asarray(preds, dtype=np.float64).ravel()
    g = np.asarray(gts, dtype=np.float64).ravel()
    if p.shape != g.shape:
        raise ShapeError(f"{p.size} predicted values but {g.size} ground-truth values")
    return p, g


def mse(preds, gts) -> float:
    p, g = _pairs(preds, gts)
    if p.size == 0:
        raise ShapeError("no values to compare")
    return float(np.mean((p - g) ** 2))


def r2_score(preds, gts) -> float:
    """Coefficient of determination over all flattened (pred, gt) pairs."""
    p, g = _pairs(preds, gts)
    if p.size < 2:
        raise ShapeError("r2_score needs at least two values")
    ss_tot = np.sum((g - g.mean()) ** 2)
    if ss_tot == 0:
        raise ValueError("r2_score is undefined for zero-variance ground truth")
    return float(1.0 - np.sum((p - g) ** 2) / ss_tot)


def regression_accuracy(preds, gts) -> float:
    """``100 * (1 - mean absolute error)`` on the ratio scale, in percent."""
    p, g = _pairs(preds, gts)
    if p.size == 0:
        raise ShapeError("no values to compare")
    return float(100.0 * (1.0 - np.mean(np.abs(p - g))))


# ---------------------------------------------------------------- report

_rate = {"type": ["number", "null"]}
REPORT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["components", "n_samples", "threshold", "regression", "samples"],
    "properties": {
        "n_samples": {"type": "integer", "minimum": 1},
        "threshold": {"type": "number"},
        "components": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "tp", "fn", "fp", "tn", "rates"],
                "properties": {
                    "name": {"type": "string"},
                    "tp": {"type": "integer", "minimum": 0},
                    "fn": {"type": "integer", "minimum": 0},
                    "fp": {"type": "integer", "minimum": 0},
                    "tn": {"type": "integer", "minimum": 0},
                    "rates": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": list(RATE_NAMES),
                        "properties": {k: _rate for k in RATE_NAMES},
                    },
                },
            },
        },
        "regression": {
            "type": ["object", "null"],
            "additionalProperties": False,
            "required": ["mse", "r2", "regression_accuracy_percent"],
            "properties": {"mse": {"type": "number"}, "r2": _rate, "regression_accuracy_percent": {"type": "number"}},
        },
        "samples": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "true_presence", "pred_presence", "class_probs"],
                "properties": {
                    "name": {"type": "string"},
                    "true_presence": {"type": "array", "items": {"type": "integer"}},
                    "pred_presence": {"type": "array", "items": {"type": "integer"}},
                    "class_probs": {"type": "array", "items": {"type": "number"}},
                    "true_ratios": {"type": "array", "items": {"type": "number"}},
                    "pred_ratios": {"type": "array", "items": {"type": "number"}},
                    "volumes_ul": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
    },
}


@dataclass
class EvalReport:
    names: tuple
    counts: list
    threshold: float = 0.5
    regression: dict | None = None
    samples: list | None = None

    @property
    def rates(self) -> list:
        return [derived_metrics(c) for c in self.counts]

    @property
    def n_samples(self) -> int:
        return self.counts[0].total

    def to_dict(self) -> dict:
        comps = []
        for name, c, r in zip(self.names, self.counts, self.rates):
            comps.append({"name": name, "tp": c.tp, "fn": c.fn, "fp": c.fp, "tn": c.tn, "rates": r.to_dict()})
        d = {
            "components": comps,
            "n_samples": self.n_samples,
            "threshold": self.threshold,
            "regression": self.regression,
            "samples": list(self.samples or []),
        }
        validate_report(d)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        validate_report(d)
        comps = d["components"]
        return cls(
            names=tuple(c["name"] for c in comps),
            counts=[ConfusionCounts(c["tp"], c["fn"], c["fp"], c["tn"]) for c in comps],
            threshold=d["threshold"],
            regression=d["regression"],
            samples=d["samples"],
        )

    def to_text(self) -> str:
        def fmt(v, pct=False):
            if v is None:
                return UNDEFINED
            return f"{100 * v:.0f}%" if pct else f"{v:.2f}"

        lines = []
        if self.samples:
            has_reg = any("pred_ratios" in s for s in self.samples)
            head = f"{'Sample':<8}{'True':<16}{'Predicted':<16}{'Probabilities':<30}"
            if has_reg:
                head += f"{'Ratios':<30}{'Volumes (ul)'}"
            lines += [head]
            for s in self.samples:
                row = (
                    f"{s['name']:<8}{_vec(s['true_presence'], '{:d}'):<16}{_vec(s['pred_presence'], '{:d}'):<16}"
                    f"{_vec(s['class_probs'], '{:.2f}'):<30}"
                )
                if has_reg and "pred_ratios" in s:
                    row += f"{_vec(s['pred_ratios'], '{:.2f}'):<30}{_vec(s['volumes_ul'], '{:g}')}"
                lines.append(row.rstrip())
            lines.append("")
        width = max(len(n) for n in self.names) + 2
        lines.append(
            f"{'Component':<{width}}{'TP':>4}{'FN':>4}{'FP':>4}{'TN':>4}"
            f"{'TPR':>7}{'TNR':>7}{'PPV':>7}{'NPV':>7}{'Accuracy':>10}{'F1':>7}"
        )
        for name, c, r in zip(self.names, self.counts, self.rates):
            lines.append(
                f"{name:<{width}}{c.tp:>4}{c.fn:>4}{c.fp:>4}{c.tn:>4}"
                f"{fmt(r.tpr):>7}{fmt(r.tnr):>7}{fmt(r.ppv):>7}{fmt(r.npv):>7}{fmt(r.accuracy, True):>10}{fmt(r.f1):>7}"
            )
        if self.regression is not None:
            reg = self.regression
            r2 = UNDEFINED if reg["r2"] is None else f"{reg['r2']:.4f}"
            lines += [
                "",
                f"MSE: {reg['mse']:.6f}",
                f"R2: {r2}",
                f"Regression accuracy: {reg['regression_accuracy_percent']:.2f}%",
            ]
        return "\n".join(lines) + "\n"


def _vec(values, spec):
    return "[" + ", ".join(spec.format(v) for v in values) + "]"


def validate_report(d: dict) -> None:
    jsonschema.validate(d, REPORT_SCHEMA)


def build_report(
    names,
    pred_presence,
    true_presence,
    threshold=0.5,
    class_probs=None,
    pred_ratios=None,
    true_ratios=None,
    sample_names=None,
    full_scale_ul=None,
) -> EvalReport:
    """Assemble an :class:`EvalReport` from per-sample predictions."""
    pred_presence = np.asarray(pred_presence).astype(int)
    true_presence = np.asarray(true_presence).astype(int)
    if len(true_presence) == 0:
        raise ValueError("evaluation set is empty")
    counts = confusion_per_component(pred_presence, true_presence)
    if len(counts) != len(names):
        raise ShapeError("component names do not match label width")
    regression = None
    if pred_ratios is not None:
        try:
            r2 = r2_score(pred_ratios, true_ratios)
        except ValueError:
            r2 = None
        regression = {
            "mse": mse(pred_ratios, true_ratios),
            "r2": r2,
            "regression_accuracy_percent": regression_accuracy(pred_ratios, true_ratios),
        }
    samples = []
    if sample_names is not None:
        from .model import ratios_to_volume

        for i, sname in enumerate(sample_names):
            s = {
                "name": str(sname),
                "true_presence": [int(v) for v in true_presence[i]],
                "pred_presence": [int(v) for v in pred_presence[i]],
                "class_probs": [float(v) for v in (class_probs[i] if class_probs is not None else pred_presence[i])],
            }
            if pred_ratios is not None:
                s["true_ratios"] = [float(v) for v in true_ratios[i]]
                s["pred_ratios"] = [float(v) for v in pred_ratios[i]]
                kw = {} if full_scale_ul is None else {"full_scale_ul": full_scale_ul}
                s["volumes_ul"] = [float(v) for v in ratios_to_volume(pred_ratios[i], **kw)]
            samples.append(s)
    return EvalReport(tuple(names), counts, float(threshold), regression, samples)
