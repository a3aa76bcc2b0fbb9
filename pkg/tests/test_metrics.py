import json

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramix.metrics import (
    ConfusionCounts,
    EvalReport,
    build_report,
    confusion_per_component,
    derived_metrics,
    mse,
    r2_score,
    regression_accuracy,
    validate_report,
)
from ramix.nn import weighted_mse_loss
from ramix.synthgen import STANDARD_COMPOUNDS, STANDARD_MIXTURES

GT = np.array(list(STANDARD_MIXTURES.values()))
# printed sigmoid outputs of the regression path for S1..S6
TABLE_RATIOS = np.array(
    [
        [0.01, 0.97, 0.08, 0.96],
        [0.88, 0.15, 0.94, 0.16],
        [0.90, 0.90, 0.65, 0.17],
        [0.03, 0.55, 0.64, 0.13],
        [0.04, 0.57, 0.68, 0.66],
        [0.85, 0.07, 0.29, 0.85],
    ]
)


def test_perfect_predictions_table_counts():
    counts = confusion_per_component(GT, GT)
    assert [c.as_tuple() for c in counts] == [(3, 0, 0, 3), (4, 0, 0, 2), (3, 0, 0, 3), (3, 0, 0, 3)]


def test_all_zero_vs_all_one():
    (c,) = confusion_per_component(np.zeros((5, 1)), np.ones((5, 1)))
    assert c.as_tuple() == (0, 5, 0, 0)


def test_derived_metrics_hand_cases():
    r = derived_metrics(ConfusionCounts(3, 0, 0, 3))
    assert (r.tpr, r.tnr, r.ppv, r.npv, r.accuracy, r.f1) == (1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    r = derived_metrics(ConfusionCounts(0, 0, 0, 10))
    assert r.tpr is None and r.tnr == 1.0 and r.accuracy == 1.0 and r.ppv is None and r.f1 is None
    r = derived_metrics(ConfusionCounts(1, 1, 1, 1))
    assert (r.tpr, r.ppv, r.f1, r.accuracy) == (0.5, 0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        derived_metrics(ConfusionCounts(0, 0, 0, 0))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_confusion_cells_sum_and_permutation(n, C, seed):
    rng = np.random.default_rng(seed)
    p = rng.integers(0, 2, (n, C))
    g = rng.integers(0, 2, (n, C))
    counts = confusion_per_component(p, g)
    assert all(c.total == n for c in counts)
    perm = rng.permutation(n)
    assert counts == confusion_per_component(p[perm], g[perm])


def test_r2():
    g = np.array([0.0, 0.5, 1.0, 0.25])
    assert r2_score(g, g) == 1.0
    assert r2_score(np.full(4, g.mean()), g) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        r2_score([0.0, 1.0], [0.5, 0.5])
    perm = [2, 0, 3, 1]
    p = np.array([0.1, 0.4, 0.8, 0.3])
    assert r2_score(p[perm], g[perm]) == pytest.approx(r2_score(p, g), abs=1e-15)


def test_regression_accuracy():
    g = np.array([0.2, 0.5, 0.9])
    assert regression_accuracy(g, g) == 100.0
    assert regression_accuracy(g + 0.12, g) == pytest.approx(88.0, abs=1e-12)
    assert regression_accuracy(g - 0.12, g) == pytest.approx(88.0, abs=1e-12)
    with pytest.raises(ValueError):
        regression_accuracy([0.1, 0.2], [0.1])


def test_regression_accuracy_on_printed_table():
    # 24 absolute errors summed by hand: 4.43, so MAE = 0.1845833...
    assert np.sum(np.abs(TABLE_RATIOS - GT)) == pytest.approx(4.43, abs=1e-12)
    value = regression_accuracy(TABLE_RATIOS, GT)
    assert value == pytest.approx(100 * (1 - 4.43 / 24), abs=1e-10)
    assert 80.0 < value < 95.0


def test_mse():
    assert mse([0.3, 0.4], [0.3, 0.4]) == 0.0
    assert mse([1.0, 0.0], [0.0, 0.0]) == 0.5
    p, g = np.random.default_rng(0).random((2, 12))
    assert mse(p, g) == pytest.approx(weighted_mse_loss(p, g)[0], abs=1e-16)


def _table_report():
    return build_report(
        STANDARD_COMPOUNDS,
        (TABLE_RATIOS >= 0.5).astype(int),
        GT,
        class_probs=TABLE_RATIOS,
        pred_ratios=TABLE_RATIOS,
        true_ratios=GT.astype(float),
        sample_names=list(STANDARD_MIXTURES),
    )


def test_report_schema_round_trip():
    rep = _table_report()
    d = json.loads(json.dumps(rep.to_dict()))
    validate_report(d)
    back = EvalReport.from_dict(d)
    assert back.to_dict() == rep.to_dict()
    assert [s["volumes_ul"] for s in d["samples"]][0] == [2, 194, 16, 192]
    d["components"] = "oops"
    with pytest.raises(jsonschema.ValidationError):
        validate_report(d)


def test_report_text_layout():
    text = _table_report().to_text()
    assert "aniline" in text and "TPR" in text and "100%" in text
    assert "Regression accuracy: 81.54%" in text


def test_report_perfect_and_empty():
    rep = build_report(STANDARD_COMPOUNDS, GT, GT)
    for r in rep.rates:
        assert (r.tpr, r.tnr, r.ppv, r.npv, r.accuracy, r.f1) == (1.0,) * 6
    with pytest.raises(ValueError):
        build_report(STANDARD_COMPOUNDS, np.zeros((0, 4)), np.zeros((0, 4)))
