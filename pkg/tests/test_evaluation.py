import json

import numpy as np
import pytest

from drtrack.errors import DegenerateBox, EmptyInput
from drtrack.evaluation import (PRECISION_THRESHOLDS, SUCCESS_THRESHOLDS, iou, make_records,
                                ope_metrics, write_results)


def test_iou_cases():
    assert iou((1, 2, 3, 4), (1, 2, 3, 4)) == 1.0
    assert iou((0, 0, 2, 2), (5, 5, 2, 2)) == 0.0
    assert iou((0, 0, 2, 2), (1, 1, 2, 2)) == pytest.approx(1 / 7)
    with pytest.raises(DegenerateBox):
        iou((0, 0, 0, 2), (0, 0, 1, 1))


def test_perfect_predictions():
    gt = [(10, 10, 20, 20)] * 5
    r = ope_metrics(make_records(gt, gt))
    assert r.dp20 == 1.0
    assert np.all(r.success[:-1] == 1.0) and r.success[-1] == 0.0
    assert r.auc == pytest.approx(20 / 21)


def test_displaced_predictions():
    gt = [(10, 10, 20, 20)] * 4
    pred = [(35, 10, 20, 20)] * 4
    assert ope_metrics(make_records(pred, gt)).dp20 == 0.0


def test_mixed_hand_case():
    gt = [(0, 0, 10, 10)] * 10
    shifts = [0, 1, 2, 3, 5, 8, 15, 20, 21, 40]
    pred = [(s, 0, 10, 10) for s in shifts]
    r = ope_metrics(make_records(pred, gt))
    # centre errors equal the shifts; IoU of a horizontal shift s is (10-s)/(10+s)
    assert r.dp20 == 0.8
    assert r.precision[0] == 0.1 and r.precision[5] == 0.5 and r.precision[50] == 1.0
    ious = [(10 - s) / (10 + s) if s < 10 else 0.0 for s in shifts]
    expected = [np.mean([v > t for v in ious]) for t in SUCCESS_THRESHOLDS]
    np.testing.assert_allclose(r.success, expected)
    # by hand: IoU 1, .818, .667, .538, .333, .111, then zeros
    assert r.success[10] == 0.4  # tau = 0.5
    assert r.auc == pytest.approx(np.mean(expected))


def test_curves_monotone():
    rng = np.random.default_rng(0)
    gt = [(50, 50, 20, 30)] * 30
    pred = [(50 + dx, 50 + dy, 20, 30) for dx, dy in rng.normal(0, 15, (30, 2))]
    r = ope_metrics(make_records(pred, gt))
    assert np.all(np.diff(r.precision) >= 0) and np.all(np.diff(r.success) <= 0)
    assert 0 <= r.auc <= 1 and 0 <= r.dp20 <= 1
    assert len(r.precision) == len(PRECISION_THRESHOLDS) == 51
    assert len(r.success) == 21


def test_errors():
    with pytest.raises(EmptyInput):
        ope_metrics([])
    with pytest.raises(ValueError):
        make_records([(0, 0, 1, 1)], [])


def test_write_results(tmp_path):
    gt = [(0, 0, 4, 4)] * 3
    r = ope_metrics(make_records(gt, gt))
    write_results(r, tmp_path)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary == {"dp20": 1.0, "auc": pytest.approx(20 / 21), "frames": 3}
    lines = (tmp_path / "success.csv").read_text().splitlines()
    assert lines[0] == "0,1.000000" and lines[-1] == "1,0.000000" and len(lines) == 21
