"""One-pass evaluation: precision and success curves over a sequence."""
import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBox, EmptyInput

PRECISION_THRESHOLDS = np.arange(0, 51, dtype=float)
SUCCESS_THRESHOLDS = np.round(np.linspace(0.0, 1.0, 21), 10)


def iou(a, b):
    """Intersection over union of two ``(x, y, w, h)`` boxes."""
    ax, ay, aw, ah = (float(v) for v in a)
    bx, by, bw, bh = (float(v) for v in b)
    if aw <= 0 or ah <= 0 or bw <= 0 or bh <= 0:
        raise DegenerateBox(f"boxes need positive size: {a}, {b}")
    iw = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    ih = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = iw * ih
    return inter / (aw * ah + bw * bh - inter)


def center_error(a, b):
    ca = np.array([a[0] + a[2] / 2, a[1] + a[3] / 2])
    cb = np.array([b[0] + b[2] / 2, b[1] + b[3] / 2])
    return float(np.linalg.norm(ca - cb))


@dataclass(frozen=True)
class EvalRecord:
    pred: tuple
    gt: tuple
    center_error: float
    iou: float


def make_records(pred_boxes, gt_boxes):
    if len(pred_boxes) != len(gt_boxes):
        raise ValueError(f"{len(pred_boxes)} predictions for {len(gt_boxes)} ground-truth boxes")
    return [EvalRecord(tuple(p), tuple(g), center_error(p, g), iou(p, g))
            for p, g in zip(pred_boxes, gt_boxes)]


@dataclass(frozen=True)
class OPEResult:
    precision: np.ndarray
    success: np.ndarray
    dp20: float
    auc: float
    frames: int

    def summary(self):
        return {"dp20": self.dp20, "auc": self.auc, "frames": self.frames}


def ope_metrics(records):
    """Precision (error <= tau px) and success (IoU > tau) curves, DP@20 and AUC."""
    if not records:
        raise EmptyInput("no records to evaluate")
    err = np.array([r.center_error for r in records])
    ov = np.array([r.iou for r in records])
    precision = (err[None, :] <= PRECISION_THRESHOLDS[:, None]).mean(axis=1)
    success = (ov[None, :] > SUCCESS_THRESHOLDS[:, None]).mean(axis=1)
    return OPEResult(precision, success, float(precision[20]), float(success.mean()), len(records))


def write_curve(path, thresholds, values):
    with open(path, "w") as f:
        for t, v in zip(thresholds, values):
            f.write(f"{t:g},{v:.6f}\n")


def write_results(result, out_dir):
    """``precision.csv``, ``success.csv`` and ``summary.json`` in ``out_dir``."""
    import os
    os.makedirs(out_dir, exist_ok=True)
    write_curve(os.path.join(out_dir, "precision.csv"), PRECISION_THRESHOLDS, result.precision)
    write_curve(os.path.join(out_dir, "success.csv"), SUCCESS_THRESHOLDS, result.success)
    with open(os.path.join(out_dir, "summary.json"), "w") as f:
        json.dump(result.summary(), f, indent=2)
