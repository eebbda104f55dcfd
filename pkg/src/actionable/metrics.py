"""Confusion-matrix metrics and artifact emission.

Degenerate denominators (no predicted positives, no true positives) report
the affected ratio as 0 and carry an undefined flag instead of raising, so
evaluation of tiny splits never aborts a run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .dense import EpochRecord, write_history_csv


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class SplitMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    # names among {"precision","recall","f1"} whose denominator was zero
    undefined: tuple[str, ...]


@dataclass(frozen=True)
class MetricsReport:
    accuracy: dict[str, float]  # keys train/val/test
    precision: float
    recall: float
    f1: float
    threshold: float
    model: str


def confusion(predictions: Sequence[int], truth: Sequence[int]) -> ConfusionMatrix:
    if len(predictions) != len(truth):
        raise LengthMismatch(f"{len(predictions)} predictions vs {len(truth)} labels")
    if len(predictions) == 0:
        raise LengthMismatch("need at least one prediction")
    tp = fp = tn = fn = 0
    for pred, true in zip(predictions, truth):
        if pred not in (0, 1) or true not in (0, 1):
            raise ValueError(f"labels must be 0/1, got pred={pred!r} truth={true!r}")
        if pred == 1 and true == 1:
            tp += 1
        elif pred == 1 and true == 0:
            fp += 1
        elif pred == 0 and true == 0:
            tn += 1
        else:
            fn += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def metrics(cm: ConfusionMatrix) -> SplitMetrics:
    if cm.total == 0:
        raise ValueError("metrics of an empty confusion matrix are undefined")
    undefined = []
    accuracy = (cm.tp + cm.tn) / cm.total
    if cm.tp + cm.fp > 0:
        precision = cm.tp / (cm.tp + cm.fp)
    else:
        precision = 0.0
        undefined.append("precision")
    if cm.tp + cm.fn > 0:
        recall = cm.tp / (cm.tp + cm.fn)
    else:
        recall = 0.0
        undefined.append("recall")
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        undefined.append("f1")
    return SplitMetrics(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        undefined=tuple(undefined),
    )


def report_to_json(report: MetricsReport) -> dict:
    return {
        "accuracy": {
            "train": report.accuracy.get("train", 0.0),
            "val": report.accuracy.get("val", 0.0),
            "test": report.accuracy.get("test", 0.0),
        },
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "threshold": report.threshold,
        "model": report.model,
    }


def emit_report(
    report: MetricsReport,
    history: Sequence[EpochRecord],
    out_dir: Path | str,
) -> tuple[Path, Path]:
    """Write metrics.json and history.csv into out_dir; returns both paths.

    Emission is deterministic: identical inputs produce byte-identical files.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics_path = out_dir / "metrics.json"
    history_path = out_dir / "history.csv"
    metrics_path.write_text(
        json.dumps(report_to_json(report), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    write_history_csv(history, history_path)
    return metrics_path, history_path
