"""
Confusion-matrix metrics and threshold sweeps.

A sample is predicted malicious iff its score >= threshold, so threshold 0
flags everything. Ratios with a zero denominator are None (rendered "n/a"),
never 0.
"""

import csv
import io
import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from r2d2.exceptions import EvaluationError
from r2d2.models import Label
from r2d2.nn.network import Network
from r2d2.pixel import RgbImage


CSV_COLUMNS = ["threshold", "tp", "fp", "fn", "tn", "acc", "prec", "recall", "fpr", "f1"]
UNDEFINED = "n/a"


class ScoredSample(BaseModel):
    """True label and malicious-class probability of one sample."""
    label: Label
    score: float = Field(..., ge=0.0, le=1.0)


class ConfusionMatrix(BaseModel):
    tp: int = Field(default=0, ge=0)
    fp: int = Field(default=0, ge=0)
    fn: int = Field(default=0, ge=0)
    tn: int = Field(default=0, ge=0)
    threshold: float = Field(default=0.5, ge=0.0, le=1.0)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


class MetricsReport(BaseModel):
    """Metrics derived from one confusion matrix; None means undefined (0/0)."""
    confusion: ConfusionMatrix
    accuracy: Optional[float] = None
    precision: Optional[float] = None
    recall: Optional[float] = None
    fpr: Optional[float] = None
    f1: Optional[float] = None


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


def _check_threshold(threshold: float):
    if not 0.0 <= threshold <= 1.0 or math.isnan(threshold):
        raise EvaluationError(f"Threshold must be within [0, 1], got {threshold}")


def _as_label(label) -> Label:
    return label if isinstance(label, Label) else Label.from_index(int(label))


def score_dataset(network: Network, dataset: Sequence[Tuple[RgbImage, Label]]) -> List[ScoredSample]:
    """
    Score every (image, label) pair, preserving order.

    Raises:
        EvaluationError: If the dataset is empty
        WrongInputSizeError: If an image is not at the network input size
    """
    if not dataset:
        raise EvaluationError("Cannot score an empty dataset")
    scores = network.predict_images([image for image, _ in dataset])
    return [
        ScoredSample(label=_as_label(label), score=min(1.0, max(0.0, float(score))))
        for (_, label), score in zip(dataset, scores)
    ]


def confusion_at(scores: Sequence[ScoredSample], threshold: float) -> ConfusionMatrix:
    """Count outcomes with predicted-malicious iff score >= threshold."""
    _check_threshold(threshold)
    cm = {"tp": 0, "fp": 0, "fn": 0, "tn": 0}
    for sample in scores:
        flagged = sample.score >= threshold
        if sample.label is Label.MALICIOUS:
            cm["tp" if flagged else "fn"] += 1
        else:
            cm["fp" if flagged else "tn"] += 1
    return ConfusionMatrix(threshold=threshold, **cm)


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Accuracy, precision, recall (detection rate), FPR and F1."""
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    f1 = None
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    return MetricsReport(
        confusion=cm,
        accuracy=_ratio(cm.tp + cm.tn, cm.total),
        precision=precision,
        recall=recall,
        fpr=_ratio(cm.fp, cm.fp + cm.tn),
        f1=f1,
    )


def threshold_sweep(
    scores: Sequence[ScoredSample],
    grid: Sequence[float]
) -> List[Tuple[float, MetricsReport]]:
    """
    Metrics at every threshold of an ascending grid.

    Scores of each class are sorted once; the count at or above a threshold
    is then a binary search.

    Raises:
        EvaluationError: If the grid is empty, unsorted or out of [0, 1]
    """
    if not grid:
        raise EvaluationError("Threshold grid is empty")
    for threshold in grid:
        _check_threshold(threshold)
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise EvaluationError("Threshold grid must be sorted ascending")

    malicious = np.sort([s.score for s in scores if s.label is Label.MALICIOUS])
    benign = np.sort([s.score for s in scores if s.label is Label.BENIGN])

    rows = []
    for threshold in grid:
        tp = len(malicious) - int(np.searchsorted(malicious, threshold, side="left"))
        fp = len(benign) - int(np.searchsorted(benign, threshold, side="left"))
        cm = ConfusionMatrix(
            tp=tp,
            fp=fp,
            fn=len(malicious) - tp,
            tn=len(benign) - fp,
            threshold=threshold,
        )
        rows.append((threshold, metrics(cm)))
    return rows


def parse_sweep(spec: str) -> List[float]:
    """
    Parse 'start:step:end' into an inclusive grid, e.g. '0:0.1:1' -> 11 points.

    Points are rounded to 10 decimals so accumulated float error never drops
    the end point.
    """
    try:
        start, step, end = (float(part) for part in spec.split(":"))
    except ValueError as e:
        raise EvaluationError(f"Sweep must look like start:step:end, got {spec!r}") from e
    if step <= 0:
        raise EvaluationError("Sweep step must be positive")
    if start > end:
        raise EvaluationError("Sweep start must not exceed end")
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    grid = [round(start + i * step, 10) for i in range(count)]
    for threshold in grid:
        _check_threshold(threshold)
    return grid


def _fmt(value: Optional[float]) -> str:
    return UNDEFINED if value is None else f"{value:.6f}"


def sweep_csv(rows: Sequence[Tuple[float, MetricsReport]]) -> str:
    """Render a sweep as CSV text with a header row."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for threshold, report in rows:
        cm = report.confusion
        writer.writerow([
            f"{threshold:.4f}", cm.tp, cm.fp, cm.fn, cm.tn,
            _fmt(report.accuracy), _fmt(report.precision), _fmt(report.recall),
            _fmt(report.fpr), _fmt(report.f1),
        ])
    return buf.getvalue()


def write_sweep_csv(rows: Sequence[Tuple[float, MetricsReport]], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(sweep_csv(rows))
    return path


def write_gnuplot(rows: Sequence[Tuple[float, MetricsReport]], path: Union[str, Path]) -> Path:
    """
    Whitespace-separated data file for gnuplot; undefined values are NaN.

    Plot with e.g. `plot 'sweep.dat' using 1:3 with lines title 'precision'`.
    """
    def cell(value: Optional[float]) -> str:
        return "NaN" if value is None else f"{value:.6f}"

    lines = ["# threshold accuracy precision recall fpr f1"]
    for threshold, r in rows:
        lines.append(" ".join([f"{threshold:.4f}"] + [
            cell(v) for v in (r.accuracy, r.precision, r.recall, r.fpr, r.f1)
        ]))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path
