"""
Detection metrics and threshold sweeps.
"""

from r2d2.evaluation.metrics import (
    CSV_COLUMNS,
    UNDEFINED,
    ScoredSample,
    ConfusionMatrix,
    MetricsReport,
    score_dataset,
    confusion_at,
    metrics,
    threshold_sweep,
    parse_sweep,
    sweep_csv,
    write_sweep_csv,
    write_gnuplot,
)

__all__ = [
    'CSV_COLUMNS',
    'UNDEFINED',
    'ScoredSample',
    'ConfusionMatrix',
    'MetricsReport',
    'score_dataset',
    'confusion_at',
    'metrics',
    'threshold_sweep',
    'parse_sweep',
    'sweep_csv',
    'write_sweep_csv',
    'write_gnuplot',
]
