"""
Prometheus metrics for the pipeline.
A CLI process has no scrape endpoint, so the registry is dumped to a
textfile-collector file on exit when R2D2_METRICS_FILE is set.
"""

import time
from typing import Optional

from prometheus_client import REGISTRY, Counter, Histogram, write_to_textfile


# ============================================================================
# STAGE METRICS
# ============================================================================

stage_duration = Histogram(
    'r2d2_stage_duration_seconds',
    'Duration of a pipeline stage in seconds',
    ['stage'],
    buckets=(0.001, 0.005, 0.01, 0.05, 0.1, 0.25, 0.4, 0.5, 1.0, 5.0, 30.0)
)

# ============================================================================
# INPUT METRICS
# ============================================================================

bytes_extracted_total = Counter(
    'r2d2_bytes_extracted_total',
    'Total decompressed bytes extracted from archives'
)

parse_error_total = Counter(
    'r2d2_parse_errors_total',
    'Total input parsing failures',
    ['error_type']
)

# ============================================================================
# DETECTION METRICS
# ============================================================================

scan_verdict_total = Counter(
    'r2d2_scan_verdicts_total',
    'Total scan verdicts',
    ['verdict', 'source']
)

training_epoch_total = Counter(
    'r2d2_training_epochs_total',
    'Total training epochs completed',
    ['optimizer']
)

# ============================================================================
# HELPER FUNCTIONS
# ============================================================================

class StageTimer:
    """Context manager timing a pipeline stage."""

    def __init__(self, stage: str):
        self.stage = stage
        self.start_time = None
        self.elapsed_ms = 0.0

    def __enter__(self):
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        duration = time.perf_counter() - self.start_time
        self.elapsed_ms = duration * 1000.0
        stage_duration.labels(stage=self.stage).observe(duration)


def record_parse_error(error: Exception):
    """Record an input parsing failure by exception class."""
    parse_error_total.labels(error_type=type(error).__name__).inc()


def record_verdict(verdict: str, source: str = "model"):
    """Record a scan verdict."""
    scan_verdict_total.labels(verdict=verdict, source=source).inc()


def dump_metrics(path: Optional[str]):
    """Write the default registry to a textfile-collector file."""
    if path:
        write_to_textfile(path, REGISTRY)
