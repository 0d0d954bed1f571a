"""
Observability module for metrics and logging.
"""

from r2d2.observability.metrics import (
    stage_duration,
    bytes_extracted_total,
    parse_error_total,
    scan_verdict_total,
    training_epoch_total,
    StageTimer,
    record_parse_error,
    record_verdict,
    dump_metrics
)

from r2d2.observability.logging import configure_logging, logger

__all__ = [
    'stage_duration',
    'bytes_extracted_total',
    'parse_error_total',
    'scan_verdict_total',
    'training_epoch_total',
    'StageTimer',
    'record_parse_error',
    'record_verdict',
    'dump_metrics',
    'configure_logging',
    'logger'
]
