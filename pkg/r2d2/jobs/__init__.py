"""
Batch jobs.
"""

from r2d2.jobs.batch_encode import BatchEncodeJob, EncodedFile

__all__ = ['BatchEncodeJob', 'EncodedFile']
