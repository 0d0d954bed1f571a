"""
Sample scanning: input preparation, known-sample cache and batch scanner.
"""

from r2d2.scan.pipeline import PreparedInput, encode_path, prepare_input, network_image
from r2d2.scan.cache import KnownSampleCache
from r2d2.scan.scanner import ScanResult, Scanner

__all__ = [
    'PreparedInput',
    'encode_path',
    'prepare_input',
    'network_image',
    'KnownSampleCache',
    'ScanResult',
    'Scanner',
]
