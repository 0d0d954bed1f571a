"""
DEX validation and input loading.
"""

from r2d2.dex.parser import (
    HEADER_SIZE,
    ENDIAN_CONSTANT,
    DexHeader,
    DexFile,
    parse_dex,
    compute_checksum,
    compute_signature,
)
from r2d2.dex.loader import load_input, sniff_kind

__all__ = [
    'HEADER_SIZE',
    'ENDIAN_CONSTANT',
    'DexHeader',
    'DexFile',
    'parse_dex',
    'compute_checksum',
    'compute_signature',
    'load_input',
    'sniff_kind',
]
