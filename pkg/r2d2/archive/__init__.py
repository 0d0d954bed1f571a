"""
APK/ZIP container reading.
"""

from r2d2.archive.reader import (
    CLASSES_DEX,
    ArchiveEntry,
    ArchiveIndex,
    open_archive,
    extract_entry,
    extract_classes_dex,
    extract_dex_entries,
)

__all__ = [
    'CLASSES_DEX',
    'ArchiveEntry',
    'ArchiveIndex',
    'open_archive',
    'extract_entry',
    'extract_classes_dex',
    'extract_dex_entries',
]
