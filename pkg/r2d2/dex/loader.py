"""
Input loading shared by the CLI and the scan pipeline.
"""

from pathlib import Path
from typing import Union

from r2d2.archive import CLASSES_DEX, extract_classes_dex, extract_dex_entries, open_archive
from r2d2.dex.parser import DexFile, parse_dex
from r2d2.exceptions import InputError
from r2d2.observability import logger


ZIP_MAGIC = b"PK"
PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def sniff_kind(path: Union[str, Path]) -> str:
    """Classify a file as 'apk', 'png' or 'dex' by its leading bytes."""
    try:
        with Path(path).open("rb") as f:
            head = f.read(8)
    except OSError as e:
        raise InputError(f"Cannot read {path}: {e}") from e
    if head.startswith(PNG_MAGIC):
        return "png"
    if head.startswith(ZIP_MAGIC):
        return "apk"
    return "dex"


def load_input(path: Union[str, Path], strict: bool = False) -> DexFile:
    """
    Load the DEX payload of an APK/ZIP or a bare .dex file.

    Args:
        path: APK, ZIP or DEX file
        strict: Enforce checksum and header checks

    Returns:
        Parsed DexFile

    Raises:
        InputError: Any archive, DEX or I/O failure
    """
    path = Path(path)
    kind = sniff_kind(path)
    if kind == "apk":
        index = open_archive(path)
        entries = extract_dex_entries(index)
        if len(entries) > 1:
            logger.info("multi_dex_ignored", path=str(path), entries=entries, encoded=CLASSES_DEX)
        data = extract_classes_dex(index)
    else:
        try:
            data = path.read_bytes()
        except OSError as e:
            raise InputError(f"Cannot read {path}: {e}") from e

    dex = parse_dex(data, strict=strict)
    logger.debug("dex_loaded", path=str(path), kind=kind, size=len(dex), version=dex.header.version)
    return dex
