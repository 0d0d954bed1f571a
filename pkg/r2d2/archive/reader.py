"""
Read-only ZIP/APK reader.

Only the End-Of-Central-Directory record and the central directory are read
when an archive is opened; entry payloads are read on demand. Supported
methods are stored (0) and deflate (8). Encrypted and zip64 archives are
rejected.
"""

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple, Union

from r2d2.exceptions import (
    CorruptArchiveError,
    CorruptDeflateStreamError,
    CrcMismatchError,
    EntryNotFoundError,
    NoClassesDexError,
    NotZipError,
    TruncatedArchiveError,
    UnsupportedMethodError,
)
from r2d2.observability import bytes_extracted_total, logger


EOCD_SIGNATURE = b"PK\x05\x06"
CENTRAL_SIGNATURE = b"PK\x01\x02"
LOCAL_SIGNATURE = b"PK\x03\x04"

EOCD_FORMAT = "<4s4H2LH"
CENTRAL_FORMAT = "<4s6H3L5H2L"
LOCAL_FORMAT = "<4s5H3L2H"
EOCD_SIZE = struct.calcsize(EOCD_FORMAT)        # 22
CENTRAL_SIZE = struct.calcsize(CENTRAL_FORMAT)  # 46
LOCAL_SIZE = struct.calcsize(LOCAL_FORMAT)      # 30

# 22-byte record plus the longest possible archive comment
EOCD_SEARCH_WINDOW = EOCD_SIZE + 0xFFFF

METHOD_STORED = 0
METHOD_DEFLATE = 8
SUPPORTED_METHODS = (METHOD_STORED, METHOD_DEFLATE)

FLAG_ENCRYPTED = 0x0001
FLAG_UTF8 = 0x0800

CLASSES_DEX = "classes.dex"


@dataclass(frozen=True)
class ArchiveEntry:
    """One central directory record."""
    name: str
    method: int
    compressed_size: int
    uncompressed_size: int
    crc32: int
    local_header_offset: int
    flags: int = 0


@dataclass(frozen=True)
class ArchiveIndex:
    """Immutable, ordered view of an archive's central directory."""
    path: Path
    entries: Tuple[ArchiveEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def names(self) -> List[str]:
        return [entry.name for entry in self.entries]

    def lookup(self, name: str) -> ArchiveEntry:
        """
        Resolve an entry by exact name.

        Duplicate names resolve to the LAST central-directory occurrence.

        Raises:
            EntryNotFoundError: If no entry has this name
        """
        for entry in reversed(self.entries):
            if entry.name == name:
                return entry
        raise EntryNotFoundError(f"Entry not found: {name!r}")

    def __contains__(self, name: object) -> bool:
        return any(entry.name == name for entry in self.entries)


def _find_eocd(tail: bytes, tail_start: int) -> Tuple[int, tuple]:
    """Locate the last EOCD record inside the trailing window."""
    pos = tail.rfind(EOCD_SIGNATURE)
    while pos != -1:
        if pos + EOCD_SIZE <= len(tail):
            record = struct.unpack(EOCD_FORMAT, tail[pos:pos + EOCD_SIZE])
            comment_len = record[7]
            # Record plus declared comment must fit before end of file
            if pos + EOCD_SIZE + comment_len <= len(tail):
                return tail_start + pos, record
        pos = tail.rfind(EOCD_SIGNATURE, 0, pos)
    raise NotZipError("No End-Of-Central-Directory record found")


def _decode_name(raw: bytes, flags: int) -> str:
    if flags & FLAG_UTF8:
        return raw.decode("utf-8", errors="replace")
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError:
        return raw.decode("cp437")


def _parse_central_directory(data: bytes, expected: int) -> List[ArchiveEntry]:
    entries = []
    offset = 0
    for _ in range(expected):
        if offset + CENTRAL_SIZE > len(data):
            raise TruncatedArchiveError("Central directory ends mid-record")
        (signature, _made_by, _needed, flags, method, _time, _date, crc,
         compressed_size, uncompressed_size, name_len, extra_len, comment_len,
         _disk, _internal, _external, local_offset) = struct.unpack(
            CENTRAL_FORMAT, data[offset:offset + CENTRAL_SIZE])
        if signature != CENTRAL_SIGNATURE:
            raise CorruptArchiveError(f"Bad central directory signature at offset {offset}")
        name_start = offset + CENTRAL_SIZE
        record_end = name_start + name_len + extra_len + comment_len
        if record_end > len(data):
            raise TruncatedArchiveError("Central directory ends mid-record")
        entries.append(ArchiveEntry(
            name=_decode_name(data[name_start:name_start + name_len], flags),
            method=method,
            compressed_size=compressed_size,
            uncompressed_size=uncompressed_size,
            crc32=crc,
            local_header_offset=local_offset,
            flags=flags,
        ))
        offset = record_end
    return entries


def open_archive(path: Union[str, Path]) -> ArchiveIndex:
    """
    Index an archive from its EOCD record and central directory.

    Args:
        path: ZIP or APK file

    Returns:
        ArchiveIndex with entries in central-directory order

    Raises:
        NotZipError: If no EOCD signature in the trailing 65,557 bytes
        TruncatedArchiveError: If the central directory extends past EOF
        UnsupportedMethodError: If the archive is zip64 or multi-disk
    """
    path = Path(path)
    try:
        with path.open("rb") as f:
            f.seek(0, 2)
            file_size = f.tell()
            tail_start = max(0, file_size - EOCD_SEARCH_WINDOW)
            f.seek(tail_start)
            tail = f.read()

            eocd_offset, record = _find_eocd(tail, tail_start)
            (_sig, disk_no, cd_disk, disk_entries, total_entries,
             cd_size, cd_offset, _comment_len) = record

            if 0xFFFF in (disk_entries, total_entries) or 0xFFFFFFFF in (cd_size, cd_offset):
                raise UnsupportedMethodError("zip64 archives are not supported")
            if disk_no != 0 or cd_disk != 0 or disk_entries != total_entries:
                raise UnsupportedMethodError("Multi-disk archives are not supported")
            if cd_offset + cd_size > eocd_offset:
                raise TruncatedArchiveError(
                    f"Central directory [{cd_offset}, {cd_offset + cd_size}) "
                    f"extends past EOCD at {eocd_offset}")

            f.seek(cd_offset)
            cd_data = f.read(cd_size)
    except OSError as e:
        raise TruncatedArchiveError(f"Cannot read archive {path}: {e}") from e

    if len(cd_data) != cd_size:
        raise TruncatedArchiveError("Central directory extends past end of file")

    entries = _parse_central_directory(cd_data, total_entries)
    logger.debug("archive_opened", path=str(path), entries=len(entries))
    return ArchiveIndex(path=path, entries=tuple(entries))


def _inflate(payload: bytes, expected_size: int) -> bytes:
    decompressor = zlib.decompressobj(-zlib.MAX_WBITS)
    try:
        data = decompressor.decompress(payload, expected_size + 1)
    except zlib.error as e:
        raise CorruptDeflateStreamError(f"Deflate stream error: {e}") from e
    if not decompressor.eof:
        raise CorruptDeflateStreamError("Deflate stream did not terminate")
    if len(data) != expected_size:
        raise CorruptDeflateStreamError(
            f"Inflated {len(data)} bytes, expected {expected_size}")
    return data


def extract_entry(index: ArchiveIndex, name: str) -> bytes:
    """
    Extract and verify one entry.

    Args:
        index: Archive index from open_archive
        name: Exact entry name

    Returns:
        Decompressed bytes whose CRC-32 equals the entry's crc32

    Raises:
        EntryNotFoundError: If the name is absent
        UnsupportedMethodError: If the method is not stored/deflate or the
            entry is encrypted
        CorruptDeflateStreamError: If inflation fails
        CrcMismatchError: If the CRC-32 check fails
    """
    entry = index.lookup(name)

    if entry.flags & FLAG_ENCRYPTED:
        raise UnsupportedMethodError(f"Entry {name!r} is encrypted")
    if entry.method not in SUPPORTED_METHODS:
        raise UnsupportedMethodError(f"Entry {name!r} uses compression method {entry.method}")
    if entry.method == METHOD_STORED and entry.compressed_size != entry.uncompressed_size:
        raise CorruptArchiveError(f"Stored entry {name!r} has mismatched sizes")

    try:
        with index.path.open("rb") as f:
            f.seek(entry.local_header_offset)
            header = f.read(LOCAL_SIZE)
            if len(header) != LOCAL_SIZE:
                raise TruncatedArchiveError(f"Local header of {name!r} past end of file")
            fields = struct.unpack(LOCAL_FORMAT, header)
            if fields[0] != LOCAL_SIGNATURE:
                raise CorruptArchiveError(f"Bad local header signature for {name!r}")
            # Sizes in the local header may be zero (data descriptor); trust the central directory
            name_len, extra_len = fields[9], fields[10]
            f.seek(entry.local_header_offset + LOCAL_SIZE + name_len + extra_len)
            payload = f.read(entry.compressed_size)
    except OSError as e:
        raise TruncatedArchiveError(f"Cannot read entry {name!r}: {e}") from e

    if len(payload) != entry.compressed_size:
        raise TruncatedArchiveError(f"Entry {name!r} data extends past end of file")

    if entry.method == METHOD_STORED:
        data = payload
    else:
        data = _inflate(payload, entry.uncompressed_size)

    actual_crc = zlib.crc32(data) & 0xFFFFFFFF
    if actual_crc != entry.crc32:
        raise CrcMismatchError(
            f"CRC mismatch for {name!r}: expected {entry.crc32:08x}, got {actual_crc:08x}")

    bytes_extracted_total.inc(len(data))
    return data


def extract_dex_entries(index: ArchiveIndex) -> List[str]:
    """Names of classes*.dex entries, in central-directory order."""
    seen: Dict[str, None] = {}
    for entry in index.entries:
        if entry.name.startswith("classes") and entry.name.endswith(".dex") and "/" not in entry.name:
            seen[entry.name] = None
    return list(seen)


def extract_classes_dex(source: Union[str, Path, ArchiveIndex]) -> bytes:
    """
    Extract classes.dex from an APK path or an already opened index.

    Only the exact, case-sensitive top-level name is used; multi-dex
    entries (classes2.dex, ...) are ignored.

    Raises:
        NoClassesDexError: If the archive lacks classes.dex
    """
    index = source if isinstance(source, ArchiveIndex) else open_archive(source)
    if CLASSES_DEX not in index:
        raise NoClassesDexError(f"{index.path} has no {CLASSES_DEX}")
    return extract_entry(index, CLASSES_DEX)
