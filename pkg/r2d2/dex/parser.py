"""
DEX header validation.

Only the 112-byte header is parsed; class, method and string tables are left
alone because the encoder consumes the raw byte stream.
"""

import hashlib
import struct
import zlib
from dataclasses import dataclass

from r2d2.exceptions import (
    BadHeaderError,
    BadMagicError,
    ChecksumMismatchError,
    SignatureMismatchError,
    SizeMismatchError,
    TooShortError,
)


HEADER_SIZE = 0x70
ENDIAN_CONSTANT = 0x12345678
MAGIC_PREFIX = b"dex\n03"
SUPPORTED_VERSIONS = ("035", "036", "037", "038", "039")

# magic, checksum, signature, then 20 little-endian u32 words
HEADER_FORMAT = "<8sI20s20I"
assert struct.calcsize(HEADER_FORMAT) == HEADER_SIZE

CHECKSUM_START = 12
SIGNATURE_START = 32


@dataclass(frozen=True)
class DexHeader:
    """Parsed DEX header fields."""
    magic: bytes
    checksum: int
    signature: bytes
    file_size: int
    header_size: int
    endian_tag: int
    link_size: int
    link_off: int
    map_off: int
    string_ids_size: int
    string_ids_off: int
    type_ids_size: int
    type_ids_off: int
    proto_ids_size: int
    proto_ids_off: int
    field_ids_size: int
    field_ids_off: int
    method_ids_size: int
    method_ids_off: int
    class_defs_size: int
    class_defs_off: int
    data_size: int
    data_off: int

    @property
    def version(self) -> str:
        return self.magic[4:7].decode("ascii")


@dataclass(frozen=True)
class DexFile:
    """Validated DEX byte stream with its header."""
    header: DexHeader
    data: bytes

    def __len__(self) -> int:
        return len(self.data)


def compute_checksum(data: bytes) -> int:
    """Adler-32 over bytes [12..end)."""
    return zlib.adler32(data[CHECKSUM_START:]) & 0xFFFFFFFF


def compute_signature(data: bytes) -> bytes:
    """SHA-1 over bytes [32..end)."""
    return hashlib.sha1(data[SIGNATURE_START:]).digest()


def _valid_magic(magic: bytes) -> bool:
    return (
        magic[:6] == MAGIC_PREFIX
        and magic[7:8] == b"\x00"
        and magic[4:7].decode("ascii", errors="replace") in SUPPORTED_VERSIONS
    )


def parse_dex(
    data: bytes,
    strict: bool = False,
    verify_signature: bool = False
) -> DexFile:
    """
    Validate a DEX byte sequence and parse its header.

    Lenient by default: only magic and length are checked, so malformed or
    partially encrypted samples still reach the encoder.

    Args:
        data: Raw DEX bytes
        strict: Also verify adler32 checksum, header_size and endian tag
        verify_signature: Also recompute the SHA-1 signature (implies strict)

    Returns:
        DexFile with populated header

    Raises:
        TooShortError: If fewer than 112 bytes
        BadMagicError: If the magic/version is not dex 035-039
        SizeMismatchError: If header file_size differs from len(data)
        ChecksumMismatchError: Strict mode, adler32 differs
        BadHeaderError: Strict mode, header_size or endian tag invalid
        SignatureMismatchError: Signature check requested and SHA-1 differs
    """
    data = bytes(data)
    if len(data) < HEADER_SIZE:
        raise TooShortError(f"DEX needs at least {HEADER_SIZE} bytes, got {len(data)}")

    magic, checksum, signature, *words = struct.unpack(HEADER_FORMAT, data[:HEADER_SIZE])
    if not _valid_magic(magic):
        raise BadMagicError(f"Bad DEX magic: {magic.hex()}")

    header = DexHeader(magic, checksum, signature, *words)

    if header.file_size != len(data):
        raise SizeMismatchError(
            f"Header file_size {header.file_size} != actual length {len(data)}")

    if strict or verify_signature:
        if header.header_size != HEADER_SIZE:
            raise BadHeaderError(f"header_size is {header.header_size:#x}, expected {HEADER_SIZE:#x}")
        if header.endian_tag != ENDIAN_CONSTANT:
            raise BadHeaderError(f"Unsupported endian tag {header.endian_tag:#010x}")
        actual = compute_checksum(data)
        if actual != header.checksum:
            raise ChecksumMismatchError(
                f"Checksum is {header.checksum:08x}, computed {actual:08x}")

    if verify_signature and compute_signature(data) != header.signature:
        raise SignatureMismatchError("SHA-1 signature does not match")

    return DexFile(header=header, data=data)
