"""
Minimal valid DEX files with synthetic bodies.

The body is random bytes, not Dalvik code; only the header is realistic:
magic, file_size, header_size, endian tag, data_size/data_off, SHA-1
signature and adler32 checksum.
"""

import hashlib
import struct
import zlib

import numpy as np

from r2d2.corpus.families import FamilySpec
from r2d2.dex.parser import (
    CHECKSUM_START,
    ENDIAN_CONSTANT,
    HEADER_FORMAT,
    HEADER_SIZE,
    SIGNATURE_START,
)


DEX_MAGIC = b"dex\n035\x00"

# Motifs may start at the beginning of each slot of this many body bytes
MOTIF_SLOT = 16


def build_dex(body: bytes, magic: bytes = DEX_MAGIC) -> bytes:
    """Wrap a body in a 112-byte header with correct size, signature and checksum."""
    file_size = HEADER_SIZE + len(body)
    words = [0] * 20
    words[0] = file_size
    words[1] = HEADER_SIZE
    words[2] = ENDIAN_CONSTANT
    words[18] = len(body)                      # data_size
    words[19] = HEADER_SIZE if body else 0     # data_off
    data = bytearray(struct.pack(HEADER_FORMAT, magic, 0, b"\x00" * 20, *words) + bytes(body))

    data[SIGNATURE_START - 20:SIGNATURE_START] = hashlib.sha1(data[SIGNATURE_START:]).digest()
    struct.pack_into("<I", data, 8, zlib.adler32(data[CHECKSUM_START:]) & 0xFFFFFFFF)
    return bytes(data)


def _byte_distribution(spec: FamilySpec) -> np.ndarray:
    probs = np.zeros(256, dtype=np.float64)
    for r in spec.histogram:
        probs[r.lo:r.hi + 1] += r.weight / (r.hi - r.lo + 1)
    return probs / probs.sum()


def generate_body(spec: FamilySpec, index: int) -> bytes:
    """Body bytes drawn from the family histogram with motifs inserted."""
    rng = np.random.default_rng([spec.seed, index])
    size = int(rng.integers(spec.min_size, spec.max_size + 1))
    body = rng.choice(256, size=size, p=_byte_distribution(spec)).astype(np.uint8)

    if spec.motifs and spec.frequency > 0 and size:
        slots = size // MOTIF_SLOT
        hits = np.flatnonzero(rng.random(slots) < spec.frequency)
        picks = rng.integers(len(spec.motifs), size=len(hits))
        for slot, pick in zip(hits, picks):
            motif = np.frombuffer(spec.motifs[pick], dtype=np.uint8)
            start = int(slot) * MOTIF_SLOT
            end = min(size, start + len(motif))
            body[start:end] = motif[:end - start]
    return body.tobytes()


def generate_sample(spec: FamilySpec, index: int) -> bytes:
    """
    Deterministic synthetic DEX for (spec, index).

    The per-sample RNG is seeded from (spec.seed, index), so samples can be
    generated in any order or in parallel.
    """
    return build_dex(generate_body(spec, index))
