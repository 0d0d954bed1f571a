"""
Versioned binary model checkpoints.

Layout (all integers little-endian):

    magic      4 bytes  b"R2D2"
    version    u16
    config     u32 length + UTF-8 JSON of NetworkConfig
    count      u32 number of parameter tensors
    tensors    sorted by name: u16 name length, name, u8 ndim, u32 dims...,
               float32 payload
    crc32      u32 over every preceding byte
"""

import struct
import zlib
from pathlib import Path
from typing import Union

import numpy as np
from pydantic import ValidationError

from r2d2.exceptions import CheckpointError, ShapeMismatchError
from r2d2.nn.network import Network, NetworkConfig
from r2d2.observability import logger


MAGIC = b"R2D2"
FORMAT_VERSION = 1


def checkpoint_bytes(network: Network) -> bytes:
    """Serialize a network to the checkpoint layout."""
    config_json = network.config.model_dump_json().encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<H", FORMAT_VERSION),
        struct.pack("<I", len(config_json)),
        config_json,
        struct.pack("<I", len(network.params)),
    ]
    for name in sorted(network.params):
        value = np.ascontiguousarray(network.params[name], dtype="<f4")
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", value.ndim))
        parts.append(struct.pack(f"<{value.ndim}I", *value.shape))
        parts.append(value.tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


def save_checkpoint(network: Network, path: Union[str, Path]) -> Path:
    """
    Write a checkpoint file.

    Raises:
        CheckpointError: If the file cannot be written
    """
    path = Path(path)
    data = checkpoint_bytes(network)
    try:
        path.write_bytes(data)
    except OSError as e:
        raise CheckpointError(f"Cannot write checkpoint {path}: {e}") from e
    logger.info("checkpoint_saved", path=str(path), size=len(data), parameters=network.parameter_count)
    return path


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError("Checkpoint is truncated")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def network_from_bytes(data: bytes) -> Network:
    """
    Rebuild a network from checkpoint bytes.

    Raises:
        CheckpointError: Bad magic, unsupported version, CRC mismatch,
            malformed config or parameters that do not fit the architecture
    """
    if len(data) < len(MAGIC) + 2 + 4:
        raise CheckpointError("Checkpoint is truncated")
    body, (stored_crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if data[:4] != MAGIC:
        raise CheckpointError(f"Bad checkpoint magic: {data[:4]!r}")
    if zlib.crc32(body) & 0xFFFFFFFF != stored_crc:
        raise CheckpointError("Checkpoint CRC-32 mismatch")

    reader = _Reader(body)
    reader.take(4)
    (version,) = reader.unpack("<H")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {version}")

    (config_len,) = reader.unpack("<I")
    try:
        config = NetworkConfig.model_validate_json(reader.take(config_len))
    except ValidationError as e:
        raise CheckpointError(f"Invalid network config in checkpoint: {e}") from e

    (count,) = reader.unpack("<I")
    params = {}
    for _ in range(count):
        (name_len,) = reader.unpack("<H")
        try:
            name = reader.take(name_len).decode("utf-8")
        except UnicodeDecodeError as e:
            raise CheckpointError("Parameter name is not UTF-8") from e
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}I")
        nbytes = 4 * int(np.prod(shape, dtype=np.int64))
        params[name] = np.frombuffer(reader.take(nbytes), dtype="<f4").reshape(shape).astype(np.float32)

    if reader.pos != len(body):
        raise CheckpointError("Trailing bytes after parameter payload")

    try:
        return Network(config, params)
    except ShapeMismatchError as e:
        raise CheckpointError(f"Checkpoint does not match its architecture: {e}") from e


def load_checkpoint(path: Union[str, Path]) -> Network:
    """Read a checkpoint written by save_checkpoint."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e
    network = network_from_bytes(data)
    logger.debug("checkpoint_loaded", path=str(path), parameters=network.parameter_count)
    return network
