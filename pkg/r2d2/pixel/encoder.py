"""
Byte stream to RGB colour image encoding.

Consecutive byte triples become pixels in reading order:
pixel k = (bytes[3k], bytes[3k+1], bytes[3k+2]). The tail and the final row
are padded with zero bytes (black pixels).
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from r2d2.exceptions import EmptyInputError, LengthOutOfRangeError, PixelError


CHANNELS = 3


@dataclass(frozen=True)
class WidthPolicy:
    """Image width rule: 'auto' (power of two) or a fixed width."""
    mode: str = "auto"
    width: Optional[int] = None

    def __post_init__(self):
        if self.mode not in ("auto", "fixed"):
            raise PixelError(f"Unknown width policy mode: {self.mode}")
        if self.mode == "fixed" and (self.width is None or self.width < 1):
            raise PixelError("Fixed width must be >= 1")

    @classmethod
    def auto(cls) -> "WidthPolicy":
        return cls("auto")

    @classmethod
    def fixed(cls, width: int) -> "WidthPolicy":
        return cls("fixed", int(width))

    @classmethod
    def parse(cls, value: Union[str, int, None]) -> "WidthPolicy":
        """Build from a settings/CLI value ('auto' or an integer)."""
        if value is None or str(value).lower() == "auto":
            return cls.auto()
        return cls.fixed(int(value))

    def width_for(self, pixel_count: int) -> int:
        if self.mode == "fixed":
            return self.width
        side = math.isqrt(pixel_count - 1) + 1 if pixel_count > 1 else 1
        return 1 << (side - 1).bit_length()


class RgbImage:
    """
    Immutable width x height grid of 8-bit RGB triples.

    Pixels are held as a read-only (height, width, 3) uint8 array.
    """

    __slots__ = ("_pixels",)

    def __init__(self, pixels: np.ndarray):
        arr = np.array(pixels, dtype=np.uint8, copy=True)
        if arr.ndim != 3 or arr.shape[2] != CHANNELS:
            raise PixelError(f"Expected (height, width, 3) pixels, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise PixelError("Image must be at least 1x1")
        arr.setflags(write=False)
        self._pixels = arr

    @classmethod
    def from_triples(cls, width: int, height: int, triples: Sequence[Sequence[int]]) -> "RgbImage":
        """Build from a row-major sequence of (r, g, b) triples."""
        arr = np.asarray(triples, dtype=np.uint8)
        if arr.shape != (width * height, CHANNELS):
            raise PixelError(f"Need {width * height} triples for a {width}x{height} image")
        return cls(arr.reshape(height, width, CHANNELS))

    @property
    def pixels(self) -> np.ndarray:
        return self._pixels

    @property
    def width(self) -> int:
        return self._pixels.shape[1]

    @property
    def height(self) -> int:
        return self._pixels.shape[0]

    @property
    def size(self):
        return self.width, self.height

    def pixel(self, index: int) -> tuple:
        """Pixel at a row-major flat index as an (r, g, b) tuple."""
        row, col = divmod(index, self.width)
        return tuple(int(v) for v in self._pixels[row, col])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RgbImage):
            return NotImplemented
        return np.array_equal(self._pixels, other._pixels)

    def __hash__(self) -> int:
        return hash((self._pixels.shape, self._pixels.tobytes()))

    def __repr__(self) -> str:
        return f"RgbImage({self.width}x{self.height})"


def encode_bytes(data: bytes, policy: Optional[WidthPolicy] = None) -> RgbImage:
    """
    Encode a byte stream as an RGB image.

    No DEX validation happens here, so any binary (DEX, smart-contract
    bytecode, ...) can be encoded.

    Args:
        data: Non-empty byte sequence
        policy: Width rule, Auto by default

    Returns:
        RgbImage whose first ceil(len/3) pixels hold the bytes

    Raises:
        EmptyInputError: If data is empty
    """
    policy = policy or WidthPolicy.auto()
    if len(data) == 0:
        raise EmptyInputError("Cannot encode an empty byte sequence")

    pixel_count = -(-len(data) // CHANNELS)
    width = policy.width_for(pixel_count)
    height = -(-pixel_count // width)

    buf = np.zeros(width * height * CHANNELS, dtype=np.uint8)
    buf[:len(data)] = np.frombuffer(bytes(data), dtype=np.uint8)
    return RgbImage(buf.reshape(height, width, CHANNELS))


def decode_to_bytes(image: RgbImage, original_len: int) -> bytes:
    """
    Inverse of encode_bytes, truncated to original_len.

    Raises:
        LengthOutOfRangeError: If original_len exceeds 3 x width x height
    """
    capacity = image.width * image.height * CHANNELS
    if original_len < 0 or original_len > capacity:
        raise LengthOutOfRangeError(
            f"Length {original_len} outside image capacity {capacity}")
    return image.pixels.reshape(-1)[:original_len].tobytes()


def resize_nearest(image: RgbImage, target_w: int, target_h: int) -> RgbImage:
    """
    Nearest-neighbour resize.

    Source index = floor(dst_index * src_dim / dst_dim) on each axis, so every
    output pixel is an original byte triple.
    """
    if target_w < 1 or target_h < 1:
        raise PixelError("Resize targets must be >= 1")
    if (target_w, target_h) == image.size:
        return image
    rows = (np.arange(target_h) * image.height) // target_h
    cols = (np.arange(target_w) * image.width) // target_w
    return RgbImage(image.pixels[rows[:, None], cols[None, :]])


def to_network_input(images: Sequence[RgbImage], size: int) -> np.ndarray:
    """
    Stack images into a float32 NCHW batch scaled to [-1, 1].

    Images of another size are nearest-neighbour resized to size x size.
    """
    batch = np.empty((len(images), CHANNELS, size, size), dtype=np.float32)
    for i, image in enumerate(images):
        if image.size != (size, size):
            image = resize_nearest(image, size, size)
        batch[i] = image.pixels.transpose(2, 0, 1)
    batch /= np.float32(127.5)
    batch -= np.float32(1.0)
    return batch
