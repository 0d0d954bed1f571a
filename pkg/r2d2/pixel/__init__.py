"""
Android colour image encoding and PNG interchange.
"""

from r2d2.pixel.encoder import (
    CHANNELS,
    WidthPolicy,
    RgbImage,
    encode_bytes,
    decode_to_bytes,
    resize_nearest,
    to_network_input,
)
from r2d2.pixel.png import write_png, read_png

__all__ = [
    'CHANNELS',
    'WidthPolicy',
    'RgbImage',
    'encode_bytes',
    'decode_to_bytes',
    'resize_nearest',
    'to_network_input',
    'write_png',
    'read_png',
]
