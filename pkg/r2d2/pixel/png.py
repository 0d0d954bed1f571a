"""
Lossless PNG interchange for encoded images (8-bit RGB, no alpha).
"""

from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from r2d2.config import settings
from r2d2.exceptions import ImageIOError, UnsupportedPngFormatError
from r2d2.pixel.encoder import RgbImage


def write_png(image: RgbImage, path: Union[str, Path], compress_level: int = None) -> Path:
    """
    Write an image as a non-interlaced 8-bit RGB PNG.

    Args:
        image: Image to write
        path: Destination file
        compress_level: zlib level 0-9 (defaults to settings.png_compress_level)

    Returns:
        Path written

    Raises:
        ImageIOError: If the file cannot be written
    """
    path = Path(path)
    level = settings.png_compress_level if compress_level is None else compress_level
    try:
        Image.fromarray(np.ascontiguousarray(image.pixels)).save(
            path, format="PNG", compress_level=level)
    except (OSError, ValueError) as e:
        raise ImageIOError(f"Cannot write PNG {path}: {e}") from e
    return path


def read_png(path: Union[str, Path]) -> RgbImage:
    """
    Read an 8-bit RGB PNG.

    Raises:
        ImageIOError: If the file cannot be opened or decoded
        UnsupportedPngFormatError: If the image is not a PNG in RGB mode
            (grayscale, palette, alpha and 16-bit images are rejected)
    """
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.format != "PNG":
                raise UnsupportedPngFormatError(f"{path} is {img.format}, not PNG")
            if img.mode != "RGB":
                raise UnsupportedPngFormatError(f"{path} has mode {img.mode}, expected 8-bit RGB")
            # Pillow reports 16-bit RGB as mode RGB; the decoder rawmode keeps the depth
            rawmode = img.tile[0][3] if img.tile else None
            if rawmode != "RGB":
                raise UnsupportedPngFormatError(f"{path} has raw mode {rawmode}, expected 8-bit RGB")
            pixels = np.asarray(img, dtype=np.uint8)
    except UnidentifiedImageError as e:
        raise ImageIOError(f"Cannot decode {path}: {e}") from e
    except OSError as e:
        raise ImageIOError(f"Cannot read {path}: {e}") from e
    return RgbImage(pixels)
