"""
Input preparation shared by scan, eval, train and distance.

APK/ZIP and DEX inputs are encoded to a colour image; PNG inputs are used
as they are, so the image alone is enough to classify a sample.
"""

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from r2d2.config import Settings, settings as default_settings
from r2d2.dex import load_input, sniff_kind
from r2d2.exceptions import InputError
from r2d2.observability import StageTimer, record_parse_error
from r2d2.pixel import RgbImage, WidthPolicy, encode_bytes, read_png, resize_nearest


@dataclass(frozen=True)
class PreparedInput:
    """A sample ready for the network."""
    path: str
    kind: str
    sha256: str
    raw: Optional[bytes]
    image: RgbImage
    encode_ms: float


def encode_path(
    path: Union[str, Path],
    width: Union[str, int] = "auto",
    strict: bool = False
) -> PreparedInput:
    """
    Load an APK, DEX or PNG and produce its colour image at natural size.

    For APK/DEX the digest and raw bytes are those of the DEX payload; for PNG
    they are the file's own digest and no raw bytes.

    Raises:
        InputError: Any archive, DEX, PNG or I/O failure
    """
    path = Path(path)
    try:
        with StageTimer("encode") as timer:
            kind = sniff_kind(path)
            if kind == "png":
                try:
                    digest = hashlib.sha256(path.read_bytes()).hexdigest()
                except OSError as e:
                    raise InputError(f"Cannot read {path}: {e}") from e
                raw, image = None, read_png(path)
            else:
                dex = load_input(path, strict=strict)
                digest = hashlib.sha256(dex.data).hexdigest()
                raw, image = dex.data, encode_bytes(dex.data, WidthPolicy.parse(width))
    except InputError as e:
        record_parse_error(e)
        raise
    return PreparedInput(str(path), kind, digest, raw, image, timer.elapsed_ms)


def prepare_input(path: Union[str, Path], settings: Optional[Settings] = None) -> PreparedInput:
    """encode_path followed by a nearest-neighbour resize to the network input size."""
    settings = settings or default_settings
    prepared = encode_path(path, settings.get_width(), settings.strict_dex)
    size = settings.input_size
    if prepared.image.size == (size, size):
        return prepared
    with StageTimer("resize") as timer:
        image = resize_nearest(prepared.image, size, size)
    return PreparedInput(
        prepared.path,
        prepared.kind,
        prepared.sha256,
        prepared.raw,
        image,
        prepared.encode_ms + timer.elapsed_ms,
    )


def network_image(path: Union[str, Path], settings: Optional[Settings] = None) -> RgbImage:
    """Network-ready image of a file; used to load manifest splits."""
    return prepare_input(path, settings).image
