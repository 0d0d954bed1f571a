"""
Shared fixtures: APK builders, small DEX samples and a tiny network.
"""

import zipfile

import numpy as np
import pytest

from r2d2.corpus import build_dex, default_families, generate_sample
from r2d2.nn import NetworkConfig
from r2d2.pixel import RgbImage


TINY_NETWORK = dict(
    input_size=8,
    stem_channels=4,
    b1=2,
    b3_reduce=2,
    b3=2,
    b5_reduce=2,
    b5=2,
    pool_proj=2,
)


def write_zip(path, entries, compression=zipfile.ZIP_STORED):
    """Write (name, bytes) pairs as a zip archive."""
    with zipfile.ZipFile(path, "w", compression=compression) as zf:
        for name, data in entries:
            zf.writestr(zipfile.ZipInfo(name), data, compress_type=compression)
    return path


def constant_image(rgb, size=8):
    """size x size image filled with one colour."""
    return RgbImage(np.tile(np.array(rgb, dtype=np.uint8), (size, size, 1)))


@pytest.fixture
def tiny_config():
    return NetworkConfig(**TINY_NETWORK)


@pytest.fixture
def minimal_dex():
    """112-byte DEX: header only."""
    return build_dex(b"")


@pytest.fixture
def sample_dex():
    return generate_sample(default_families()[1], 0)


@pytest.fixture
def dex_file(tmp_path, sample_dex):
    path = tmp_path / "sample.dex"
    path.write_bytes(sample_dex)
    return path


@pytest.fixture
def apk_file(tmp_path, sample_dex):
    """APK-like archive with a deflated classes.dex."""
    return write_zip(
        tmp_path / "sample.apk",
        [
            ("AndroidManifest.xml", b"<manifest/>"),
            ("classes.dex", sample_dex),
            ("res/layout/main.xml", b"<LinearLayout/>"),
        ],
        compression=zipfile.ZIP_DEFLATED,
    )


@pytest.fixture
def toy_dataset():
    """Constant red (class 0) versus constant blue (class 1) images."""
    red = [(constant_image((200 + i, 10, 10)), 0) for i in range(16)]
    blue = [(constant_image((10, 10, 200 + i)), 1) for i in range(16)]
    return red + blue
