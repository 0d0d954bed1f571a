"""
Sample similarity for family clustering.

Levenshtein runs on raw DEX bytes; MSE, RMS and the similarity percentage
run on equal-size colour images. Similarity is 100 * (1 - mse / 255^2),
clamped to [0, 100].
"""

import itertools
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from r2d2.exceptions import DimensionMismatchError
from r2d2.pixel import RgbImage, resize_nearest


MAX_MSE = 255.0 ** 2
DEFAULT_CAP = 65536


class SimilarityReport(BaseModel):
    """Pairwise distances between two samples."""
    levenshtein: Optional[int] = Field(default=None, description="None when skipped at the cap")
    mse: float = Field(..., ge=0.0)
    rms: float = Field(..., ge=0.0)
    similarity_percent: float = Field(..., ge=0.0, le=100.0)


class FamilySimilarity(BaseModel):
    """Mean similarity within and across families."""
    intra_mean: Optional[float] = None
    inter_mean: Optional[float] = None
    intra_pairs: int = 0
    inter_pairs: int = 0


def levenshtein(
    a: bytes,
    b: bytes,
    cap: int = DEFAULT_CAP,
    strict: bool = False,
    band: Optional[int] = None
) -> Optional[int]:
    """
    Unit-cost edit distance over the first min(len, cap) bytes of each input.

    Each DP row is computed with numpy: substitutions and deletions come from
    the previous row, then the insertion chain is closed with a running
    minimum of (cell - column) + column.

    Args:
        a: First byte sequence
        b: Second byte sequence
        cap: Maximum number of bytes compared from each input
        strict: Return None instead of a distance when truncation happened
        band: Restrict the DP to |i - j| <= band (upper bound on the distance)

    Returns:
        Edit count, or None when strict and either input exceeded the cap
    """
    if strict and (len(a) > cap or len(b) > cap):
        return None
    x = np.frombuffer(bytes(a[:cap]), dtype=np.uint8)
    y = np.frombuffer(bytes(b[:cap]), dtype=np.uint8)
    if len(x) > len(y):
        x, y = y, x
    n, m = len(x), len(y)
    if n == 0:
        return m

    band = m if band is None else max(int(band), m - n)
    inf = n + m + 1
    offsets = np.arange(m + 1, dtype=np.int64)
    row = np.full(m + 1, inf, dtype=np.int64)
    row[:min(m, band) + 1] = offsets[:min(m, band) + 1]

    for i in range(1, n + 1):
        lo = max(0, i - band)
        hi = min(m, i + band)
        jlo = max(lo, 1)
        cost = y[jlo - 1:hi] != x[i - 1]
        sub = np.minimum(row[jlo:hi + 1] + 1, row[jlo - 1:hi] + cost)
        if lo == 0:
            sub = np.concatenate(([i], sub))
        off = offsets[lo:hi + 1]
        row[lo:hi + 1] = np.minimum.accumulate(sub - off) + off
    return int(row[m])


def _check_same_size(a: RgbImage, b: RgbImage):
    if a.size != b.size:
        raise DimensionMismatchError(f"Image sizes differ: {a.size} vs {b.size}")


def mse(a: RgbImage, b: RgbImage) -> float:
    """Mean over all pixels and channels of the squared channel difference."""
    _check_same_size(a, b)
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    return float(np.mean(diff * diff))


def rms(a: RgbImage, b: RgbImage) -> float:
    """Root of mse."""
    return math.sqrt(mse(a, b))


def similarity_from_mse(value: float) -> float:
    return min(100.0, max(0.0, 100.0 * (1.0 - value / MAX_MSE)))


def similarity_percent(a: RgbImage, b: RgbImage) -> float:
    """100 x (1 - mse / 65025), clamped to [0, 100]."""
    return similarity_from_mse(mse(a, b))


def align_sizes(a: RgbImage, b: RgbImage) -> Tuple[RgbImage, RgbImage]:
    """Nearest-neighbour resize both images to the smaller width and height."""
    if a.size == b.size:
        return a, b
    width = min(a.width, b.width)
    height = min(a.height, b.height)
    return resize_nearest(a, width, height), resize_nearest(b, width, height)


def compare(
    a_bytes: bytes,
    b_bytes: bytes,
    a_image: RgbImage,
    b_image: RgbImage,
    cap: int = DEFAULT_CAP,
    strict: bool = False,
    band: Optional[int] = None
) -> SimilarityReport:
    """Full similarity report for a pair of samples."""
    a_image, b_image = align_sizes(a_image, b_image)
    value = mse(a_image, b_image)
    return SimilarityReport(
        levenshtein=levenshtein(a_bytes, b_bytes, cap=cap, strict=strict, band=band),
        mse=value,
        rms=math.sqrt(value),
        similarity_percent=similarity_from_mse(value),
    )


def family_similarity(groups: Dict[str, Sequence[RgbImage]]) -> FamilySimilarity:
    """
    Mean similarity over all intra-family and inter-family image pairs.

    Images of different sizes are aligned with align_sizes first.
    """
    labelled: List[Tuple[str, RgbImage]] = [
        (family, image) for family, images in groups.items() for image in images
    ]
    intra: List[float] = []
    inter: List[float] = []
    for (fa, ia), (fb, ib) in itertools.combinations(labelled, 2):
        ia, ib = align_sizes(ia, ib)
        (intra if fa == fb else inter).append(similarity_percent(ia, ib))
    return FamilySimilarity(
        intra_mean=float(np.mean(intra)) if intra else None,
        inter_mean=float(np.mean(inter)) if inter else None,
        intra_pairs=len(intra),
        inter_pairs=len(inter),
    )
