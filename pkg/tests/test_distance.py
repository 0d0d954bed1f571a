"""
Tests for Levenshtein, MSE, RMS and similarity percentage.
"""

import itertools
import math
import random
from functools import lru_cache

import numpy as np
import pytest

from r2d2.corpus import default_families, generate_sample
from r2d2.distance import (
    compare,
    family_similarity,
    levenshtein,
    mse,
    rms,
    similarity_percent,
)
from r2d2.exceptions import DimensionMismatchError
from r2d2.pixel import RgbImage, WidthPolicy, encode_bytes


def brute_force_levenshtein(a: bytes, b: bytes) -> int:
    """Recursive reference implementation."""
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            d(i - 1, j) + 1,
            d(i, j - 1) + 1,
            d(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )
    return d(len(a), len(b))


def pixel(rgb):
    return RgbImage.from_triples(1, 1, [rgb])


class TestLevenshtein:
    """Test the edit distance."""

    def test_identity(self):
        assert levenshtein(b"classes.dex", b"classes.dex") == 0

    def test_kitten_sitting(self):
        """Test the classic three-edit example."""
        assert levenshtein(b"kitten", b"sitting") == 3

    def test_empty(self):
        """Test that empty vs length-n is n inserts."""
        assert levenshtein(b"", b"abcde") == 5
        assert levenshtein(b"abcde", b"") == 5
        assert levenshtein(b"", b"") == 0

    def test_matches_brute_force(self):
        """Test 500 random pairs of up to 12 bytes against the oracle."""
        rng = random.Random(42)
        for _ in range(500):
            a = bytes(rng.randrange(4) for _ in range(rng.randint(0, 12)))
            b = bytes(rng.randrange(4) for _ in range(rng.randint(0, 12)))
            assert levenshtein(a, b) == brute_force_levenshtein(a, b)

    def test_metric_axioms(self):
        """Test identity, symmetry and the triangle inequality."""
        rng = random.Random(43)
        strings = [bytes(rng.randrange(3) for _ in range(rng.randint(0, 8))) for _ in range(25)]
        for a, b in itertools.product(strings, repeat=2):
            d = levenshtein(a, b)
            assert (d == 0) == (a == b)
            assert d == levenshtein(b, a)
        for a, b, c in itertools.combinations(strings, 3):
            assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)

    def test_cap_truncates(self):
        """Test that only the first cap bytes are compared."""
        assert levenshtein(b"abcXYZ", b"abcQ", cap=3) == 0

    def test_strict_cap_skips(self):
        """Test that strict mode skips over-cap inputs."""
        assert levenshtein(b"abcd", b"ab", cap=3, strict=True) is None
        assert levenshtein(b"abc", b"ab", cap=3, strict=True) == 1

    def test_band_is_upper_bound(self):
        """Test that the banded DP never underestimates."""
        rng = random.Random(44)
        for _ in range(200):
            a = bytes(rng.randrange(4) for _ in range(rng.randint(0, 30)))
            b = bytes(rng.randrange(4) for _ in range(rng.randint(0, 30)))
            exact = levenshtein(a, b)
            assert levenshtein(a, b, band=2) >= exact
            assert levenshtein(a, b, band=64) == exact

    def test_long_inputs(self):
        """Test a few thousand bytes with a known number of substitutions."""
        a = bytes(np.random.default_rng(1).integers(0, 256, size=3000, dtype=np.uint8))
        b = bytearray(a)
        for i in range(0, 3000, 300):
            b[i] ^= 0xFF

        assert levenshtein(a, bytes(b)) == 10


class TestImageDistances:
    """Test MSE, RMS and similarity percentage."""

    def test_identical(self):
        image = encode_bytes(bytes(range(90)))

        assert mse(image, image) == 0.0
        assert rms(image, image) == 0.0
        assert similarity_percent(image, image) == 100.0

    def test_black_white(self):
        """Test the extreme pair."""
        black, white = pixel((0, 0, 0)), pixel((255, 255, 255))

        assert mse(black, white) == 65025.0
        assert rms(black, white) == 255.0
        assert similarity_percent(black, white) == 0.0

    def test_magic_pixels(self):
        """Test the two DEX magic pixels."""
        a, b = pixel((10, 48, 51)), pixel((100, 101, 120))

        assert mse(a, b) == pytest.approx((90 ** 2 + 53 ** 2 + 69 ** 2) / 3)
        assert mse(a, b) == pytest.approx(15670 / 3)
        assert rms(a, b) == pytest.approx(math.sqrt(15670 / 3))
        assert rms(a, b) == pytest.approx(72.272, abs=1e-3)

    def test_symmetry(self):
        """Test mse symmetry and rms^2 == mse."""
        rng = np.random.default_rng(8)
        for _ in range(20):
            a = RgbImage(rng.integers(0, 256, size=(5, 7, 3), dtype=np.uint8))
            b = RgbImage(rng.integers(0, 256, size=(5, 7, 3), dtype=np.uint8))
            assert mse(a, b) == mse(b, a)
            assert math.isclose(rms(a, b) ** 2, mse(a, b), rel_tol=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            mse(pixel((1, 2, 3)), encode_bytes(b"\x00" * 6))

    def test_compare_aligns_sizes(self):
        """Test that compare resizes to the smaller image first."""
        a_bytes, b_bytes = b"\x10" * 768, b"\x10" * 36
        report = compare(a_bytes, b_bytes, encode_bytes(a_bytes), encode_bytes(b_bytes))

        assert report.levenshtein == 732
        assert report.similarity_percent == 100.0
        assert report.rms == 0.0


class TestFamilySimilarity:
    """Test that synthetic families cluster."""

    def test_intra_exceeds_inter(self):
        """Test mean intra-family similarity beats inter-family similarity."""
        benign, malicious = default_families()
        policy = WidthPolicy.fixed(32)
        groups = {
            spec.name: [encode_bytes(generate_sample(spec, i), policy) for i in range(10)]
            for spec in (benign, malicious)
        }

        report = family_similarity(groups)

        assert report.intra_pairs == 2 * 45
        assert report.inter_pairs == 100
        assert report.intra_mean > report.inter_mean
