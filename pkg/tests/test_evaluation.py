"""
Tests for confusion matrices, detection metrics and threshold sweeps.
"""

import random

import numpy as np
import pytest

from r2d2.evaluation import (
    ConfusionMatrix,
    ScoredSample,
    confusion_at,
    metrics,
    parse_sweep,
    score_dataset,
    sweep_csv,
    threshold_sweep,
    write_gnuplot,
    write_sweep_csv,
)
from r2d2.exceptions import EvaluationError, NonFiniteOutputError, NumericError, WrongInputSizeError
from r2d2.models import Label
from r2d2.nn import Network
from tests.conftest import constant_image


MAL, BEN = Label.MALICIOUS, Label.BENIGN


def scored(*pairs):
    return [ScoredSample(label=label, score=score) for label, score in pairs]


def random_scores(seed, n=200):
    rng = random.Random(seed)
    return scored(*[(rng.choice([MAL, BEN]), round(rng.random(), 3)) for _ in range(n)])


HAND_COUNTED = scored((MAL, 0.9), (MAL, 0.4), (BEN, 0.2), (BEN, 0.8))


class TestConfusionAt:
    """Test thresholding of scores."""

    def test_hand_count(self):
        """Test the four-sample example at threshold 0.5."""
        cm = confusion_at(HAND_COUNTED, 0.5)

        assert (cm.tp, cm.fp, cm.fn, cm.tn) == (1, 1, 1, 1)
        assert cm.total == 4

    def test_threshold_zero_flags_everything(self):
        cm = confusion_at(random_scores(1), 0.0)

        assert cm.fn == 0 and cm.tn == 0

    def test_threshold_one_flags_nothing_below_one(self):
        scores = [s for s in random_scores(2) if s.score < 1.0]

        cm = confusion_at(scores, 1.0)

        assert cm.tp == 0 and cm.fp == 0

    def test_threshold_is_inclusive(self):
        """Test that a score equal to the threshold is flagged."""
        cm = confusion_at(scored((MAL, 0.5), (BEN, 0.5)), 0.5)

        assert cm.tp == 1 and cm.fp == 1

    def test_threshold_out_of_range(self):
        with pytest.raises(EvaluationError):
            confusion_at(HAND_COUNTED, 1.5)
        with pytest.raises(EvaluationError):
            confusion_at(HAND_COUNTED, float("nan"))


class TestMetrics:
    """Test metric formulas and undefined markers."""

    def test_symmetric_case(self):
        """Test that one of each outcome gives 0.5 everywhere."""
        report = metrics(ConfusionMatrix(tp=1, fp=1, fn=1, tn=1))

        for value in (report.accuracy, report.precision, report.recall, report.fpr, report.f1):
            assert value == 0.5

    def test_false_positive_rate_from_counts(self):
        """Test 1799 misfires among 20313 benign samples."""
        report = metrics(ConfusionMatrix(fp=1799, tn=18514))

        assert report.fpr == pytest.approx(1799 / 20313)
        assert round(report.fpr, 4) == 0.0886

    def test_detection_rate_from_counts(self):
        """Test 5670 detections among 5852 malicious samples."""
        report = metrics(ConfusionMatrix(tp=5670, fn=182))

        assert round(report.recall, 4) == 0.9689
        assert report.precision == 1.0
        assert report.fpr is None

    def test_zero_denominators_are_undefined(self):
        """Test that 0/0 is None, never 0."""
        report = metrics(ConfusionMatrix(tn=10))

        assert report.accuracy == 1.0
        assert report.precision is None
        assert report.recall is None
        assert report.f1 is None
        assert report.fpr == 0.0

    def test_empty_matrix(self):
        report = metrics(ConfusionMatrix())

        assert report.accuracy is None

    def test_f1_is_harmonic_mean(self):
        """Test min(p, r) <= f1 <= max(p, r) on random matrices."""
        rng = np.random.default_rng(5)
        for _ in range(200):
            tp, fp, fn, tn = (int(v) for v in rng.integers(0, 50, size=4))
            report = metrics(ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn))
            if report.f1 is None:
                continue
            p, r = report.precision, report.recall
            assert min(p, r) - 1e-12 <= report.f1 <= max(p, r) + 1e-12


class TestThresholdSweep:
    """Test sweeps over a threshold grid."""

    def test_single_point(self):
        """Test that grid {0.0} is one all-malicious report."""
        rows = threshold_sweep(HAND_COUNTED, [0.0])

        assert len(rows) == 1
        cm = rows[0][1].confusion
        assert (cm.tp, cm.fp, cm.fn, cm.tn) == (2, 2, 0, 0)

    def test_matches_brute_force(self):
        """Test that the sorted-search sweep equals confusion_at at every point."""
        grid = parse_sweep("0:0.05:1")
        for seed in range(10):
            scores = random_scores(seed)
            for threshold, report in threshold_sweep(scores, grid):
                assert report.confusion == confusion_at(scores, threshold)

    def test_monotonic_rates(self):
        """Test recall and fpr are non-increasing in the threshold."""
        rows = threshold_sweep(random_scores(11), parse_sweep("0:0.01:1"))
        recalls = [r.recall for _, r in rows]
        fprs = [r.fpr for _, r in rows]

        assert all(b <= a for a, b in zip(recalls, recalls[1:]))
        assert all(b <= a for a, b in zip(fprs, fprs[1:]))
        assert recalls[90] <= recalls[10]

    def test_empty_grid(self):
        with pytest.raises(EvaluationError):
            threshold_sweep(HAND_COUNTED, [])

    def test_unsorted_grid(self):
        with pytest.raises(EvaluationError):
            threshold_sweep(HAND_COUNTED, [0.5, 0.1])


class TestSweepOutput:
    """Test grid parsing and CSV/gnuplot rendering."""

    def test_parse_sweep(self):
        """Test that 0:0.1:1 is eleven points including both ends."""
        grid = parse_sweep("0:0.1:1")

        assert len(grid) == 11
        assert grid[0] == 0.0
        assert grid[-1] == 1.0
        assert grid[3] == 0.3

    @pytest.mark.parametrize("spec", ["0:0.1", "a:b:c", "0:0:1", "1:0.1:0", "0:0.5:2"])
    def test_parse_sweep_errors(self, spec):
        with pytest.raises(EvaluationError):
            parse_sweep(spec)

    def test_csv(self):
        """Test header, fixed formats and n/a markers."""
        text = sweep_csv(threshold_sweep(HAND_COUNTED, [0.5, 1.0]))
        lines = text.splitlines()

        assert lines[0] == "threshold,tp,fp,fn,tn,acc,prec,recall,fpr,f1"
        assert lines[1] == "0.5000,1,1,1,1,0.500000,0.500000,0.500000,0.500000,0.500000"
        assert lines[2] == "1.0000,0,0,2,2,0.500000,n/a,0.000000,0.000000,n/a"

    def test_csv_is_deterministic(self, tmp_path):
        rows = threshold_sweep(random_scores(3), parse_sweep("0:0.1:1"))

        first = write_sweep_csv(rows, tmp_path / "a.csv").read_bytes()
        second = write_sweep_csv(rows, tmp_path / "b.csv").read_bytes()

        assert first == second

    def test_gnuplot_nan(self, tmp_path):
        """Test that undefined values become NaN in the data file."""
        lines = write_gnuplot(threshold_sweep(HAND_COUNTED, [1.0]), tmp_path / "s.dat").read_text().splitlines()

        assert lines[0].startswith("#")
        assert lines[1].split() == ["1.0000", "0.500000", "NaN", "0.000000", "0.000000", "NaN"]


class TestScoreDataset:
    """Test scoring images with a network."""

    def test_order_and_length(self, tiny_config, toy_dataset):
        network = Network(tiny_config)
        network.params["head.weight"][:] = np.random.default_rng(0).standard_normal(
            network.params["head.weight"].shape)

        scores = score_dataset(network, toy_dataset)

        assert len(scores) == len(toy_dataset)
        assert [s.label for s in scores] == [Label.from_index(label) for _, label in toy_dataset]
        assert all(0.0 <= s.score <= 1.0 for s in scores)
        assert score_dataset(network, toy_dataset) == scores

    def test_single_benign(self, tiny_config):
        """Test one benign image gives one benign tuple."""
        scores = score_dataset(Network(tiny_config), [(constant_image((1, 2, 3)), BEN)])

        assert len(scores) == 1
        assert scores[0].label is BEN
        assert scores[0].score == 0.5

    def test_empty(self, tiny_config):
        with pytest.raises(EvaluationError):
            score_dataset(Network(tiny_config), [])

    def test_wrong_size(self, tiny_config):
        with pytest.raises(WrongInputSizeError):
            score_dataset(Network(tiny_config), [(constant_image((1, 2, 3), size=9), BEN)])

    def test_non_finite_scores(self, tiny_config, toy_dataset):
        """Test that a NaN network output raises a numeric error instead of scoring 0."""
        network = Network(tiny_config)
        network.params["head.weight"][:] = np.nan

        with pytest.raises(NonFiniteOutputError) as exc_info:
            score_dataset(network, toy_dataset)
        assert isinstance(exc_info.value, NumericError)
