"""
Tests for the tensor operations and their gradients.
Analytic gradients are compared with central finite differences in float64.
"""

import math

import numpy as np
import pytest

from r2d2.exceptions import ShapeMismatchError
from r2d2.nn import (
    ConvSpec,
    conv2d_backward,
    conv2d_forward,
    dense_backward,
    dense_forward,
    global_avg_pool_backward,
    global_avg_pool_forward,
    maxpool_backward,
    maxpool_forward,
    relu_backward,
    relu_forward,
    softmax,
    softmax_cross_entropy,
)


H = 1e-3
TOLERANCE = 1e-3
SEEDS = range(100)


def numerical_grad(f, x, h=H):
    """Central differences of scalar f with respect to every element of x."""
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        saved = flat[i]
        flat[i] = saved + h
        plus = f()
        flat[i] = saved - h
        minus = f()
        flat[i] = saved
        out[i] = (plus - minus) / (2 * h)
    return grad


def relative_error(analytic, numeric):
    num = np.linalg.norm(analytic - numeric)
    den = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12)
    return num / den


def reference_conv(x, weight, bias, stride, pad):
    """Direct loop nest over batch, output channel, rows, columns and kernel."""
    n, c, h, w = x.shape
    o, _, k, _ = weight.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    out_h = (h + 2 * pad - k) // stride + 1
    out_w = (w + 2 * pad - k) // stride + 1
    out = np.zeros((n, o, out_h, out_w))
    for b in range(n):
        for oc in range(o):
            for i in range(out_h):
                for j in range(out_w):
                    total = bias[oc]
                    for ic in range(c):
                        for di in range(k):
                            for dj in range(k):
                                total += xp[b, ic, i * stride + di, j * stride + dj] * weight[oc, ic, di, dj]
                    out[b, oc, i, j] = total
    return out


class TestConv2D:
    """Test convolution forward and backward."""

    def test_all_ones(self):
        """Test a 3x3 valid convolution of ones."""
        spec = ConvSpec(1, 1, 3, padding="valid")
        x = np.ones((1, 1, 3, 3), dtype=np.float32)
        w = np.ones((1, 1, 3, 3), dtype=np.float32)

        out = conv2d_forward(x, spec, w, np.zeros(1, dtype=np.float32))

        assert out.shape == (1, 1, 1, 1)
        assert out[0, 0, 0, 0] == 9.0

    def test_pointwise_identity(self):
        """Test that a unit 1x1 kernel returns the input."""
        spec = ConvSpec(1, 1, 1)
        x = np.random.default_rng(0).standard_normal((2, 1, 4, 5)).astype(np.float32)

        out = conv2d_forward(x, spec, np.ones((1, 1, 1, 1), dtype=np.float32), np.zeros(1, dtype=np.float32))

        np.testing.assert_array_equal(out, x)

    def test_matches_loop_reference(self):
        """Test a random 3x3 valid convolution against the loop nest."""
        rng = np.random.default_rng(42)
        x = rng.standard_normal((1, 2, 4, 4))
        w = rng.standard_normal((3, 2, 3, 3))
        b = rng.standard_normal(3)

        out = conv2d_forward(x, ConvSpec(2, 3, 3, padding="valid"), w, b)

        np.testing.assert_allclose(out, reference_conv(x, w, b, 1, 0), rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("kernel,stride,padding", [
        (1, 1, "same"), (3, 1, "same"), (5, 1, "same"), (3, 2, "valid"), (5, 2, "same"),
    ])
    def test_geometry_matches_reference(self, kernel, stride, padding):
        """Test stride and padding variants against the loop nest."""
        rng = np.random.default_rng(kernel * 10 + stride)
        spec = ConvSpec(2, 2, kernel, stride=stride, padding=padding)
        x = rng.standard_normal((2, 2, 7, 6))
        w = rng.standard_normal(spec.weight_shape)
        b = rng.standard_normal(2)

        out = conv2d_forward(x, spec, w, b)

        np.testing.assert_allclose(out, reference_conv(x, w, b, stride, spec.pad), rtol=1e-12, atol=1e-12)

    def test_same_padding_keeps_size(self):
        for k in (1, 3, 5):
            spec = ConvSpec(3, 4, k)
            x = np.zeros((1, 3, 9, 9), dtype=np.float32)
            out = conv2d_forward(x, spec, np.zeros(spec.weight_shape, np.float32), np.zeros(4, np.float32))
            assert out.shape == (1, 4, 9, 9)

    def test_channel_mismatch(self):
        """Test that wrong channel counts are rejected."""
        spec = ConvSpec(3, 1, 3)
        with pytest.raises(ShapeMismatchError):
            conv2d_forward(np.zeros((1, 2, 4, 4)), spec, np.zeros(spec.weight_shape), np.zeros(1))

    def test_invalid_kernel(self):
        with pytest.raises(ShapeMismatchError):
            ConvSpec(1, 1, 2)

    def test_zero_upstream_gradient(self):
        """Test that zero upstream gradient gives zero gradients."""
        rng = np.random.default_rng(1)
        spec = ConvSpec(2, 3, 3)
        x = rng.standard_normal((1, 2, 5, 5))
        w = rng.standard_normal(spec.weight_shape)

        gx, gw, gb = conv2d_backward(np.zeros((1, 3, 5, 5)), x, spec, w)

        assert not gx.any() and not gw.any() and not gb.any()

    def test_scalar_weight_gradient(self):
        """Test d(out)/d(weight) of a scalar 1x1 conv is the input value."""
        spec = ConvSpec(1, 1, 1)
        x = np.full((1, 1, 1, 1), 2.5)

        _, gw, gb = conv2d_backward(np.ones((1, 1, 1, 1)), x, spec, np.full((1, 1, 1, 1), 0.7))

        assert gw[0, 0, 0, 0] == 2.5
        assert gb[0] == 1.0

    def test_gradient_shape_mismatch(self):
        spec = ConvSpec(1, 1, 3)
        with pytest.raises(ShapeMismatchError):
            conv2d_backward(np.zeros((1, 1, 2, 2)), np.zeros((1, 1, 4, 4)), spec, np.zeros(spec.weight_shape))

    @pytest.mark.parametrize("kernel", [1, 3, 5])
    def test_finite_differences(self, kernel):
        """Test input, weight and bias gradients over 100 seeds."""
        for seed in SEEDS:
            rng = np.random.default_rng(seed)
            stride = 1 if seed % 2 else 2
            spec = ConvSpec(2, 3, kernel, stride=stride, padding="same" if seed % 3 else "valid")
            x = rng.standard_normal((2, 2, 5, 5))
            w = rng.standard_normal(spec.weight_shape)
            b = rng.standard_normal(3)
            upstream = rng.standard_normal(conv2d_forward(x, spec, w, b).shape)

            def loss():
                return float(np.sum(conv2d_forward(x, spec, w, b) * upstream))

            gx, gw, gb = conv2d_backward(upstream, x, spec, w)

            assert relative_error(gx, numerical_grad(loss, x)) < TOLERANCE
            assert relative_error(gw, numerical_grad(loss, w)) < TOLERANCE
            assert relative_error(gb, numerical_grad(loss, b)) < TOLERANCE


class TestActivationAndPooling:
    """Test ReLU, max-pool and global average pool."""

    def test_relu_values(self):
        out = relu_forward(np.array([-1.0, 0.0, 2.0]))

        assert out.tolist() == [0.0, 0.0, 2.0]

    def test_relu_finite_differences(self):
        """Test ReLU gradients away from the kink."""
        for seed in SEEDS:
            rng = np.random.default_rng(seed)
            x = rng.uniform(0.1, 1.0, size=(2, 3, 4, 4)) * rng.choice([-1.0, 1.0], size=(2, 3, 4, 4))
            upstream = rng.standard_normal(x.shape)

            analytic = relu_backward(upstream, x)
            numeric = numerical_grad(lambda: float(np.sum(relu_forward(x) * upstream)), x)

            assert relative_error(analytic, numeric) < TOLERANCE

    def test_maxpool_constant_image(self):
        """Test that a constant image pools to itself and routes to the first index."""
        x = np.full((1, 1, 4, 4), 3.0)

        out, idx = maxpool_forward(x)
        grad = maxpool_backward(np.ones_like(out), idx, x.shape)

        assert np.all(out == 3.0)
        assert out.shape == (1, 1, 2, 2)
        expected = np.zeros((4, 4))
        expected[::2, ::2] = 1.0
        np.testing.assert_array_equal(grad[0, 0], expected)

    def test_maxpool_padding_never_wins(self):
        """Test that -inf padding is never selected."""
        x = -np.ones((1, 1, 3, 3))

        out, _ = maxpool_forward(x, size=3, stride=1, padding=1)

        assert np.all(out == -1.0)
        assert out.shape == (1, 1, 3, 3)

    @pytest.mark.parametrize("size,stride,padding", [(2, 2, 0), (3, 1, 1), (3, 2, 0)])
    def test_maxpool_finite_differences(self, size, stride, padding):
        """Test max-pool gradients on well-separated values."""
        for seed in SEEDS:
            rng = np.random.default_rng(seed)
            x = (rng.permutation(2 * 2 * 6 * 6).reshape(2, 2, 6, 6) * 0.1).astype(np.float64)
            out, idx = maxpool_forward(x, size, stride, padding)
            upstream = rng.standard_normal(out.shape)

            def loss():
                return float(np.sum(maxpool_forward(x, size, stride, padding)[0] * upstream))

            analytic = maxpool_backward(upstream, idx, x.shape, size, stride, padding)

            assert relative_error(analytic, numerical_grad(loss, x)) < TOLERANCE

    def test_global_avg_pool_finite_differences(self):
        for seed in SEEDS:
            rng = np.random.default_rng(seed)
            x = rng.standard_normal((2, 3, 4, 5))
            upstream = rng.standard_normal((2, 3))

            analytic = global_avg_pool_backward(upstream, x.shape)
            numeric = numerical_grad(lambda: float(np.sum(global_avg_pool_forward(x) * upstream)), x)

            assert relative_error(analytic, numeric) < TOLERANCE


class TestDenseAndLoss:
    """Test the dense layer and softmax cross-entropy."""

    def test_dense_finite_differences(self):
        for seed in SEEDS:
            rng = np.random.default_rng(seed)
            x = rng.standard_normal((4, 5))
            w = rng.standard_normal((5, 2))
            b = rng.standard_normal(2)
            upstream = rng.standard_normal((4, 2))

            def loss():
                return float(np.sum(dense_forward(x, w, b) * upstream))

            gx, gw, gb = dense_backward(upstream, x, w)

            assert relative_error(gx, numerical_grad(loss, x)) < TOLERANCE
            assert relative_error(gw, numerical_grad(loss, w)) < TOLERANCE
            assert relative_error(gb, numerical_grad(loss, b)) < TOLERANCE

    def test_uniform_logits_loss(self):
        """Test that two equal logits cost ln 2."""
        loss, grad, probs = softmax_cross_entropy(np.zeros((3, 2)), np.array([0, 1, 1]))

        assert loss == pytest.approx(math.log(2))
        np.testing.assert_allclose(probs, 0.5)
        np.testing.assert_allclose(grad, [[-0.5 / 3, 0.5 / 3], [0.5 / 3, -0.5 / 3], [0.5 / 3, -0.5 / 3]])

    def test_softmax_cross_entropy_finite_differences(self):
        for seed in SEEDS:
            rng = np.random.default_rng(seed)
            logits = rng.standard_normal((6, 2)) * 3
            labels = rng.integers(0, 2, size=6)

            loss, grad, _ = softmax_cross_entropy(logits, labels)
            numeric = numerical_grad(lambda: softmax_cross_entropy(logits, labels)[0], logits)

            assert loss >= 0.0
            assert relative_error(grad, numeric) < TOLERANCE

    def test_softmax_rows_sum_to_one(self):
        logits = np.random.default_rng(3).standard_normal((50, 2)).astype(np.float32) * 20

        probs = softmax(logits)

        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-6)
        assert np.all(np.isfinite(probs))

    def test_large_logits_stay_finite(self):
        loss, grad, probs = softmax_cross_entropy(np.array([[1000.0, -1000.0]]), np.array([1]))

        assert math.isfinite(loss)
        assert np.all(np.isfinite(grad))

    def test_label_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            softmax_cross_entropy(np.zeros((2, 2)), np.array([0, 2]))
