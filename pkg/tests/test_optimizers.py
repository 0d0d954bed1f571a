"""
Tests for SGD, NAG, AdaGrad and AdaDelta update rules.
"""

import numpy as np
import pytest

from r2d2.exceptions import ShapeMismatchError
from r2d2.nn import AdaDelta, AdaGrad, NAG, OptimizerState, SGD, get_optimizer, optimizer_step


# At lr 0.01 or eps 1e-8 AdaGrad and AdaDelta stay above |w| = 0.6 after 500 steps
QUADRATIC_SETTINGS = {
    "sgd": dict(learning_rate=0.01),
    "nag": dict(learning_rate=0.01, momentum=0.9),
    "adagrad": dict(learning_rate=0.5),
    "adadelta": dict(rho=0.95, eps=1e-2),
}


def minimise_square(optimizer, steps=500):
    """Run f(w) = w^2 from w = 1 and return the trajectory of |w|."""
    params = {"w": np.array([1.0])}
    trajectory = []
    for _ in range(steps):
        at = optimizer.evaluation_params(params)
        optimizer.step(params, {"w": 2.0 * at["w"]})
        trajectory.append(abs(float(params["w"][0])))
    return trajectory


class TestUpdateRules:
    """Test single updates against the formulas."""

    def test_sgd_step(self):
        """Test w=1.0, g=0.5, lr=0.01 -> 0.995."""
        params = {"w": np.array([1.0])}

        SGD(learning_rate=0.01).step(params, {"w": np.array([0.5])})

        assert params["w"][0] == pytest.approx(0.995)

    def test_nag_lookahead(self):
        """Test v <- mu v - lr grad(w + mu v); w <- w + v over two steps."""
        opt = NAG(learning_rate=0.1, momentum=0.5)
        params = {"w": np.array([1.0])}

        assert opt.evaluation_params(params)["w"][0] == 1.0
        opt.step(params, {"w": np.array([2.0])})
        # v = -0.2, w = 0.8
        assert params["w"][0] == pytest.approx(0.8)
        lookahead = opt.evaluation_params(params)["w"][0]
        assert lookahead == pytest.approx(0.7)
        opt.step(params, {"w": np.array([2.0 * lookahead])})
        # v = 0.5 * -0.2 - 0.1 * 1.4 = -0.24
        assert params["w"][0] == pytest.approx(0.56)

    def test_adagrad_step(self):
        """Test G <- G + g^2; w <- w - lr g / (sqrt(G) + eps)."""
        opt = AdaGrad(learning_rate=0.1, eps=1e-8)
        params = {"w": np.array([1.0])}

        opt.step(params, {"w": np.array([3.0])})
        assert params["w"][0] == pytest.approx(1.0 - 0.1 * 3.0 / (3.0 + 1e-8))
        opt.step(params, {"w": np.array([4.0])})

        assert opt.state.slots["sum_sq_grad"]["w"][0] == pytest.approx(25.0)
        assert params["w"][0] == pytest.approx(0.9 - 0.1 * 4.0 / (5.0 + 1e-8))

    def test_adadelta_step(self):
        """Test the first AdaDelta update by hand."""
        rho, eps, g = 0.95, 1e-6, 0.5
        opt = AdaDelta(rho=rho, eps=eps)
        params = {"w": np.array([1.0])}

        opt.step(params, {"w": np.array([g])})

        avg_sq_grad = (1 - rho) * g * g
        delta = -np.sqrt(eps) / np.sqrt(avg_sq_grad + eps) * g
        assert params["w"][0] == pytest.approx(1.0 + delta)
        assert opt.state.slots["avg_sq_delta"]["w"][0] == pytest.approx((1 - rho) * delta * delta)

    @pytest.mark.parametrize("kind", ["sgd", "nag", "adagrad", "adadelta"])
    def test_zero_gradient_fixpoint(self, kind):
        """Test that zero gradients leave parameters unchanged."""
        opt = get_optimizer(kind)
        params = {"w": np.array([[1.5, -2.0]], dtype=np.float32), "b": np.array([0.25], dtype=np.float32)}
        before = {k: v.copy() for k, v in params.items()}

        for _ in range(10):
            opt.step(params, {k: np.zeros_like(v) for k, v in params.items()})

        for name in params:
            np.testing.assert_array_equal(params[name], before[name])

    def test_accumulators_mirror_parameters(self):
        opt = AdaDelta()
        params = {"w": np.ones((2, 3), dtype=np.float32)}

        opt.step(params, {"w": np.ones((2, 3), dtype=np.float32)})

        assert opt.state.slots["avg_sq_grad"]["w"].shape == (2, 3)
        assert opt.state.slots["avg_sq_grad"]["w"].dtype == np.float32

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            SGD().step({"w": np.ones(3)}, {"w": np.ones(4)})
        with pytest.raises(ShapeMismatchError):
            SGD().step({"w": np.ones(3)}, {})

    def test_unknown_optimizer(self):
        with pytest.raises(ValueError):
            get_optimizer("rmsprop")

    def test_functional_step(self):
        """Test optimizer_step carries state between calls."""
        state = OptimizerState(kind="adagrad", learning_rate=0.1)
        params = {"w": np.array([1.0])}

        optimizer_step(state, params, {"w": np.array([1.0])})
        optimizer_step(state, params, {"w": np.array([1.0])})

        assert state.steps == 2
        assert state.slots["sum_sq_grad"]["w"][0] == pytest.approx(2.0)


class TestConvergence:
    """Test optimizer behaviour on f(w) = w^2."""

    @pytest.mark.parametrize("kind", ["sgd", "nag", "adagrad", "adadelta"])
    def test_quadratic(self, kind):
        """Test that every optimizer reaches |w| < 0.1 within 500 steps."""
        trajectory = minimise_square(get_optimizer(kind, **QUADRATIC_SETTINGS[kind]))

        assert min(trajectory) < 0.1

    def test_adagrad_accumulator_monotonic(self):
        """Test that AdaGrad accumulators never decrease."""
        opt = AdaGrad(learning_rate=0.1)
        params = {"w": np.array([1.0, -1.0])}
        rng = np.random.default_rng(0)
        previous = np.zeros(2)

        for _ in range(50):
            opt.step(params, {"w": rng.standard_normal(2)})
            current = opt.state.slots["sum_sq_grad"]["w"].copy()
            assert np.all(current >= previous)
            previous = current

    def test_adagrad_step_shrinks_for_constant_gradient(self):
        """Test that the effective step is non-increasing per coordinate."""
        opt = AdaGrad(learning_rate=0.1)
        params = {"w": np.array([0.0, 0.0])}
        grad = {"w": np.array([1.0, -3.0])}
        steps = []

        for _ in range(20):
            before = params["w"].copy()
            opt.step(params, grad)
            steps.append(np.abs(params["w"] - before))

        for earlier, later in zip(steps, steps[1:]):
            assert np.all(later <= earlier + 1e-15)
