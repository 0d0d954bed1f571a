"""
Gradient-based optimizers: SGD, NAG, AdaGrad and AdaDelta.

Updates are applied in place to the parameter dict. Accumulators mirror the
parameter shapes and dtypes.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from r2d2.exceptions import ShapeMismatchError
from r2d2.nn.layers import Params


@dataclass
class OptimizerState:
    """Hyper-parameters plus per-parameter accumulators ('slot' -> name -> array)."""
    kind: str
    learning_rate: float = 0.01
    momentum: float = 0.9
    rho: float = 0.95
    eps: float = 1e-8
    slots: Dict[str, Params] = field(default_factory=dict)
    steps: int = 0


class Optimizer(ABC):
    """Base class; subclasses implement _update for one parameter."""

    kind: str = ""

    def __init__(
        self,
        learning_rate: float = 0.01,
        momentum: float = 0.9,
        rho: float = 0.95,
        eps: float = 1e-8,
        state: Optional[OptimizerState] = None
    ):
        self.state = state or OptimizerState(
            kind=self.kind,
            learning_rate=learning_rate,
            momentum=momentum,
            rho=rho,
            eps=eps,
        )

    def slot(self, slot: str, name: str, like: np.ndarray) -> np.ndarray:
        """Accumulator for one parameter, created as zeros on first use."""
        table = self.state.slots.setdefault(slot, {})
        if name not in table:
            table[name] = np.zeros_like(like)
        return table[name]

    def evaluation_params(self, params: Params) -> Params:
        """Parameters at which the next gradient must be evaluated."""
        return params

    def step(self, params: Params, grads: Params) -> Params:
        """
        Apply one update.

        Raises:
            ShapeMismatchError: If a gradient is missing or has the wrong shape
        """
        for name, value in params.items():
            grad = grads.get(name)
            if grad is None or grad.shape != value.shape:
                raise ShapeMismatchError(
                    f"Gradient for {name} has shape {None if grad is None else grad.shape}, "
                    f"expected {value.shape}")
        for name, value in params.items():
            self._update(name, value, grads[name].astype(value.dtype, copy=False))
        self.state.steps += 1
        return params

    @abstractmethod
    def _update(self, name: str, value: np.ndarray, grad: np.ndarray):
        pass


class SGD(Optimizer):
    """w <- w - lr * g"""

    kind = "sgd"

    def _update(self, name, value, grad):
        value -= self.state.learning_rate * grad


class NAG(Optimizer):
    """
    Nesterov accelerated gradient in lookahead form.

    v <- mu * v - lr * grad f(w + mu * v); w <- w + v. Callers evaluate the
    gradient at evaluation_params(params).
    """

    kind = "nag"

    def evaluation_params(self, params):
        velocity = self.state.slots.get("velocity", {})
        if not velocity:
            return params
        mu = self.state.momentum
        return {name: value + mu * velocity[name] if name in velocity else value
                for name, value in params.items()}

    def _update(self, name, value, grad):
        v = self.slot("velocity", name, value)
        v *= self.state.momentum
        v -= self.state.learning_rate * grad
        value += v


class AdaGrad(Optimizer):
    """G <- G + g^2; w <- w - lr * g / (sqrt(G) + eps)"""

    kind = "adagrad"

    def _update(self, name, value, grad):
        g2 = self.slot("sum_sq_grad", name, value)
        g2 += grad * grad
        value -= self.state.learning_rate * grad / (np.sqrt(g2) + self.state.eps)


class AdaDelta(Optimizer):
    """
    Learning-rate free AdaDelta.

    E[g^2] <- rho E[g^2] + (1 - rho) g^2
    dx = -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
    E[dx^2] <- rho E[dx^2] + (1 - rho) dx^2
    w <- w + dx
    """

    kind = "adadelta"

    def _update(self, name, value, grad):
        rho, eps = self.state.rho, self.state.eps
        avg_sq_grad = self.slot("avg_sq_grad", name, value)
        avg_sq_delta = self.slot("avg_sq_delta", name, value)
        avg_sq_grad *= rho
        avg_sq_grad += (1 - rho) * grad * grad
        delta = -np.sqrt(avg_sq_delta + eps) / np.sqrt(avg_sq_grad + eps) * grad
        avg_sq_delta *= rho
        avg_sq_delta += (1 - rho) * delta * delta
        value += delta


OPTIMIZERS = {cls.kind: cls for cls in (SGD, NAG, AdaGrad, AdaDelta)}


def get_optimizer(kind: str, **kwargs) -> Optimizer:
    """
    Factory function to get optimizer instance.

    Args:
        kind: One of sgd, nag, adagrad, adadelta
        **kwargs: learning_rate, momentum, rho, eps or state

    Returns:
        Optimizer instance

    Raises:
        ValueError: If kind is not supported
    """
    try:
        cls = OPTIMIZERS[kind.lower()]
    except KeyError:
        raise ValueError(f"Unsupported optimizer: {kind}. Supported: {', '.join(OPTIMIZERS)}")
    return cls(**kwargs)


def optimizer_step(state: OptimizerState, params: Params, grads: Params) -> Params:
    """
    Functional form of a single update; params and state are updated in place.

    For NAG the gradients must have been evaluated at
    get_optimizer('nag', state=state).evaluation_params(params).
    """
    return get_optimizer(state.kind, state=state).step(params, grads)
