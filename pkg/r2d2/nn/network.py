"""
The detection network.

stem conv 3x3 (ReLU) -> max-pool 2x2 -> inception-lite block ->
global average pool -> dense -> softmax.
"""

from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from r2d2.exceptions import NonFiniteOutputError, ShapeMismatchError, WrongInputSizeError
from r2d2.nn.functional import ConvSpec, Tensor, softmax, softmax_cross_entropy
from r2d2.nn.layers import (
    Conv2D,
    Dense,
    GlobalAvgPool,
    InceptionLiteBlock,
    Layer,
    MaxPool2D,
    Params,
)
from r2d2.pixel import CHANNELS, RgbImage, to_network_input


MALICIOUS_CLASS = 1


class NetworkConfig(BaseModel):
    """Architecture hyper-parameters; embedded in checkpoints as JSON."""
    input_size: int = Field(default=64, ge=8)
    stem_channels: int = Field(default=8, ge=1)
    stem_pool: bool = True
    b1: int = Field(default=4, ge=1)
    b3_reduce: int = Field(default=4, ge=1)
    b3: int = Field(default=8, ge=1)
    b5_reduce: int = Field(default=2, ge=1)
    b5: int = Field(default=4, ge=1)
    pool_proj: int = Field(default=4, ge=1)
    num_classes: int = Field(default=2, ge=2)
    seed: int = 42


class Network:
    """
    Small CNN with one inception-lite block.

    Parameters are a flat dict of float32 arrays keyed '<layer>.<param>'.
    The dense head starts at zero, so an untrained network is indifferent
    between classes.
    """

    def __init__(self, config: Optional[NetworkConfig] = None, params: Optional[Params] = None):
        self.config = config or NetworkConfig()
        cfg = self.config

        self.block = InceptionLiteBlock(
            "inception", cfg.stem_channels,
            cfg.b1, cfg.b3_reduce, cfg.b3, cfg.b5_reduce, cfg.b5, cfg.pool_proj,
        )
        self.layers: List[Layer] = [Conv2D("stem", ConvSpec(CHANNELS, cfg.stem_channels, 3))]
        if cfg.stem_pool:
            self.layers.append(MaxPool2D("stem_pool", size=2))
        self.layers += [
            self.block,
            GlobalAvgPool("gap"),
            Dense("head", self.block.out_channels, cfg.num_classes, zero_init=True),
        ]

        if params is None:
            params = self.init_params()
        self._check_params(params)
        self.params: Params = params

    def init_params(self) -> Params:
        rng = np.random.default_rng(self.config.seed)
        params: Params = {}
        for layer in self.layers:
            params.update(layer.init_params(rng))
        return params

    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        shapes = {}
        for layer in self.layers:
            shapes.update(layer.param_shapes())
        return shapes

    def _check_params(self, params: Params):
        expected = self.param_shapes()
        if set(params) != set(expected):
            raise ShapeMismatchError(
                f"Parameter names differ from architecture: {sorted(set(params) ^ set(expected))}")
        for name, shape in expected.items():
            if params[name].shape != tuple(shape):
                raise ShapeMismatchError(f"{name}: expected {shape}, got {params[name].shape}")

    @property
    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def _check_input(self, x: Tensor):
        size = self.config.input_size
        if x.ndim != 4 or x.shape[1:] != (CHANNELS, size, size):
            raise WrongInputSizeError(
                f"Expected (N, {CHANNELS}, {size}, {size}) input, got {x.shape}")

    # ========================================================================
    # FORWARD / BACKWARD
    # ========================================================================

    def forward(self, x: Tensor, params: Optional[Params] = None) -> Tuple[Tensor, List[Any]]:
        """
        Compute class logits for an NCHW batch.

        Returns:
            (logits of shape (N, num_classes), per-layer caches)

        Raises:
            WrongInputSizeError: If the batch does not match the input size
        """
        self._check_input(x)
        params = self.params if params is None else params
        caches = []
        h = x
        for layer in self.layers:
            h, cache = layer.forward(params, h)
            caches.append(cache)
        return h, caches

    def backward(self, caches: List[Any], grad_logits: Tensor, params: Optional[Params] = None) -> Params:
        """Gradients of every parameter given d(loss)/d(logits)."""
        params = self.params if params is None else params
        grads: Params = {}
        grad = grad_logits
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            grad, layer_grads = layer.backward(params, cache, grad)
            grads.update(layer_grads)
        return grads

    def loss_and_grads(
        self,
        x: Tensor,
        labels: np.ndarray,
        params: Optional[Params] = None
    ) -> Tuple[float, Params, Tensor]:
        """
        Mean softmax cross-entropy over a batch with its gradients.

        Args:
            x: NCHW batch
            labels: Integer class per sample
            params: Evaluate at these parameters instead of self.params

        Returns:
            (loss, gradients by parameter name, class probabilities)
        """
        logits, caches = self.forward(x, params)
        loss, grad_logits, probs = softmax_cross_entropy(logits, labels)
        return loss, self.backward(caches, grad_logits, params), probs

    # ========================================================================
    # INFERENCE
    # ========================================================================

    def predict_proba(self, x: Tensor) -> Tensor:
        """Class probabilities, shape (N, num_classes)."""
        logits, _ = self.forward(x)
        return softmax(logits)

    def predict(self, image: RgbImage) -> float:
        """
        Probability of the malicious class for one image.

        Raises:
            WrongInputSizeError: If the image is not input_size x input_size
            NonFiniteOutputError: If the output probability is NaN or infinite
        """
        return float(self.predict_images([image])[0])

    def predict_images(self, images: Sequence[RgbImage], batch_size: int = 64) -> np.ndarray:
        """Malicious-class probabilities for images already at the input size."""
        size = self.config.input_size
        for image in images:
            if image.size != (size, size):
                raise WrongInputSizeError(
                    f"Expected a {size}x{size} image, got {image.width}x{image.height}")
        scores = []
        for start in range(0, len(images), batch_size):
            batch = to_network_input(images[start:start + batch_size], size)
            scores.append(self.predict_proba(batch)[:, MALICIOUS_CLASS])
        if not scores:
            return np.zeros(0, dtype=np.float32)
        scores = np.concatenate(scores)
        if not np.all(np.isfinite(scores)):
            raise NonFiniteOutputError(
                f"Network output is not finite for {int(np.sum(~np.isfinite(scores)))} of {len(scores)} images")
        return scores
