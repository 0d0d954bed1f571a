"""
Network layers.

Layers hold no tensors themselves: parameters live in the network's flat
name -> array dict and every forward returns its own cache, so concurrent
inference on one network is safe.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from r2d2.nn.functional import (
    ConvSpec,
    Tensor,
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
)


Params = Dict[str, Tensor]


def he_uniform(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int) -> Tensor:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(np.float32)


class Layer(ABC):
    """
    Abstract base class for network layers.

    All layers must implement forward() and backward().
    """

    def __init__(self, name: str):
        self.name = name

    def init_params(self, rng: np.random.Generator) -> Params:
        """Fresh parameters for this layer, keyed '<layer>.<param>'."""
        return {}

    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {}

    @abstractmethod
    def forward(self, params: Params, x: Tensor) -> Tuple[Tensor, Any]:
        """
        Compute the layer output.

        Returns:
            (output, cache for backward)
        """
        pass

    @abstractmethod
    def backward(self, params: Params, cache: Any, grad_out: Tensor) -> Tuple[Tensor, Params]:
        """
        Backpropagate an upstream gradient.

        Returns:
            (gradient w.r.t. input, gradients w.r.t. this layer's params)
        """
        pass


class Conv2D(Layer):
    """Convolution, optionally followed by ReLU."""

    def __init__(self, name: str, spec: ConvSpec, relu: bool = True):
        super().__init__(name)
        self.spec = spec
        self.relu = relu

    @property
    def weight_key(self) -> str:
        return f"{self.name}.weight"

    @property
    def bias_key(self) -> str:
        return f"{self.name}.bias"

    def param_shapes(self):
        return {self.weight_key: self.spec.weight_shape, self.bias_key: (self.spec.out_channels,)}

    def init_params(self, rng):
        fan_in = self.spec.in_channels * self.spec.kernel * self.spec.kernel
        return {
            self.weight_key: he_uniform(rng, self.spec.weight_shape, fan_in),
            self.bias_key: np.zeros(self.spec.out_channels, dtype=np.float32),
        }

    def forward(self, params, x):
        z = conv2d_forward(x, self.spec, params[self.weight_key], params[self.bias_key])
        if not self.relu:
            return z, (x, z)
        return relu_forward(z), (x, z)

    def backward(self, params, cache, grad_out):
        x, z = cache
        if self.relu:
            grad_out = relu_backward(grad_out, z)
        grad_x, grad_w, grad_b = conv2d_backward(grad_out, x, self.spec, params[self.weight_key])
        return grad_x, {self.weight_key: grad_w, self.bias_key: grad_b}


class MaxPool2D(Layer):
    """Max pooling; 2x2/2 in the stem, 3x3/1 same-padded inside the block."""

    def __init__(self, name: str, size: int = 2, stride: int = None, padding: int = 0):
        super().__init__(name)
        self.size = size
        self.stride = stride or size
        self.padding = padding

    def forward(self, params, x):
        out, idx = maxpool_forward(x, self.size, self.stride, self.padding)
        return out, (x.shape, idx)

    def backward(self, params, cache, grad_out):
        shape, idx = cache
        return maxpool_backward(grad_out, idx, shape, self.size, self.stride, self.padding), {}


class GlobalAvgPool(Layer):

    def forward(self, params, x):
        return global_avg_pool_forward(x), x.shape

    def backward(self, params, cache, grad_out):
        return global_avg_pool_backward(grad_out, cache), {}


class Dense(Layer):
    """Fully connected layer; zero_init gives a symmetric head."""

    def __init__(self, name: str, in_features: int, out_features: int, zero_init: bool = False):
        super().__init__(name)
        self.in_features = in_features
        self.out_features = out_features
        self.zero_init = zero_init

    @property
    def weight_key(self) -> str:
        return f"{self.name}.weight"

    @property
    def bias_key(self) -> str:
        return f"{self.name}.bias"

    def param_shapes(self):
        return {self.weight_key: (self.in_features, self.out_features), self.bias_key: (self.out_features,)}

    def init_params(self, rng):
        shape = (self.in_features, self.out_features)
        weight = np.zeros(shape, dtype=np.float32) if self.zero_init else he_uniform(rng, shape, self.in_features)
        return {self.weight_key: weight, self.bias_key: np.zeros(self.out_features, dtype=np.float32)}

    def forward(self, params, x):
        return dense_forward(x, params[self.weight_key], params[self.bias_key]), x

    def backward(self, params, cache, grad_out):
        grad_x, grad_w, grad_b = dense_backward(grad_out, cache, params[self.weight_key])
        return grad_x, {self.weight_key: grad_w, self.bias_key: grad_b}


class InceptionLiteBlock(Layer):
    """
    Four parallel same-padded branches concatenated along channels:

    (a) 1x1 conv
    (b) 1x1 reduce -> 3x3 conv
    (c) 1x1 reduce -> 5x5 conv
    (d) 3x3/1 max-pool -> 1x1 conv

    Every conv is followed by ReLU. With reduce=False branches (b) and (c)
    convolve the block input directly, which is only used to compare
    parameter counts.
    """

    def __init__(
        self,
        name: str,
        in_channels: int,
        b1: int,
        b3_reduce: int,
        b3: int,
        b5_reduce: int,
        b5: int,
        pool_proj: int,
        reduce: bool = True
    ):
        super().__init__(name)
        self.in_channels = in_channels
        self.reduce = reduce

        if reduce:
            branch3 = [
                Conv2D(f"{name}.b3_reduce", ConvSpec(in_channels, b3_reduce, 1)),
                Conv2D(f"{name}.b3", ConvSpec(b3_reduce, b3, 3)),
            ]
            branch5 = [
                Conv2D(f"{name}.b5_reduce", ConvSpec(in_channels, b5_reduce, 1)),
                Conv2D(f"{name}.b5", ConvSpec(b5_reduce, b5, 5)),
            ]
        else:
            branch3 = [Conv2D(f"{name}.b3", ConvSpec(in_channels, b3, 3))]
            branch5 = [Conv2D(f"{name}.b5", ConvSpec(in_channels, b5, 5))]

        self.branches: List[List[Layer]] = [
            [Conv2D(f"{name}.b1", ConvSpec(in_channels, b1, 1))],
            branch3,
            branch5,
            [
                MaxPool2D(f"{name}.pool", size=3, stride=1, padding=1),
                Conv2D(f"{name}.pool_proj", ConvSpec(in_channels, pool_proj, 1)),
            ],
        ]
        self.branch_channels: Sequence[int] = (b1, b3, b5, pool_proj)

    @property
    def out_channels(self) -> int:
        return sum(self.branch_channels)

    def sublayers(self) -> List[Layer]:
        return [layer for branch in self.branches for layer in branch]

    def param_shapes(self):
        shapes = {}
        for layer in self.sublayers():
            shapes.update(layer.param_shapes())
        return shapes

    def init_params(self, rng):
        params = {}
        for layer in self.sublayers():
            params.update(layer.init_params(rng))
        return params

    def forward(self, params, x):
        outputs, caches = [], []
        for branch in self.branches:
            h, branch_cache = x, []
            for layer in branch:
                h, cache = layer.forward(params, h)
                branch_cache.append(cache)
            outputs.append(h)
            caches.append(branch_cache)
        return np.concatenate(outputs, axis=1), (x.shape, caches)

    def backward(self, params, cache, grad_out):
        input_shape, caches = cache
        splits = np.cumsum(self.branch_channels)[:-1]
        grad_x = np.zeros(input_shape, dtype=grad_out.dtype)
        grads: Params = {}
        for branch, branch_cache, grad in zip(self.branches, caches, np.split(grad_out, splits, axis=1)):
            for layer, layer_cache in zip(reversed(branch), reversed(branch_cache)):
                grad, layer_grads = layer.backward(params, layer_cache, grad)
                grads.update(layer_grads)
            grad_x += grad
        return grad_x, grads


def count_parameters(layer: Layer) -> int:
    """Number of scalar parameters a layer owns."""
    return int(sum(np.prod(shape) for shape in layer.param_shapes().values()))
