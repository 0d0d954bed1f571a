"""
Forward and backward passes of every network operation.

Tensors are numpy arrays in NCHW layout. The functions keep the input dtype,
so the network runs in float32 while gradient checks can run in float64.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from r2d2.exceptions import ShapeMismatchError


Tensor = np.ndarray

VALID_KERNELS = (1, 3, 5)


@dataclass(frozen=True)
class ConvSpec:
    """Convolution geometry."""
    in_channels: int
    out_channels: int
    kernel: int
    stride: int = 1
    padding: str = "same"

    def __post_init__(self):
        if self.kernel not in VALID_KERNELS:
            raise ShapeMismatchError(f"Kernel must be one of {VALID_KERNELS}, got {self.kernel}")
        if self.stride < 1:
            raise ShapeMismatchError("Stride must be >= 1")
        if self.padding not in ("same", "valid"):
            raise ShapeMismatchError(f"Unknown padding: {self.padding}")
        if self.in_channels < 1 or self.out_channels < 1:
            raise ShapeMismatchError("Channel counts must be >= 1")

    @property
    def pad(self) -> int:
        return (self.kernel - 1) // 2 if self.padding == "same" else 0

    @property
    def weight_shape(self) -> Tuple[int, int, int, int]:
        return (self.out_channels, self.in_channels, self.kernel, self.kernel)

    def output_size(self, height: int, width: int) -> Tuple[int, int]:
        out_h = (height + 2 * self.pad - self.kernel) // self.stride + 1
        out_w = (width + 2 * self.pad - self.kernel) // self.stride + 1
        return out_h, out_w


def _pad(x: Tensor, pad: int, value: float = 0.0) -> Tensor:
    if pad == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)), mode="constant", constant_values=value)


def _windows(xp: Tensor, size: int, stride: int) -> Tensor:
    """(N, C, OH, OW, size, size) view of sliding windows."""
    return sliding_window_view(xp, (size, size), axis=(2, 3))[:, :, ::stride, ::stride]


# ============================================================================
# CONVOLUTION
# ============================================================================

def _check_conv(x: Tensor, spec: ConvSpec, weight: Tensor):
    if x.ndim != 4 or x.shape[1] != spec.in_channels:
        raise ShapeMismatchError(
            f"Expected NCHW input with {spec.in_channels} channels, got {x.shape}")
    if weight.shape != spec.weight_shape:
        raise ShapeMismatchError(f"Expected weight {spec.weight_shape}, got {weight.shape}")
    out_h, out_w = spec.output_size(x.shape[2], x.shape[3])
    if out_h < 1 or out_w < 1:
        raise ShapeMismatchError(f"Input {x.shape[2:]} too small for kernel {spec.kernel}")


def conv2d_forward(x: Tensor, spec: ConvSpec, weight: Tensor, bias: Tensor) -> Tensor:
    """
    Cross-correlation of an NCHW batch with (out, in, k, k) weights.

    Raises:
        ShapeMismatchError: If channels or weight shape disagree with spec
    """
    _check_conv(x, spec, weight)
    if bias.shape != (spec.out_channels,):
        raise ShapeMismatchError(f"Expected bias ({spec.out_channels},), got {bias.shape}")
    win = _windows(_pad(x, spec.pad), spec.kernel, spec.stride)
    out = np.tensordot(win, weight, axes=([1, 4, 5], [1, 2, 3]))  # N, OH, OW, O
    out = out.transpose(0, 3, 1, 2) + bias[None, :, None, None]
    return np.ascontiguousarray(out, dtype=x.dtype)


def conv2d_backward(
    grad_out: Tensor,
    x: Tensor,
    spec: ConvSpec,
    weight: Tensor
) -> Tuple[Tensor, Tensor, Tensor]:
    """
    Gradients of conv2d_forward.

    Returns:
        (grad_input, grad_weight, grad_bias)

    Raises:
        ShapeMismatchError: If grad_out does not match the forward output
    """
    _check_conv(x, spec, weight)
    out_h, out_w = spec.output_size(x.shape[2], x.shape[3])
    expected = (x.shape[0], spec.out_channels, out_h, out_w)
    if grad_out.shape != expected:
        raise ShapeMismatchError(f"Expected upstream gradient {expected}, got {grad_out.shape}")

    k, s, p = spec.kernel, spec.stride, spec.pad
    xp = _pad(x, p)
    win = _windows(xp, k, s)

    grad_bias = grad_out.sum(axis=(0, 2, 3))
    grad_weight = np.tensordot(grad_out, win, axes=([0, 2, 3], [0, 2, 3]))  # O, C, k, k

    cols = np.tensordot(grad_out, weight, axes=([1], [0]))  # N, OH, OW, C, k, k
    cols = cols.transpose(0, 3, 4, 5, 1, 2)                 # N, C, k, k, OH, OW
    grad_xp = np.zeros(xp.shape, dtype=x.dtype)
    for i in range(k):
        for j in range(k):
            grad_xp[:, :, i:i + s * out_h:s, j:j + s * out_w:s] += cols[:, :, i, j]

    grad_x = grad_xp[:, :, p:p + x.shape[2], p:p + x.shape[3]] if p else grad_xp
    return (
        np.ascontiguousarray(grad_x),
        grad_weight.astype(weight.dtype, copy=False),
        grad_bias.astype(weight.dtype, copy=False),
    )


# ============================================================================
# ACTIVATION / POOLING
# ============================================================================

def relu_forward(x: Tensor) -> Tensor:
    return np.maximum(x, 0).astype(x.dtype, copy=False)


def relu_backward(grad_out: Tensor, x: Tensor) -> Tensor:
    return grad_out * (x > 0)


def maxpool_forward(
    x: Tensor,
    size: int = 2,
    stride: int = None,
    padding: int = 0
) -> Tuple[Tensor, Tensor]:
    """
    Max pooling over size x size windows.

    Padding uses -inf so padded cells never win. Ties go to the lowest flat
    index inside the window.

    Returns:
        (output, argmax index inside each window)
    """
    stride = stride or size
    if x.ndim != 4:
        raise ShapeMismatchError(f"Expected NCHW input, got {x.shape}")
    if x.shape[2] + 2 * padding < size or x.shape[3] + 2 * padding < size:
        raise ShapeMismatchError(f"Input {x.shape[2:]} smaller than pool window {size}")
    win = _windows(_pad(x, padding, -np.inf), size, stride)
    flat = win.reshape(win.shape[:4] + (size * size,))
    idx = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
    return np.ascontiguousarray(out), idx


def maxpool_backward(
    grad_out: Tensor,
    idx: Tensor,
    input_shape: Tuple[int, ...],
    size: int = 2,
    stride: int = None,
    padding: int = 0
) -> Tensor:
    """Route each upstream gradient to the arg-max cell of its window."""
    stride = stride or size
    n, c, h, w = input_shape
    if grad_out.shape != idx.shape:
        raise ShapeMismatchError(f"Gradient {grad_out.shape} does not match pool output {idx.shape}")
    _, _, out_h, out_w = grad_out.shape
    di, dj = np.divmod(idx, size)
    rows = np.arange(out_h)[:, None] * stride + di
    cols = np.arange(out_w)[None, :] * stride + dj
    batch = np.arange(n)[:, None, None, None]
    chan = np.arange(c)[None, :, None, None]
    grad_xp = np.zeros((n, c, h + 2 * padding, w + 2 * padding), dtype=grad_out.dtype)
    np.add.at(grad_xp, (batch, chan, rows, cols), grad_out)
    if padding:
        grad_xp = grad_xp[:, :, padding:padding + h, padding:padding + w]
    return np.ascontiguousarray(grad_xp)


def global_avg_pool_forward(x: Tensor) -> Tensor:
    return x.mean(axis=(2, 3))


def global_avg_pool_backward(grad_out: Tensor, input_shape: Tuple[int, ...]) -> Tensor:
    n, c, h, w = input_shape
    if grad_out.shape != (n, c):
        raise ShapeMismatchError(f"Expected gradient {(n, c)}, got {grad_out.shape}")
    scaled = grad_out / (h * w)
    return np.broadcast_to(scaled[:, :, None, None], input_shape).astype(grad_out.dtype)


# ============================================================================
# DENSE / LOSS
# ============================================================================

def dense_forward(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    if x.ndim != 2 or x.shape[1] != weight.shape[0] or bias.shape != (weight.shape[1],):
        raise ShapeMismatchError(
            f"Dense shapes disagree: x {x.shape}, weight {weight.shape}, bias {bias.shape}")
    return x @ weight + bias


def dense_backward(grad_out: Tensor, x: Tensor, weight: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
    if grad_out.shape != (x.shape[0], weight.shape[1]):
        raise ShapeMismatchError(f"Unexpected dense gradient shape {grad_out.shape}")
    return grad_out @ weight.T, x.T @ grad_out, grad_out.sum(axis=0)


def softmax(logits: Tensor) -> Tensor:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits: Tensor, labels: np.ndarray) -> Tuple[float, Tensor, Tensor]:
    """
    Mean softmax cross-entropy.

    Returns:
        (loss, gradient w.r.t. logits = (p - onehot) / N, probabilities)
    """
    n = logits.shape[0]
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (n,) or labels.min(initial=0) < 0 or labels.max(initial=0) >= logits.shape[1]:
        raise ShapeMismatchError(f"Labels {labels.shape} do not match logits {logits.shape}")
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    loss = -float(log_probs[np.arange(n), labels].mean())
    probs = np.exp(log_probs)
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1
    grad /= n
    return loss, grad.astype(logits.dtype, copy=False), probs
