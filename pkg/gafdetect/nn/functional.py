"""
Forward and backward kernels for the layer types the detector uses.

Tensors are float64 numpy arrays laid out (batch, channels, height, width). Every
forward kernel that needs state for its gradient returns `(output, cache)`; the matching
backward kernel takes the upstream gradient and that cache.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import InvalidInput, ShapeError


def _check_rank(x: np.ndarray, rank: int, what: str):
    if x.ndim != rank:
        raise ShapeError(f"{what} must have {rank} dimensions, got shape {x.shape}")


@dataclass
class ConvCache:
    windows: np.ndarray
    padded_shape: Tuple[int, ...]
    weight: np.ndarray
    stride: int
    pad: int


def conv2d_forward(
    x: np.ndarray,
    w: np.ndarray,
    b: np.ndarray,
    stride: int = 1,
    padding: Union[str, int] = "same",
) -> Tuple[np.ndarray, ConvCache]:
    """
    2-D cross-correlation with zero padding.

    Args:
        x (np.ndarray): Input, shape (B, C, H, W).
        w (np.ndarray): Kernels, shape (F, C, k, k) with odd k.
        b (np.ndarray): Biases, shape (F,).
        stride (int): Step between kernel positions.
        padding (Union[str, int]): "same" pads k // 2 on every side; an integer pads that many.

    Returns:
        Tuple[np.ndarray, ConvCache]: Output of shape (B, F, H', W') and the backward cache.

    Raises:
        ShapeError: If channel counts disagree or the kernel is not square and odd-sized.
    """
    _check_rank(x, 4, "Convolution input")
    _check_rank(w, 4, "Convolution kernel")
    filters, channels, kh, kw = w.shape
    if x.shape[1] != channels:
        raise ShapeError(f"Input has {x.shape[1]} channels, kernel expects {channels}")
    if kh != kw or kh % 2 == 0:
        raise ShapeError(f"Kernels must be square and odd-sized, got {kh}x{kw}")
    if b.shape != (filters,):
        raise ShapeError(f"Bias must have shape ({filters},), got {b.shape}")
    if stride < 1:
        raise InvalidInput(f"stride must be at least 1, got {stride}")
    pad = kh // 2 if padding == "same" else int(padding)
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(padded, (kh, kw), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride]
    out = np.tensordot(windows, w, axes=([1, 4, 5], [1, 2, 3]))
    out = np.ascontiguousarray(out.transpose(0, 3, 1, 2)) + b[None, :, None, None]
    return out, ConvCache(windows, padded.shape, w, stride, pad)


def conv2d_backward(
    dout: np.ndarray, cache: ConvCache
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Gradients of `conv2d_forward`.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: dx, dw, db.
    """
    w, s, pad = cache.weight, cache.stride, cache.pad
    k = w.shape[2]
    _, _, out_h, out_w = dout.shape
    db = dout.sum(axis=(0, 2, 3))
    dw = np.tensordot(dout, cache.windows, axes=([0, 2, 3], [0, 2, 3]))
    dpadded = np.zeros(cache.padded_shape)
    for i in range(k):
        for j in range(k):
            contribution = np.tensordot(dout, w[:, :, i, j], axes=([1], [0]))
            dpadded[
                :, :, i : i + s * out_h : s, j : j + s * out_w : s
            ] += contribution.transpose(0, 3, 1, 2)
    height = cache.padded_shape[2] - 2 * pad
    width = cache.padded_shape[3] - 2 * pad
    dx = dpadded[:, :, pad : pad + height, pad : pad + width]
    return np.ascontiguousarray(dx), dw, db


def leaky_relu(x: np.ndarray, slope: float = 0.1) -> np.ndarray:
    """Elementwise `x if x > 0 else slope * x`."""
    return np.where(x > 0, x, slope * x)


def leaky_relu_backward(
    dout: np.ndarray, x: np.ndarray, slope: float = 0.1
) -> np.ndarray:
    return dout * np.where(x > 0, 1.0, slope)


def maxpool2(x: np.ndarray) -> Tuple[np.ndarray, Tuple[Tuple[int, ...], np.ndarray]]:
    """
    2 x 2 max pooling with stride 2.

    Returns:
        Tuple[np.ndarray, tuple]: Output of shape (B, C, H/2, W/2) and a cache of the
                                  input shape and the argmax within every window.

    Raises:
        ShapeError: If the height or width is odd.
    """
    _check_rank(x, 4, "Pooling input")
    batch, channels, height, width = x.shape
    if height % 2 or width % 2:
        raise ShapeError(f"Pooling needs even spatial dimensions, got {height}x{width}")
    blocks = (
        x.reshape(batch, channels, height // 2, 2, width // 2, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(batch, channels, height // 2, width // 2, 4)
    )
    argmax = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, argmax[..., None], axis=-1)[..., 0]
    return out, (x.shape, argmax)


def maxpool2_backward(dout: np.ndarray, cache) -> np.ndarray:
    shape, argmax = cache
    batch, channels, height, width = shape
    blocks = np.zeros(argmax.shape + (4,))
    np.put_along_axis(blocks, argmax[..., None], dout[..., None], axis=-1)
    return (
        blocks.reshape(batch, channels, height // 2, width // 2, 2, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(shape)
    )


@dataclass
class BatchNormState:
    """
    Running statistics of a batch-norm layer.

    Attributes:
        running_mean (np.ndarray): Per-channel mean used in inference mode.
        running_var (np.ndarray): Per-channel variance used in inference mode, non-negative.
        momentum (float): Weight of the old statistics in each update.
        epsilon (float): Added to the variance before the square root.
    """

    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = 0.99
    epsilon: float = 1e-5

    @classmethod
    def fresh(cls, channels: int, momentum: float = 0.99, epsilon: float = 1e-5):
        return cls(np.zeros(channels), np.ones(channels), momentum, epsilon)


@dataclass
class BatchNormCache:
    normalized: np.ndarray
    inv_std: np.ndarray
    gamma: np.ndarray
    training: bool


def batchnorm_forward(
    x: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    state: BatchNormState,
    *,
    training: bool,
) -> Tuple[np.ndarray, BatchNormCache]:
    """
    Per-channel batch normalization.

    In training mode the batch statistics normalize the input and update the running
    statistics; in inference mode the frozen running statistics are used and `state`
    is left untouched.

    Raises:
        InvalidInput: If training on a batch of one.
        ShapeError: If gamma, beta or the state do not match the channel count.
    """
    _check_rank(x, 4, "Batch-norm input")
    channels = x.shape[1]
    checked = (("gamma", gamma), ("beta", beta), ("running_mean", state.running_mean))
    for name, value in checked:
        if value.shape != (channels,):
            raise ShapeError(f"{name} must have shape ({channels},), got {value.shape}")
    if training:
        if x.shape[0] < 2:
            raise InvalidInput(
                "Batch norm in training mode needs a batch of at least 2"
            )
        mean = x.mean(axis=(0, 2, 3))
        var = x.var(axis=(0, 2, 3))
        m = state.momentum
        state.running_mean = m * state.running_mean + (1 - m) * mean
        state.running_var = m * state.running_var + (1 - m) * var
    else:
        mean = state.running_mean
        var = state.running_var
    inv_std = 1.0 / np.sqrt(var + state.epsilon)
    normalized = (x - mean[None, :, None, None]) * inv_std[None, :, None, None]
    out = gamma[None, :, None, None] * normalized + beta[None, :, None, None]
    return out, BatchNormCache(normalized, inv_std, gamma, training)


def batchnorm_backward(
    dout: np.ndarray, cache: BatchNormCache
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Gradients of `batchnorm_forward`.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: dx, dgamma, dbeta.
    """
    xhat = cache.normalized
    dgamma = (dout * xhat).sum(axis=(0, 2, 3))
    dbeta = dout.sum(axis=(0, 2, 3))
    dxhat = dout * cache.gamma[None, :, None, None]
    inv_std = cache.inv_std[None, :, None, None]
    if not cache.training:
        return dxhat * inv_std, dgamma, dbeta
    count = dout.shape[0] * dout.shape[2] * dout.shape[3]
    sum_dxhat = dxhat.sum(axis=(0, 2, 3), keepdims=True)
    sum_dxhat_xhat = (dxhat * xhat).sum(axis=(0, 2, 3), keepdims=True)
    dx = inv_std / count * (count * dxhat - sum_dxhat - xhat * sum_dxhat_xhat)
    return dx, dgamma, dbeta


def dense_forward(
    x: np.ndarray, w: np.ndarray, b: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Affine map `x @ w + b`.

    Args:
        x (np.ndarray): Shape (B, D).
        w (np.ndarray): Shape (D, O).
        b (np.ndarray): Shape (O,).

    Returns:
        Tuple[np.ndarray, np.ndarray]: Output (B, O) and the input as cache.

    Raises:
        ShapeError: If the input width does not match the weights.
    """
    _check_rank(x, 2, "Dense input")
    if w.ndim != 2 or x.shape[1] != w.shape[0] or b.shape != (w.shape[1],):
        raise ShapeError(
            f"Dense shapes disagree: input {x.shape}, weight {w.shape}, bias {b.shape}"
        )
    return x @ w + b, x


def dense_backward(
    dout: np.ndarray, x: np.ndarray, w: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return dout @ w.T, x.T @ dout, dout.sum(axis=0)


def sigmoid(z: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -z))


def log_softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = z - z.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.exp(log_softmax(z, axis=axis))
