"""Strided 1-D convolution, its transpose, and PReLU.

Layouts: signals are ``[channels, time]``; ``conv1d`` kernels are
``[C_out, C_in, K]``. ``conv1d_transposed`` takes kernels laid out
``[C_in, C_out, K]``, i.e. exactly the array a ``conv1d`` from ``C_out`` to
``C_in`` channels would use, and computes that convolution's adjoint with no
kernel flip. Convolutions are cross-correlations; "same" padding follows the
usual convention: ``T' = ceil(T / stride)`` and any odd padding sample goes
on the right.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Literal

import numpy as np

from hearloop._errors import InvalidConfig, ShapeMismatch
from hearloop.adcore._array import as_array
from hearloop.adcore._ops import _emit, _unbroadcast

if TYPE_CHECKING:
    import numpy.typing as npt

    from hearloop._types import FloatArray
    from hearloop.adcore._array import Array

Padding = Literal["same", "valid"]


# region: index helpers
def _padding(op: str, length: int, kernel: int, stride: int, mode: Padding) -> tuple[int, int, int]:
    """Return ``(out_length, pad_left, pad_right)``."""
    if stride < 1:
        raise InvalidConfig("stride must be >= 1", op=op, target="stride")
    if mode == "same":
        out_len = -(-length // stride)
        total = max((out_len - 1) * stride + kernel - length, 0)
        return out_len, total // 2, total - total // 2
    if mode == "valid":
        if kernel > length:
            raise ShapeMismatch("kernel longer than input", op=op, target="time", expected=kernel, actual=length)
        return (length - kernel) // stride + 1, 0, 0
    raise InvalidConfig(f"unknown padding mode {mode!r}", op=op, target="padding")


def _im2col(padded: FloatArray, kernel: int, stride: int, out_len: int) -> FloatArray:
    """``[C, Tp]`` -> ``[out_len, C * kernel]`` patch matrix."""
    windows = np.lib.stride_tricks.sliding_window_view(padded, kernel, axis=1)
    windows = windows[:, : (out_len - 1) * stride + 1 : stride]
    return np.ascontiguousarray(windows.transpose(1, 0, 2)).reshape(out_len, -1)


def _col2im(cols: FloatArray, channels: int, padded_len: int, kernel: int, stride: int) -> FloatArray:
    """Adjoint of :func:`_im2col`: scatter-add patches back onto ``[C, Tp]``."""
    out_len = cols.shape[0]
    patches = cols.reshape(out_len, channels, kernel)
    out = np.zeros((channels, padded_len))
    span = (out_len - 1) * stride + 1
    for k in range(kernel):
        out[:, k : k + span : stride] += patches[:, :, k].T
    return out


def _check_kernels(op: str, x: Array, w: Array, in_axis: int) -> None:
    if x.ndim != 2:
        raise ShapeMismatch("input must be [channels, time]", op=op, target="input rank", expected=2, actual=x.ndim)
    if w.ndim != 3:
        raise ShapeMismatch("kernels must be rank 3", op=op, target="kernel rank", expected=3, actual=w.ndim)
    if w.shape[in_axis] != x.shape[0]:
        raise ShapeMismatch(
            "kernel input channels do not match the input",
            op=op,
            target="in_channels",
            expected=w.shape[in_axis],
            actual=x.shape[0],
        )


def _check_bias(op: str, bias: Array | None, channels: int) -> None:
    if bias is not None and bias.shape != (channels,):
        raise ShapeMismatch(
            "bias length does not match output channels",
            op=op,
            target="out_channels",
            expected=(channels,),
            actual=bias.shape,
        )


# endregion


def conv1d(
    x: Array,
    kernels: Array,
    bias: Array | None = None,
    stride: int = 1,
    padding: Padding = "same",
) -> Array:
    """Strided cross-correlation ``[C_in, T] -> [C_out, T']``.

    :raises ShapeMismatch: On rank, channel or bias mismatches, naming the dimension.
    """
    _check_kernels("conv1d", x, kernels, in_axis=1)
    c_out, c_in, k = kernels.shape
    _check_bias("conv1d", bias, c_out)
    length = x.shape[1]
    out_len, left, right = _padding("conv1d", length, k, stride, padding)
    padded = np.pad(x.values, ((0, 0), (left, right)))
    cols = _im2col(padded, k, stride, out_len)
    w2 = kernels.values.reshape(c_out, c_in * k)
    out = w2 @ cols.T
    if bias is not None:
        out = out + bias.values[:, None]

    def rule(g: FloatArray) -> list[FloatArray | None]:
        g_x = None
        if x.requires_grad:
            g_pad = _col2im(g.T @ w2, c_in, padded.shape[1], k, stride)
            g_x = g_pad[:, left : left + length]
        g_w = (g @ cols).reshape(kernels.shape) if kernels.requires_grad else None
        g_b = g.sum(axis=1) if bias is not None and bias.requires_grad else None
        return [g_x, g_w, g_b]

    inputs = (x, kernels) if bias is None else (x, kernels, bias)
    return _emit("conv1d", inputs, out, rule)


def conv1d_transposed(x: Array, kernels: Array, bias: Array | None = None, stride: int = 2) -> Array:
    """Upsampling transposed convolution ``[C_in, T] -> [C_out, stride * T]``.

    ``kernels`` is ``[C_in, C_out, K]``. With zero bias this is the exact
    adjoint of ``conv1d(., kernels, stride=stride)`` applied to a
    ``[C_out, stride * T]`` signal with "same" padding.

    :raises ShapeMismatch: On rank, channel or bias mismatches, naming the dimension.
    """
    _check_kernels("conv1d_transposed", x, kernels, in_axis=0)
    c_in, c_out, k = kernels.shape
    _check_bias("conv1d_transposed", bias, c_out)
    length = x.shape[1]
    full_len = stride * length
    out_len, left, right = _padding("conv1d_transposed", full_len, k, stride, "same")
    padded_len = full_len + left + right
    w2 = kernels.values.reshape(c_in, c_out * k)
    out = _col2im(x.values.T @ w2, c_out, padded_len, k, stride)[:, left : left + full_len]
    if bias is not None:
        out = out + bias.values[:, None]

    def rule(g: FloatArray) -> list[FloatArray | None]:
        cols = _im2col(np.pad(g, ((0, 0), (left, right))), k, stride, out_len)
        g_x = (w2 @ cols.T) if x.requires_grad else None
        g_w = (x.values @ cols).reshape(kernels.shape) if kernels.requires_grad else None
        g_b = g.sum(axis=1) if bias is not None and bias.requires_grad else None
        return [g_x, g_w, g_b]

    inputs = (x, kernels) if bias is None else (x, kernels, bias)
    return _emit("conv1d_transposed", inputs, out, rule)


def prelu(x: Array | npt.ArrayLike, alpha: Array | npt.ArrayLike) -> Array:
    """``x`` where ``x >= 0``, else ``alpha * x``; *alpha* broadcasts against *x*."""
    xv, av = as_array(x), as_array(alpha)
    try:
        np.broadcast_shapes(xv.shape, av.shape)
    except ValueError:
        raise ShapeMismatch(
            "alpha does not broadcast to the input", op="prelu", target="alpha", expected=xv.shape, actual=av.shape
        ) from None
    positive = xv.values >= 0
    out = np.where(positive, xv.values, av.values * xv.values)

    def rule(g: FloatArray) -> list[FloatArray | None]:
        g_x = g * np.where(positive, 1.0, av.values) if xv.requires_grad else None
        g_a = _unbroadcast(np.where(positive, 0.0, g * xv.values), av.shape) if av.requires_grad else None
        return [g_x, g_a]

    return _emit("prelu", (xv, av), out, rule)
