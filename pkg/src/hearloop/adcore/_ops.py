"""Differentiable elementwise, reduction, indexing and filtering operations."""

from __future__ import annotations

from typing import TYPE_CHECKING, Literal

import numpy as np
import scipy.signal
import scipy.special

from hearloop._errors import ShapeMismatch
from hearloop.adcore._array import Array, active_tape, as_array

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy.typing as npt

    from hearloop._types import FloatArray
    from hearloop.adcore._array import BackwardRule

    Operand = Array | float | npt.ArrayLike

ReduceKind = Literal["sum", "mean", "max"]


# region: recording helpers
def _emit(op: str, inputs: Sequence[Array], values: FloatArray, rule: BackwardRule) -> Array:
    """Record *op* when a tape is active and some input requires gradients."""
    tape = active_tape()
    if tape is not None and any(inp.requires_grad for inp in inputs):
        return tape.record(op, inputs, values, rule)
    return Array._constant(values)


def _unbroadcast(g: FloatArray, shape: tuple[int, ...]) -> FloatArray:
    """Sum *g* down to *shape*, undoing numpy broadcasting."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _broadcast_shape(op: str, a: Array, b: Array) -> tuple[int, ...]:
    try:
        return tuple(np.broadcast_shapes(a.shape, b.shape))
    except ValueError:
        raise ShapeMismatch(
            f"operands of {op} do not broadcast", op=op, target="operands", expected=a.shape, actual=b.shape
        ) from None


# endregion


# region: binary arithmetic
def add(a: Operand, b: Operand) -> Array:
    x, y = as_array(a), as_array(b)
    _broadcast_shape("add", x, y)

    def rule(g: FloatArray) -> list[FloatArray | None]:
        return [
            _unbroadcast(g, x.shape) if x.requires_grad else None,
            _unbroadcast(g, y.shape) if y.requires_grad else None,
        ]

    return _emit("add", (x, y), x.values + y.values, rule)


def sub(a: Operand, b: Operand) -> Array:
    x, y = as_array(a), as_array(b)
    _broadcast_shape("sub", x, y)

    def rule(g: FloatArray) -> list[FloatArray | None]:
        return [
            _unbroadcast(g, x.shape) if x.requires_grad else None,
            _unbroadcast(-g, y.shape) if y.requires_grad else None,
        ]

    return _emit("sub", (x, y), x.values - y.values, rule)


def mul(a: Operand, b: Operand) -> Array:
    x, y = as_array(a), as_array(b)
    _broadcast_shape("mul", x, y)

    def rule(g: FloatArray) -> list[FloatArray | None]:
        return [
            _unbroadcast(g * y.values, x.shape) if x.requires_grad else None,
            _unbroadcast(g * x.values, y.shape) if y.requires_grad else None,
        ]

    return _emit("mul", (x, y), x.values * y.values, rule)


def div(a: Operand, b: Operand) -> Array:
    x, y = as_array(a), as_array(b)
    _broadcast_shape("div", x, y)
    out = x.values / y.values

    def rule(g: FloatArray) -> list[FloatArray | None]:
        return [
            _unbroadcast(g / y.values, x.shape) if x.requires_grad else None,
            _unbroadcast(-g * out / y.values, y.shape) if y.requires_grad else None,
        ]

    return _emit("div", (x, y), out, rule)


# endregion


# region: unary elementwise
def scale(x: Array, factor: float) -> Array:
    c = float(factor)
    return _emit("scale", (x,), x.values * c, lambda g: [g * c])


def square(x: Array) -> Array:
    v = x.values
    return _emit("square", (x,), v * v, lambda g: [2.0 * v * g])


def abs(x: Array) -> Array:
    """Elementwise ``|x|``; the gradient at exactly zero is taken to be 0."""
    v = x.values
    return _emit("abs", (x,), np.abs(v), lambda g: [np.sign(v) * g])


def relu_smooth(x: Array, beta: float = 1.0) -> Array:
    """Softplus ``log(1 + exp(beta * x)) / beta``, a smooth ReLU."""
    v = x.values
    out = np.logaddexp(0.0, beta * v) / beta
    return _emit("relu_smooth", (x,), out, lambda g: [scipy.special.expit(beta * v) * g])


def smooth_abs(x: Array, eps: float) -> Array:
    """``sqrt(x**2 + eps**2) - eps``: zero at zero, asymptotically ``|x|``."""
    v = x.values
    root = np.sqrt(v * v + eps * eps)
    out = v * v / (root + eps)
    return _emit("smooth_abs", (x,), out, lambda g: [g * v / root])


def sqrt(x: Array) -> Array:
    out = np.sqrt(x.values)
    return _emit("sqrt", (x,), out, lambda g: [g / (2.0 * out)])


def power(x: Array, exponent: float) -> Array:
    v = x.values
    p = float(exponent)
    return _emit("power", (x,), v**p, lambda g: [g * p * v ** (p - 1.0)])


def exp(x: Array) -> Array:
    out = np.exp(x.values)
    return _emit("exp", (x,), out, lambda g: [g * out])


def log(x: Array) -> Array:
    v = x.values
    return _emit("log", (x,), np.log(v), lambda g: [g / v])


def log10(x: Array) -> Array:
    v = x.values
    return _emit("log10", (x,), np.log10(v), lambda g: [g / (v * np.log(10.0))])


def tanh(x: Array) -> Array:
    out = np.tanh(x.values)
    return _emit("tanh", (x,), out, lambda g: [g * (1.0 - out * out)])


def sigmoid(x: Array) -> Array:
    out = scipy.special.expit(x.values)
    return _emit("sigmoid", (x,), out, lambda g: [g * out * (1.0 - out)])


# endregion


# region: reductions
def _check_axis(op: str, x: Array, axis: int | None) -> int | None:
    if axis is None:
        return None
    if not -x.ndim <= axis < x.ndim:
        raise ShapeMismatch(f"axis {axis} out of range for rank {x.ndim}", op=op, target="axis", actual=axis)
    return axis % x.ndim


def reduce(x: Array, axis: int | None = None, kind: ReduceKind = "sum") -> Array:
    """Reduce over *axis* (all axes when ``None``).

    For ``kind="max"`` the gradient goes entirely to the first maximal element
    along the axis; ties do not share it.

    :raises ShapeMismatch: If *axis* is out of range.
    """
    ax = _check_axis("reduce", x, axis)
    v = x.values
    if kind == "sum":
        out = np.sum(v, axis=ax)
        n = 1.0
    elif kind == "mean":
        n = float(v.size if ax is None else v.shape[ax])
        out = np.sum(v, axis=ax) / n
    elif kind == "max":
        return _reduce_max(x, ax)
    else:
        raise ShapeMismatch(f"unknown reduction {kind!r}", op="reduce", target="kind", actual=kind)

    def rule(g: FloatArray) -> list[FloatArray]:
        expanded = g if ax is None else np.expand_dims(g, ax)
        return [np.broadcast_to(expanded / n, v.shape).copy()]

    return _emit(f"reduce_{kind}", (x,), np.asarray(out, dtype=np.float64), rule)


def _reduce_max(x: Array, ax: int | None) -> Array:
    v = x.values
    if ax is None:
        flat_idx = int(np.argmax(v))
        out = np.asarray(v.reshape(-1)[flat_idx])

        def rule_all(g: FloatArray) -> list[FloatArray]:
            grad = np.zeros(v.size)
            grad[flat_idx] = float(g)
            return [grad.reshape(v.shape)]

        return _emit("reduce_max", (x,), out, rule_all)

    idx = np.expand_dims(np.argmax(v, axis=ax), ax)
    out = np.take_along_axis(v, idx, axis=ax).squeeze(ax)

    def rule(g: FloatArray) -> list[FloatArray]:
        grad = np.zeros_like(v)
        np.put_along_axis(grad, idx, np.expand_dims(g, ax), axis=ax)
        return [grad]

    return _emit("reduce_max", (x,), out, rule)


def sum(x: Array, axis: int | None = None) -> Array:
    return reduce(x, axis, "sum")


def mean(x: Array, axis: int | None = None) -> Array:
    return reduce(x, axis, "mean")


def max(x: Array, axis: int | None = None) -> Array:
    return reduce(x, axis, "max")


def mae(a: Array | npt.ArrayLike, b: Array | npt.ArrayLike, mask: npt.ArrayLike | None = None) -> Array:
    """Mean absolute difference, optionally over the ``True`` entries of *mask* only.

    *mask* broadcasts against the operands. An empty mask yields 0.

    :raises ShapeMismatch: If the operands differ in shape.
    """
    x, y = as_array(a), as_array(b)
    if x.shape != y.shape:
        raise ShapeMismatch(
            "mae operands differ in shape", op="mae", target="operands", expected=x.shape, actual=y.shape
        )
    diff = x.values - y.values
    if mask is None:
        n = float(diff.size)
        keep: FloatArray | None = None
        total = np.sum(np.abs(diff)) / n
    else:
        try:
            m = np.broadcast_to(np.asarray(mask, dtype=bool), diff.shape)
        except ValueError:
            raise ShapeMismatch(
                "mask does not align with operands",
                op="mae",
                target="mask",
                expected=diff.shape,
                actual=np.shape(mask),
            ) from None
        n = float(np.count_nonzero(m))
        keep = m.astype(np.float64)
        total = np.sum(np.abs(diff[m])) / n if n > 0 else 0.0

    def rule(g: FloatArray) -> list[FloatArray | None]:
        if n == 0:
            return [None, None]
        s = np.sign(diff) * (float(g) / n)
        if keep is not None:
            s = s * keep
        return [s if x.requires_grad else None, -s if y.requires_grad else None]

    return _emit("mae", (x, y), np.asarray(total, dtype=np.float64), rule)


# endregion


# region: shape manipulation
def _is_basic_index(index: object) -> bool:
    items = index if isinstance(index, tuple) else (index,)
    return all(isinstance(i, (slice, int, np.integer)) or i is Ellipsis or i is None for i in items)


def getitem(x: Array, index: object) -> Array:
    v = x.values
    out = np.array(v[index], dtype=np.float64)  # type: ignore[index]
    basic = _is_basic_index(index)

    def rule(g: FloatArray) -> list[FloatArray]:
        grad = np.zeros_like(v)
        if basic:
            grad[index] += g  # type: ignore[index]
        else:
            np.add.at(grad, index, g)  # type: ignore[arg-type]
        return [grad]

    return _emit("getitem", (x,), out, rule)


def concat(arrays: Sequence[Array | npt.ArrayLike], axis: int = 0) -> Array:
    parts = [as_array(a) for a in arrays]
    try:
        out = np.concatenate([p.values for p in parts], axis=axis)
    except ValueError as exc:
        raise ShapeMismatch(f"cannot concatenate: {exc}", op="concat", target=f"axis {axis}") from None
    bounds = np.cumsum([p.shape[axis] for p in parts])[:-1]

    def rule(g: FloatArray) -> list[FloatArray]:
        return list(np.split(g, bounds, axis=axis))

    return _emit("concat", parts, out, rule)


def reshape(x: Array, shape: tuple[int, ...]) -> Array:
    try:
        out = x.values.reshape(shape)
    except ValueError:
        raise ShapeMismatch("cannot reshape", op="reshape", target="shape", expected=shape, actual=x.shape) from None
    return _emit("reshape", (x,), out, lambda g: [g.reshape(x.shape)])


def frame(x: Array, length: int, hop: int) -> Array:
    """Cut the last axis into frames of *length* samples every *hop* samples.

    Output shape is ``(..., n_frames, length)`` with no padding; trailing
    samples that do not fill a frame are dropped.

    :raises ShapeMismatch: If the signal is shorter than one frame.
    """
    v = x.values
    n = v.shape[-1]
    if n < length:
        raise ShapeMismatch("signal shorter than one frame", op="frame", target="time", expected=length, actual=n)
    n_frames = 1 + (n - length) // hop
    windows = np.lib.stride_tricks.sliding_window_view(v, length, axis=-1)
    out = np.array(windows[..., : (n_frames - 1) * hop + 1 : hop, :])

    def rule(g: FloatArray) -> list[FloatArray]:
        grad = np.zeros_like(v)
        for f in range(n_frames):
            grad[..., f * hop : f * hop + length] += g[..., f, :]
        return [grad]

    return _emit("frame", (x,), out, rule)


# endregion


# region: linear filtering
def lfilter(x: Array, b: npt.ArrayLike, a: npt.ArrayLike) -> Array:
    """Causal IIR filtering along the last axis with fixed coefficients.

    Coefficients are either one filter (1-D ``b``/``a``) applied to every row,
    or a bank (2-D, one filter per row). A bank applied to a 1-D signal fans
    it out to one output row per filter. Coefficients are constants; the
    gradient flows to *x* only, through the time-reversed filter.

    :raises ShapeMismatch: If a filter bank's rows do not match the input rows.
    """
    bb = np.asarray(b, dtype=np.float64)
    aa = np.asarray(a, dtype=np.float64)
    v = x.values
    if bb.ndim == 1:

        def rule_single(g: FloatArray) -> list[FloatArray]:
            return [scipy.signal.lfilter(bb, aa, g[..., ::-1], axis=-1)[..., ::-1]]

        return _emit("lfilter", (x,), scipy.signal.lfilter(bb, aa, v, axis=-1), rule_single)

    rows = bb.shape[0]
    fan_out = v.ndim == 1
    if not fan_out and (v.ndim != 2 or v.shape[0] != rows):
        raise ShapeMismatch(
            "filter bank rows do not match input rows", op="lfilter", target="rows", expected=rows, actual=v.shape
        )
    out = np.empty((rows, v.shape[-1]))
    for r in range(rows):
        out[r] = scipy.signal.lfilter(bb[r], aa[r], v if fan_out else v[r])

    def rule(g: FloatArray) -> list[FloatArray]:
        adj = np.empty_like(g)
        for r in range(rows):
            adj[r] = scipy.signal.lfilter(bb[r], aa[r], g[r, ::-1])[::-1]
        return [adj.sum(axis=0) if fan_out else adj]

    return _emit("lfilter", (x,), out, rule)


# endregion
