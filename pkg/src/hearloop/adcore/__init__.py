"""Reverse-mode automatic differentiation over float64 arrays, plus Adam.

Operations record onto the innermost active :class:`Tape` when one of their
inputs requires gradients::

    w = Array(np.ones(3), requires_grad=True)
    with Tape():
        loss = mae(mul(w, x), target)
    backward(loss)
    adam_step({"w": w}, state)
"""

from hearloop.adcore._adam import AdamState, adam_step
from hearloop.adcore._array import Array, Tape, TapeRecord, active_tape, as_array, backward, zero_grad
from hearloop.adcore._conv import conv1d, conv1d_transposed, prelu
from hearloop.adcore._ops import (
    abs,
    add,
    concat,
    div,
    exp,
    frame,
    getitem,
    lfilter,
    log,
    log10,
    mae,
    max,
    mean,
    mul,
    power,
    reduce,
    relu_smooth,
    reshape,
    scale,
    sigmoid,
    smooth_abs,
    sqrt,
    square,
    sub,
    sum,
    tanh,
)
from hearloop.adcore._spectral import bin_frequencies, fft_mag, hann_window, magnitude, rfft_parts, stft_mag

__all__ = [
    # Recording
    "Array",
    "Tape",
    "TapeRecord",
    "active_tape",
    "as_array",
    "backward",
    "zero_grad",
    # Elementwise
    "add",
    "sub",
    "mul",
    "div",
    "scale",
    "square",
    "abs",
    "relu_smooth",
    "smooth_abs",
    "sqrt",
    "power",
    "exp",
    "log",
    "log10",
    "tanh",
    "sigmoid",
    # Reductions & losses
    "reduce",
    "sum",
    "mean",
    "max",
    "mae",
    # Shape
    "getitem",
    "concat",
    "reshape",
    "frame",
    # Filtering & spectra
    "lfilter",
    "rfft_parts",
    "magnitude",
    "fft_mag",
    "stft_mag",
    "bin_frequencies",
    "hann_window",
    # Convolution
    "conv1d",
    "conv1d_transposed",
    "prelu",
    # Optimizer
    "AdamState",
    "adam_step",
]
