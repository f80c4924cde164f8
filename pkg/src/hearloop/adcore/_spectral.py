"""Differentiable DFT, magnitude spectrum and short-time Fourier transform."""

from __future__ import annotations

import functools
from typing import TYPE_CHECKING

import numpy as np
import scipy.signal

from hearloop._errors import InvalidConfig, ShapeMismatch
from hearloop.adcore._ops import _emit, frame, mul, reshape

if TYPE_CHECKING:
    from hearloop._types import FloatArray
    from hearloop.adcore._array import Array

DEFAULT_WINDOW = 2048


def _require_even(op: str, n: int) -> None:
    if n % 2:
        raise ShapeMismatch("transform length must be even", op=op, target="time", expected="even", actual=n)


def rfft_parts(x: Array) -> Array:
    """Real DFT along the last axis, returned as stacked ``(real, imag)`` parts.

    Output shape is ``(..., 2, n // 2 + 1)``.
    """
    n = x.shape[-1]
    _require_even("rfft", n)
    spec = np.fft.rfft(x.values, axis=-1)
    out = np.stack([spec.real, spec.imag], axis=-2)

    def rule(g: FloatArray) -> list[FloatArray]:
        grad = g[..., 0, :] + 1j * g[..., 1, :]
        grad[..., 1:-1] *= 0.5
        return [n * np.fft.irfft(grad, n=n, axis=-1)]

    return _emit("rfft", (x,), out, rule)


def magnitude(parts: Array, *, squared: bool = False) -> Array:
    """Magnitude (or power) of ``(real, imag)`` parts stacked on axis -2.

    The gradient of the plain magnitude is taken as 0 where the magnitude is 0.
    """
    re = parts.values[..., 0, :]
    im = parts.values[..., 1, :]
    if squared:
        out = re * re + im * im

        def rule_sq(g: FloatArray) -> list[FloatArray]:
            return [np.stack([2.0 * re * g, 2.0 * im * g], axis=-2)]

        return _emit("power_spectrum", (parts,), out, rule_sq)

    mag = np.hypot(re, im)

    def rule(g: FloatArray) -> list[FloatArray]:
        nonzero = mag > 0
        inv = np.divide(g, mag, out=np.zeros_like(mag), where=nonzero)
        return [np.stack([re * inv, im * inv], axis=-2)]

    return _emit("magnitude", (parts,), mag, rule)


def fft_mag(signal: Array) -> Array:
    """One-sided magnitude spectrum (``T // 2 + 1`` bins) of an even-length signal."""
    return magnitude(rfft_parts(signal))


def bin_frequencies(n: int, sample_rate_hz: float) -> FloatArray:
    """Frequency in Hz of each one-sided DFT bin: bin ``k`` maps to ``k * fs / n``."""
    return np.arange(n // 2 + 1) * (sample_rate_hz / n)


@functools.lru_cache(maxsize=8)
def hann_window(length: int) -> FloatArray:
    """Periodic Hann window of *length* samples (read-only)."""
    win: FloatArray = scipy.signal.get_window("hann", length, fftbins=True)
    win.setflags(write=False)
    return win


def stft_mag(
    signal: Array,
    window_len: int = DEFAULT_WINDOW,
    hop: int | None = None,
    *,
    squared: bool = False,
    complex_out: bool = False,
) -> Array:
    """Hann-windowed STFT along the last axis of *signal*.

    Frames start every *hop* samples (half a window by default) without
    padding. Returns magnitudes, powers when *squared*, or the real parts
    followed by the imaginary parts when *complex_out*. Output shape is
    ``(..., frames, bins)`` or ``(..., frames, 2 * bins)``.

    :raises ShapeMismatch: If the signal is shorter than one window.
    :raises InvalidConfig: If both *squared* and *complex_out* are requested.
    """
    if squared and complex_out:
        raise InvalidConfig("complex STFT output cannot be squared", op="stft_mag", target="squared")
    _require_even("stft_mag", window_len)
    step = hop if hop is not None else window_len // 2
    if step <= 0:
        raise InvalidConfig("hop must be positive", op="stft_mag", target="hop")
    if signal.shape[-1] < window_len:
        raise ShapeMismatch(
            "signal shorter than the STFT window",
            op="stft_mag",
            target="time",
            expected=window_len,
            actual=signal.shape[-1],
        )
    frames = mul(frame(signal, window_len, step), hann_window(window_len))
    parts = rfft_parts(frames)
    if complex_out:
        lead = parts.shape[:-2]
        return reshape(parts, (*lead, 2 * parts.shape[-1]))
    return magnitude(parts, squared=squared)
