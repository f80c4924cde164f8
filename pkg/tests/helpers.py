"""Numerical oracles and signal fixtures shared by the test suite."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import soundfile as sf

from hearloop import adcore as ad
from hearloop.periphery import P_REF_PA

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence
    from pathlib import Path

    from hearloop._types import FloatArray


def directional_check(
    fn: Callable[..., ad.Array],
    inputs: Sequence[FloatArray],
    *,
    h: float = 1e-6,
    seed: int = 0,
) -> tuple[float, float]:
    """Compare the tape gradient of a scalar *fn* with a central finite difference.

    A random direction ``d`` is drawn for every input; the function returns
    ``(analytic, numeric)`` estimates of the directional derivative
    ``sum_i <grad_i, d_i>``.
    """
    rng = np.random.default_rng(seed)
    leaves = [ad.Array(v, requires_grad=True) for v in inputs]
    with ad.Tape():
        out = fn(*leaves)
    ad.backward(out)
    directions = [rng.standard_normal(np.shape(v)) for v in inputs]
    analytic = float(sum(np.sum(leaf.grad * d) for leaf, d in zip(leaves, directions)))

    def at(step: float) -> float:
        shifted = [ad.Array(np.asarray(v) + step * d) for v, d in zip(inputs, directions)]
        return fn(*shifted).item()

    numeric = (at(h) - at(-h)) / (2.0 * h)
    return analytic, numeric


def assert_gradients_match(
    fn: Callable[..., ad.Array], inputs: Sequence[FloatArray], *, rtol: float = 1e-4, h: float = 1e-6
) -> None:
    analytic, numeric = directional_check(fn, inputs, h=h)
    assert abs(analytic - numeric) <= rtol * max(abs(numeric), 1e-8), (analytic, numeric)


def dft_oracle(x: FloatArray) -> np.ndarray:
    """Dense O(N^2) one-sided DFT."""
    n = x.size
    k = np.arange(n // 2 + 1)[:, None]
    t = np.arange(n)[None, :]
    return np.exp(-2j * np.pi * k * t / n) @ x


def speech_like(seconds: float, rate: int, seed: int = 0) -> FloatArray:
    """Harmonic complex with a syllabic envelope and a little noise, peak 0.5."""
    rng = np.random.default_rng(seed)
    t = np.arange(round(seconds * rate)) / rate
    f0 = 110.0 + 20.0 * seed
    voiced = sum(np.sin(2 * np.pi * k * f0 * t) / k for k in range(1, 12) if k * f0 < rate / 2)
    envelope = 0.5 * (1 - np.cos(2 * np.pi * 4.0 * t))
    x = envelope * voiced + 0.05 * rng.standard_normal(t.size)
    return 0.5 * x / np.max(np.abs(x))


def write_test_wav(path: Path, signal: FloatArray, rate: int, subtype: str = "PCM_16") -> Path:
    sf.write(str(path), signal, rate, subtype=subtype)
    return path


def tone(freq_hz: float, level_db: float, n: int, rate: float = 20_000.0) -> FloatArray:
    """Sinusoid of *level_db* dB SPL, *n* samples long."""
    amplitude = P_REF_PA * np.sqrt(2.0) * 10.0 ** (level_db / 20.0)
    return amplitude * np.sin(2 * np.pi * freq_hz * np.arange(n) / rate)
