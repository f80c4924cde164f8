"""Characteristic-frequency maps on the human Greenwood place-frequency function."""

from __future__ import annotations

import dataclasses
import math
from typing import TYPE_CHECKING

import numpy as np

from hearloop._errors import InvalidConfig

if TYPE_CHECKING:
    from collections.abc import Sequence

    from hearloop._types import FloatArray

# Human constants of f = A * (10 ** (a * x) - k), x = relative distance from the apex.
GREENWOOD_A = 165.4
GREENWOOD_ALPHA = 2.1
GREENWOOD_K = 0.88

MIN_CF_HZ = 112.0
MAX_CF_HZ = 12_000.0
DEFAULT_CHANNELS = 201

_RANGE_TOLERANCE = 1e-9


def greenwood_frequency(position: FloatArray | float) -> FloatArray:
    """Frequency (Hz) at relative cochlear *position* (0 = apex, 1 = base)."""
    return np.asarray(GREENWOOD_A * (10.0 ** (GREENWOOD_ALPHA * np.asarray(position)) - GREENWOOD_K))


def greenwood_position(frequency_hz: FloatArray | float) -> FloatArray:
    """Inverse of :func:`greenwood_frequency`."""
    return np.asarray(np.log10(np.asarray(frequency_hz) / GREENWOOD_A + GREENWOOD_K) / GREENWOOD_ALPHA)


@dataclasses.dataclass(frozen=True)
class CFMap:
    """Ascending characteristic frequencies of the model's cochlear channels.

    :param cf_hz: One CF per channel, strictly ascending, within 112 Hz - 12 kHz.
    :raises InvalidConfig: If the frequencies violate the constraints.
    """

    cf_hz: tuple[float, ...]

    def __post_init__(self) -> None:
        cfs = tuple(float(f) for f in self.cf_hz)
        object.__setattr__(self, "cf_hz", cfs)
        if not cfs:
            raise InvalidConfig("CF map is empty", op="CFMap", target="cf_hz")
        lo = MIN_CF_HZ * (1 - _RANGE_TOLERANCE)
        hi = MAX_CF_HZ * (1 + _RANGE_TOLERANCE)
        if cfs[0] < lo or cfs[-1] > hi:
            raise InvalidConfig(
                f"CFs must lie within [{MIN_CF_HZ}, {MAX_CF_HZ}] Hz, got {cfs[0]:.3f}..{cfs[-1]:.3f}",
                op="CFMap",
                target="cf_hz",
            )
        if any(b <= a for a, b in zip(cfs, cfs[1:])):
            raise InvalidConfig("CFs must be strictly ascending", op="CFMap", target="cf_hz")

    @property
    def n_channels(self) -> int:
        return len(self.cf_hz)

    @property
    def frequencies(self) -> FloatArray:
        return np.asarray(self.cf_hz, dtype=np.float64)

    def subset(self, indices: Sequence[int]) -> CFMap:
        """Map restricted to *indices* (ascending, no repeats).

        :raises InvalidConfig: On out-of-range, repeated or unsorted indices.
        """
        idx = list(indices)
        if not idx:
            raise InvalidConfig("channel subset is empty", op="subset", target="cf_subset")
        if any(i < 0 or i >= self.n_channels for i in idx):
            raise InvalidConfig(
                f"channel subset indices must be in [0, {self.n_channels}), got {idx}", op="subset", target="cf_subset"
            )
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise InvalidConfig("channel subset must be strictly ascending", op="subset", target="cf_subset")
        return CFMap(tuple(self.cf_hz[i] for i in idx))

    def __len__(self) -> int:
        return self.n_channels


def greenwood_cf(n: int = DEFAULT_CHANNELS, f_min: float = MIN_CF_HZ, f_max: float = MAX_CF_HZ) -> CFMap:
    """Place *n* CFs uniformly in cochlear position between *f_min* and *f_max*.

    The endpoints are returned exactly.

    :raises InvalidConfig: If ``n < 2`` or the range is empty or non-positive.
    """
    if n < 2:
        raise InvalidConfig(f"need at least 2 channels, got {n}", op="greenwood_cf", target="n")
    if not 0 < f_min < f_max or math.isinf(f_max):
        raise InvalidConfig(f"invalid frequency range [{f_min}, {f_max}]", op="greenwood_cf", target="range")
    positions = np.linspace(greenwood_position(f_min), greenwood_position(f_max), n)
    cfs = greenwood_frequency(positions)
    cfs[0], cfs[-1] = f_min, f_max
    return CFMap(tuple(cfs.tolist()))


def cf_subset_indices(n_channels: int = DEFAULT_CHANNELS, step: int = 10) -> tuple[int, ...]:
    """Every *step*-th channel starting from the first: 21 of 201 for ``step=10``."""
    if step < 1:
        raise InvalidConfig(f"step must be >= 1, got {step}", op="cf_subset_indices", target="step")
    return tuple(range(0, n_channels, step))


def erb_hz(frequency_hz: FloatArray | float) -> FloatArray:
    """Equivalent rectangular bandwidth of the human auditory filter."""
    return np.asarray(24.7 * (4.37e-3 * np.asarray(frequency_hz) + 1.0))
