"""Neurogram: firing rates on a CF x time grid."""

from __future__ import annotations

import dataclasses
from typing import TYPE_CHECKING

from hearloop._errors import ShapeMismatch

if TYPE_CHECKING:
    from hearloop._types import FloatArray
    from hearloop.adcore import Array
    from hearloop.periphery._cfmap import CFMap


@dataclasses.dataclass(frozen=True, eq=False)
class Neurogram:
    """Instantaneous firing rates (spikes/s), one row per CF in ascending order.

    :param rates: ``[n_channels, n_samples]`` array; may be a differentiable intermediate.
    :param cf_map: CFs of the rows.
    :param sample_rate_hz: Sample rate of the time axis.
    """

    rates: Array
    cf_map: CFMap
    sample_rate_hz: float

    def __post_init__(self) -> None:
        if self.rates.ndim != 2 or self.rates.shape[0] != self.cf_map.n_channels:
            raise ShapeMismatch(
                "rates must be [n_channels, n_samples]",
                op="Neurogram",
                target="channels",
                expected=self.cf_map.n_channels,
                actual=self.rates.shape,
            )

    @property
    def values(self) -> FloatArray:
        return self.rates.values

    @property
    def n_channels(self) -> int:
        return self.rates.shape[0]

    @property
    def n_samples(self) -> int:
        return self.rates.shape[1]

    def with_rates(self, rates: Array) -> Neurogram:
        return Neurogram(rates, self.cf_map, self.sample_rate_hz)
