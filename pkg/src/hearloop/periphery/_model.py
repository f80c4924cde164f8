"""Periphery: the full frozen chain for one hearing profile."""

from __future__ import annotations

import hashlib
import json
from typing import TYPE_CHECKING

import numpy as np

from hearloop import adcore as ad
from hearloop._errors import InvalidConfig, ShapeMismatch
from hearloop.periphery._cfmap import greenwood_cf
from hearloop.periphery._config import FIBER_TYPES, PeripheryConfig
from hearloop.periphery._neurogram import Neurogram
from hearloop.periphery._stages import (
    _weighted_sum,
    anf_stage,
    cochlear_filter_coefficients,
    cochlear_response,
    ihc_stage,
    middle_ear,
    middle_ear_coefficients,
)

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy.typing as npt

    from hearloop.periphery._cfmap import CFMap
    from hearloop.periphery._config import FiberType
    from hearloop.periphery._profile import HearingProfile


class Periphery:
    """Middle ear, cochlea, IHC and three ANF populations for one profile.

    The model has no trainable state; :meth:`simulate` is a pure function of
    its input and may be called from several threads on distinct signals.

    :param profile: Hearing profile (OHC loss and fiber counts).
    :param config: Stage constants; defaults to :class:`PeripheryConfig`.
    :param cf_map: Channel CFs; defaults to 201 Greenwood-spaced channels.
    :raises InvalidConfig: If the configuration is invalid or the profile's
        loss exceeds the model's maximum active gain.
    """

    def __init__(
        self,
        profile: HearingProfile,
        config: PeripheryConfig | None = None,
        cf_map: CFMap | None = None,
    ) -> None:
        self.profile = profile
        self.config = config or PeripheryConfig()
        self.config.validate()
        self.cf_map = cf_map or greenwood_cf()
        self._loss_db = profile.ohc_loss_db(self.cf_map)
        if np.any(self._loss_db > self.config.max_active_gain_db):
            raise InvalidConfig(
                f"profile loss {self._loss_db.max():.1f} dB exceeds the maximum active gain "
                f"{self.config.max_active_gain_db} dB",
                op="Periphery",
                target=profile.name,
            )
        self._b, self._a = cochlear_filter_coefficients(self.cf_map.frequencies, self.config)

    def __repr__(self) -> str:
        return f"Periphery(profile={self.profile.name!r}, channels={self.cf_map.n_channels})"

    @property
    def output_trim(self) -> tuple[int, int]:
        return self.config.context_left, self.config.context_right

    def _check_length(self, x: ad.Array) -> None:
        if x.ndim != 1:
            raise ShapeMismatch("signal must be 1-D", op="simulate", target="signal rank", expected=1, actual=x.ndim)
        n = x.shape[0]
        block = self.config.block_size
        if n % block:
            raise ShapeMismatch(
                "signal length must be a multiple of the block size",
                op="simulate",
                target="time",
                expected=f"multiple of {block}",
                actual=n,
            )
        left, right = self.output_trim
        if n <= left + right:
            raise ShapeMismatch(
                "signal does not contain the required context",
                op="simulate",
                target="context",
                expected=f"> {left + right}",
                actual=n,
            )

    def _indices(self, cf_subset: Sequence[int] | None) -> list[int]:
        if cf_subset is None:
            return list(range(self.cf_map.n_channels))
        idx = [int(i) for i in cf_subset]
        self.cf_map.subset(idx)
        return idx

    def simulate_fibers(
        self, signal: ad.Array | npt.ArrayLike, cf_subset: Sequence[int] | None = None
    ) -> dict[FiberType, ad.Array]:
        """Untrimmed ``[CF, T]`` rates of every fiber type."""
        x = ad.as_array(signal)
        idx = self._indices(cf_subset)
        ihc = self._ihc(x, idx)
        return {kind: anf_stage(ihc, kind, self.config) for kind in FIBER_TYPES}

    def _ihc(self, x: ad.Array, idx: list[int]) -> ad.Array:
        bm = cochlear_response(
            middle_ear(x, self.config), self._loss_db[idx], (self._b[idx], self._a[idx]), self.config
        )
        return ihc_stage(bm, self.config)

    def simulate(self, signal: ad.Array | npt.ArrayLike, cf_subset: Sequence[int] | None = None) -> Neurogram:
        """Summed AN response on *cf_subset* (all channels by default).

        The first ``context_left`` and last ``context_right`` samples are
        trimmed from the time axis. Fiber types with a zero count are skipped,
        which leaves the summed response unchanged.

        :raises ShapeMismatch: If the length is not a multiple of the block
            size or leaves nothing after trimming the context.
        :raises InvalidConfig: On out-of-range, repeated or unsorted channel indices.
        """
        x = ad.as_array(signal)
        self._check_length(x)
        idx = self._indices(cf_subset)
        ihc = self._ihc(x, idx)
        counts = self.profile.fiber_counts
        rates: dict[str, ad.Array] = {}
        zero: ad.Array | None = None
        for kind, count in zip(FIBER_TYPES, counts.as_tuple()):
            if count:
                rates[kind] = anf_stage(ihc, kind, self.config)
            else:
                zero = zero if zero is not None else ad.Array(np.zeros(ihc.shape))
                rates[kind] = zero
        total = _weighted_sum(rates["H"], rates["M"], rates["L"], counts)
        left, right = self.output_trim
        trimmed = ad.getitem(total, (slice(None), slice(left, x.shape[0] - right)))
        return Neurogram(trimmed, self.cf_map.subset(idx), self.config.sample_rate_hz)

    def fingerprint(self) -> str:
        """SHA-256 over configuration, profile, CFs and filter coefficients."""
        h = hashlib.sha256()
        h.update(self.config.fingerprint_key().encode())
        h.update(json.dumps(self.profile.to_dict(), sort_keys=True).encode())
        h.update(np.asarray(self.cf_map.cf_hz).tobytes())
        h.update(self._loss_db.tobytes())
        h.update(self._b.tobytes())
        h.update(self._a.tobytes())
        for arr in middle_ear_coefficients(self.config):
            h.update(arr.tobytes())
        return h.hexdigest()


def simulate(
    signal: ad.Array | npt.ArrayLike,
    profile: HearingProfile,
    cf_subset: Sequence[int] | None = None,
    *,
    config: PeripheryConfig | None = None,
    cf_map: CFMap | None = None,
) -> Neurogram:
    """One-shot :meth:`Periphery.simulate`."""
    return Periphery(profile, config, cf_map).simulate(signal, cf_subset)
