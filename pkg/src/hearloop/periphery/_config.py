"""Configuration model for the surrogate periphery."""

from __future__ import annotations

import dataclasses
import math
import types
from typing import TYPE_CHECKING, Literal

from hearloop._errors import InvalidConfig

if TYPE_CHECKING:
    from collections.abc import Mapping

FiberType = Literal["H", "M", "L"]
FIBER_TYPES: tuple[FiberType, ...] = ("H", "M", "L")

P_REF_PA = 2e-5
"""Reference pressure for dB SPL."""


def _reject_unknown(data: Mapping[str, object], allowed: set[str], where: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise InvalidConfig(
            f"Unknown keys {unknown} in {where}. Allowed keys: {sorted(allowed)}", op="from_dict", target=where
        )


@dataclasses.dataclass(frozen=True)
class FiberParams:
    """Rate-level and adaptation constants of one auditory-nerve fiber type.

    :param spont_rate: Spontaneous rate in spikes/s.
    :param max_rate: Onset (unadapted) saturation rate in spikes/s.
    :param threshold_db: Drive level, in dB re ``drive_ref``, at the rate-level midpoint.
    :param width_db: Slope parameter of the sigmoidal rate-level function, in dB.
    :param tau_fast_s: Rapid adaptation time constant.
    :param tau_slow_s: Short-term adaptation time constant.
    :param k_fast: Strength of rapid adaptation.
    :param k_slow: Strength of short-term adaptation.
    """

    spont_rate: float
    max_rate: float
    threshold_db: float
    width_db: float
    tau_fast_s: float = 0.004
    tau_slow_s: float = 0.06
    k_fast: float = 1.0
    k_slow: float = 0.5

    def validate(self, name: str = "fiber") -> None:
        if self.spont_rate < 0 or self.max_rate <= self.spont_rate:
            raise InvalidConfig(
                f"{name}: need 0 <= spont_rate < max_rate, got {self.spont_rate}, {self.max_rate}",
                op="validate",
                target=name,
            )
        if self.width_db <= 0:
            raise InvalidConfig(f"{name}: width_db must be > 0", op="validate", target=name)
        if self.tau_fast_s <= 0 or self.tau_slow_s <= 0:
            raise InvalidConfig(f"{name}: adaptation time constants must be > 0", op="validate", target=name)
        if self.k_fast < 0 or self.k_slow < 0:
            raise InvalidConfig(f"{name}: adaptation strengths must be >= 0", op="validate", target=name)

    @classmethod
    def from_dict(cls, data: Mapping[str, object], name: str = "fiber") -> FiberParams:
        allowed = {f.name for f in dataclasses.fields(cls)}
        _reject_unknown(data, allowed, name)
        try:
            params = cls(**{k: float(v) for k, v in data.items()})  # type: ignore[arg-type]
        except TypeError as exc:
            raise InvalidConfig(f"{name}: {exc}", op="from_dict", target=name) from None
        params.validate(name)
        return params


def _default_fibers() -> dict[str, FiberParams]:
    return {
        "H": FiberParams(spont_rate=70.0, max_rate=300.0, threshold_db=20.0, width_db=3.0),
        "M": FiberParams(spont_rate=10.0, max_rate=250.0, threshold_db=32.0, width_db=3.0),
        "L": FiberParams(spont_rate=0.1, max_rate=200.0, threshold_db=42.0, width_db=2.5),
    }


@dataclasses.dataclass(frozen=True)
class PeripheryConfig:
    """Stage constants of the surrogate periphery.

    Defaults reproduce a 20 kHz model whose peak active gain is 60 dB, whose
    compression sets in around 30 dB SPL and whose fiber types are spaced
    about 10 dB apart in threshold.

    :param sample_rate_hz: Model sample rate.
    :param middle_ear_band_hz: Pass band of the Butterworth middle-ear filter.
    :param middle_ear_order: Butterworth order of the middle-ear filter.
    :param erb_scale: Cochlear filter bandwidth as a multiple of the ERB at CF.
    :param max_design_ratio: Filters for CFs above this fraction of the sample
        rate are designed at the cap (only relevant below 26.7 kHz sampling).
    :param max_active_gain_db: Small-signal gain of the active path with no OHC loss.
    :param compression_exponent: Input-output exponent of the active path far above the knee.
    :param knee_db_spl: Level of an on-CF tone at which compression sets in.
    :param passive_gain_db: Gain of the linear passive path.
    :param rectifier_eps: Smoothing scale of the IHC rectifier, in pascals of basilar-membrane drive.
    :param rectifier_asymmetry: Excess gain of the depolarizing half-wave, in [0, 1).
    :param ihc_cutoff_hz: IHC membrane lowpass cutoff.
    :param ihc_rest: Resting IHC output.
    :param drive_ref: IHC output (above rest) that corresponds to 0 dB fiber drive.
    :param fibers: Fiber constants keyed by ``"H"``, ``"M"`` and ``"L"``; held read-only.
    :param context_left: Leading samples trimmed from every simulated response.
    :param context_right: Trailing samples trimmed from every simulated response.
    :param block_size: Input lengths must be a multiple of this.
    """

    sample_rate_hz: float = 20_000.0
    middle_ear_band_hz: tuple[float, float] = (400.0, 6000.0)
    middle_ear_order: int = 1
    erb_scale: float = 1.0
    max_design_ratio: float = 0.45
    max_active_gain_db: float = 60.0
    compression_exponent: float = 0.25
    knee_db_spl: float = 30.0
    passive_gain_db: float = 0.0
    rectifier_eps: float = 5e-3
    rectifier_asymmetry: float = 0.5
    ihc_cutoff_hz: float = 1000.0
    ihc_rest: float = 0.05
    drive_ref: float = 0.01
    fibers: Mapping[str, FiberParams] = dataclasses.field(default_factory=_default_fibers)
    context_left: int = 7936
    context_right: int = 256
    block_size: int = 16384

    def __post_init__(self) -> None:
        object.__setattr__(self, "fibers", types.MappingProxyType(dict(self.fibers)))

    def __hash__(self) -> int:
        return hash(self.fingerprint_key())

    def fiber(self, kind: FiberType) -> FiberParams:
        return self.fibers[kind]

    @property
    def knee_amplitude(self) -> float:
        """Peak amplitude (Pa) of a sinusoid at ``knee_db_spl``."""
        return P_REF_PA * math.sqrt(2.0) * 10.0 ** (self.knee_db_spl / 20.0)

    def validate(self) -> None:
        """Check ranges and internal consistency.

        :raises InvalidConfig: On the first violated constraint.
        """
        if self.sample_rate_hz <= 0:
            raise InvalidConfig("sample_rate_hz must be > 0", op="validate", target="sample_rate_hz")
        lo, hi = self.middle_ear_band_hz
        if not 0 < lo < hi < self.sample_rate_hz / 2:
            raise InvalidConfig(
                f"middle_ear_band_hz must satisfy 0 < low < high < Nyquist, got {self.middle_ear_band_hz}",
                op="validate",
                target="middle_ear_band_hz",
            )
        if self.middle_ear_order < 1:
            raise InvalidConfig("middle_ear_order must be >= 1", op="validate", target="middle_ear_order")
        if self.erb_scale <= 0:
            raise InvalidConfig("erb_scale must be > 0", op="validate", target="erb_scale")
        if not 0 < self.max_design_ratio < 0.5:
            raise InvalidConfig("max_design_ratio must be in (0, 0.5)", op="validate", target="max_design_ratio")
        if not 0 < self.compression_exponent <= 1:
            raise InvalidConfig(
                f"compression_exponent must be in (0, 1], got {self.compression_exponent}",
                op="validate",
                target="compression_exponent",
            )
        if self.max_active_gain_db < 35.0:
            raise InvalidConfig(
                f"max_active_gain_db must be >= 35 dB, got {self.max_active_gain_db}",
                op="validate",
                target="max_active_gain_db",
            )
        if self.rectifier_eps <= 0 or not 0 <= self.rectifier_asymmetry < 1:
            raise InvalidConfig(
                "rectifier_eps must be > 0 and rectifier_asymmetry in [0, 1)", op="validate", target="rectifier"
            )
        if not 0 < self.ihc_cutoff_hz < self.sample_rate_hz / 2:
            raise InvalidConfig("ihc_cutoff_hz must be in (0, Nyquist)", op="validate", target="ihc_cutoff_hz")
        if self.ihc_rest < 0 or self.drive_ref <= 0:
            raise InvalidConfig("ihc_rest must be >= 0 and drive_ref > 0", op="validate", target="ihc_rest")
        if set(self.fibers) != set(FIBER_TYPES):
            raise InvalidConfig(
                f"fibers must define exactly {list(FIBER_TYPES)}, got {sorted(self.fibers)}",
                op="validate",
                target="fibers",
            )
        for kind, params in self.fibers.items():
            params.validate(f"fibers.{kind}")
        if self.context_left < 0 or self.context_right < 0:
            raise InvalidConfig("context lengths must be >= 0", op="validate", target="context")
        if self.block_size < 1:
            raise InvalidConfig("block_size must be >= 1", op="validate", target="block_size")

    def to_dict(self) -> dict[str, object]:
        data: dict[str, object] = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        data["middle_ear_band_hz"] = list(self.middle_ear_band_hz)
        data["fibers"] = {kind: dataclasses.asdict(params) for kind, params in self.fibers.items()}
        return data

    def fingerprint_key(self) -> str:
        """Canonical text form used for hashing."""
        return repr(sorted(self.to_dict().items(), key=lambda kv: kv[0]))

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> PeripheryConfig:
        """Construct from a plain dict, overriding defaults key by key.

        :raises InvalidConfig: On unknown keys or invalid values.
        """
        allowed = {f.name for f in dataclasses.fields(cls)}
        _reject_unknown(data, allowed, "periphery")
        kwargs: dict[str, object] = dict(data)
        if "middle_ear_band_hz" in kwargs:
            band = kwargs["middle_ear_band_hz"]
            if not isinstance(band, (list, tuple)) or len(band) != 2:
                raise InvalidConfig(
                    "middle_ear_band_hz must be a [low, high] pair", op="from_dict", target="middle_ear_band_hz"
                )
            kwargs["middle_ear_band_hz"] = (float(band[0]), float(band[1]))
        if "fibers" in kwargs:
            raw = kwargs["fibers"]
            if not isinstance(raw, dict):
                raise InvalidConfig("fibers must be a mapping", op="from_dict", target="fibers")
            fibers = _default_fibers()
            for kind, params in raw.items():
                if kind not in FIBER_TYPES:
                    raise InvalidConfig(
                        f"Unknown fiber type {kind!r}. Allowed: {list(FIBER_TYPES)}", op="from_dict", target="fibers"
                    )
                if not isinstance(params, dict):
                    raise InvalidConfig(f"fibers.{kind} must be a mapping", op="from_dict", target="fibers")
                merged = {**dataclasses.asdict(fibers[kind]), **params}
                fibers[kind] = FiberParams.from_dict(merged, name=f"fibers.{kind}")
            kwargs["fibers"] = fibers
        try:
            config = cls(**kwargs)  # type: ignore[arg-type]
        except TypeError as exc:
            raise InvalidConfig(f"invalid periphery config: {exc}", op="from_dict", target="periphery") from None
        config.validate()
        return config
