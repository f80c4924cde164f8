"""Hearing profiles: OHC gain loss per frequency plus auditory-nerve fiber counts."""

from __future__ import annotations

import dataclasses
import json
import math
import re
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from hearloop._errors import DataError, InvalidConfig
from hearloop.periphery._cfmap import greenwood_cf

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable, Mapping

    from hearloop._types import FloatArray, PathLike
    from hearloop.periphery._cfmap import CFMap

SLOPE_START_HZ = 1000.0
SLOPE_END_HZ = 8000.0


@dataclasses.dataclass(frozen=True)
class FiberCounts:
    """Number of fibers of each type feeding one channel of the summed response."""

    H: float = 13.0
    M: float = 3.0
    L: float = 3.0

    def __post_init__(self) -> None:
        for name in ("H", "M", "L"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise InvalidConfig(f"fiber count {name} must be finite and >= 0, got {value}", target="fiber_counts")
            object.__setattr__(self, name, value)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.H, self.M, self.L)


NH_COUNTS = FiberCounts()


@dataclasses.dataclass(frozen=True)
class HearingProfile:
    """A normal or impaired periphery.

    The audiogram is a list of ``(frequency_hz, loss_db)`` anchors. OHC loss
    at a CF is interpolated linearly over log2-frequency between anchors and
    held at the end values outside them; a single anchor means a flat loss and
    no anchors means no loss.

    :param name: Profile name.
    :param audiogram: Anchors sorted by strictly ascending frequency; losses >= 0.
    :param fiber_counts: Fiber weighting of the summed response.
    """

    name: str
    audiogram: tuple[tuple[float, float], ...] = ()
    fiber_counts: FiberCounts = NH_COUNTS

    def __post_init__(self) -> None:
        anchors = tuple((float(f), float(db)) for f, db in self.audiogram)
        object.__setattr__(self, "audiogram", anchors)
        if any(f <= 0 for f, _ in anchors):
            raise InvalidConfig("audiogram frequencies must be > 0", op="HearingProfile", target=self.name)
        if any(b[0] <= a[0] for a, b in zip(anchors, anchors[1:])):
            raise InvalidConfig("audiogram frequencies must ascend strictly", op="HearingProfile", target=self.name)
        if any(db < 0 or not math.isfinite(db) for _, db in anchors):
            raise InvalidConfig("audiogram losses must be finite and >= 0", op="HearingProfile", target=self.name)

    @property
    def has_ohc_loss(self) -> bool:
        return any(db > 0 for _, db in self.audiogram)

    @property
    def max_loss_db(self) -> float:
        return max((db for _, db in self.audiogram), default=0.0)

    def ohc_loss_db(self, cf_map: CFMap) -> FloatArray:
        """Per-CF OHC gain loss in dB."""
        cfs = cf_map.frequencies
        if not self.audiogram:
            return np.zeros_like(cfs)
        freqs = np.log2([f for f, _ in self.audiogram])
        losses = np.array([db for _, db in self.audiogram])
        return np.interp(np.log2(cfs), freqs, losses)

    def to_dict(self) -> dict[str, object]:
        return {
            "name": self.name,
            "audiogram": [[f, db] for f, db in self.audiogram],
            "fiber_counts": dataclasses.asdict(self.fiber_counts),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> HearingProfile:
        """Construct from parsed JSON.

        Accepts either ``audiogram`` anchors or an ``ohc_loss_db`` vector with
        one value per channel of the default 201-channel map (or of the
        ``cf_hz`` list given alongside it).

        :raises InvalidConfig: On unknown keys, conflicting fields or bad values.
        """
        allowed = {"name", "audiogram", "ohc_loss_db", "cf_hz", "fiber_counts"}
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise InvalidConfig(
                f"Unknown keys {unknown} in profile. Allowed keys: {sorted(allowed)}", op="from_dict", target="profile"
            )
        name = str(data.get("name", "custom"))
        if "audiogram" in data and "ohc_loss_db" in data:
            raise InvalidConfig("give either 'audiogram' or 'ohc_loss_db', not both", op="from_dict", target=name)
        try:
            if "ohc_loss_db" in data:
                losses = [float(v) for v in data["ohc_loss_db"]]  # type: ignore[attr-defined]
                raw_cfs = data.get("cf_hz")
                cfs = (
                    [float(v) for v in raw_cfs]  # type: ignore[attr-defined]
                    if raw_cfs is not None
                    else list(greenwood_cf(len(losses)).cf_hz)
                )
                if len(cfs) != len(losses):
                    raise InvalidConfig("'cf_hz' and 'ohc_loss_db' differ in length", op="from_dict", target=name)
                anchors = tuple(zip(cfs, losses))
            else:
                raw_anchors = data.get("audiogram", [])
                anchors = tuple((float(f), float(db)) for f, db in raw_anchors)  # type: ignore[attr-defined]
            counts_raw = data.get("fiber_counts", {})
            if not isinstance(counts_raw, (dict, list, tuple)):
                raise InvalidConfig("'fiber_counts' must be a mapping or [H, M, L]", op="from_dict", target=name)
            counts = FiberCounts(*counts_raw) if isinstance(counts_raw, (list, tuple)) else FiberCounts(**counts_raw)
        except (TypeError, ValueError) as exc:
            raise InvalidConfig(f"invalid profile: {exc}", op="from_dict", target=name) from None
        return cls(name=name, audiogram=anchors, fiber_counts=counts)


def sloping_audiogram(hl_at_8k_db: float, cf_map: CFMap) -> FloatArray:
    """High-frequency sloping loss: 0 up to 1 kHz, rising linearly in octaves to
    *hl_at_8k_db* at 8 kHz, and flat above.

    :raises InvalidConfig: If *hl_at_8k_db* is negative.
    """
    if hl_at_8k_db < 0:
        raise InvalidConfig(f"hl_at_8k_db must be >= 0, got {hl_at_8k_db}", op="sloping_audiogram", target="hl")
    f = cf_map.frequencies
    octaves = np.log2(np.maximum(f, SLOPE_START_HZ) / SLOPE_START_HZ)
    return np.minimum(hl_at_8k_db * octaves / 3.0, hl_at_8k_db)


def sloping_profile(name: str, hl_at_8k_db: float, counts: FiberCounts = NH_COUNTS) -> HearingProfile:
    """Profile whose audiogram equals :func:`sloping_audiogram` at every CF."""
    if hl_at_8k_db < 0:
        raise InvalidConfig(f"hl_at_8k_db must be >= 0, got {hl_at_8k_db}", op="sloping_profile", target=name)
    return HearingProfile(name, ((SLOPE_START_HZ, 0.0), (SLOPE_END_HZ, float(hl_at_8k_db))), counts)


def flat_profile(name: str, loss_db: float, counts: FiberCounts = NH_COUNTS) -> HearingProfile:
    return HearingProfile(name, ((SLOPE_START_HZ, float(loss_db)),), counts)


def synaptopathy_profile(name: str, counts: FiberCounts) -> HearingProfile:
    return HearingProfile(name, (), counts)


def builtin_profiles() -> dict[str, Callable[[], HearingProfile]]:
    """Factories for the named profiles shipped with the package."""
    return {
        "NH": lambda: HearingProfile("NH"),
        "Slope35": lambda: sloping_profile("Slope35", 35.0),
        "Slope25": lambda: sloping_profile("Slope25", 25.0),
        "Flat35": lambda: flat_profile("Flat35", 35.0),
        "CS-7-0-0": lambda: synaptopathy_profile("CS-7-0-0", FiberCounts(7, 0, 0)),
        "CS-13-0-0": lambda: synaptopathy_profile("CS-13-0-0", FiberCounts(13, 0, 0)),
    }


_PATTERNS: tuple[tuple[re.Pattern[str], Callable[[re.Match[str]], HearingProfile]], ...] = (
    (
        re.compile(r"CS-(\d+(?:\.\d+)?)-(\d+(?:\.\d+)?)-(\d+(?:\.\d+)?)"),
        lambda m: synaptopathy_profile(m.group(0), FiberCounts(*(float(g) for g in m.groups()))),
    ),
    (re.compile(r"Slope(\d+(?:\.\d+)?)"), lambda m: sloping_profile(m.group(0), float(m.group(1)))),
    (re.compile(r"Flat(\d+(?:\.\d+)?)"), lambda m: flat_profile(m.group(0), float(m.group(1)))),
)


def profile_from_pattern(name: str) -> HearingProfile | None:
    """Build ``CS-h-m-l``, ``Slope<dB>`` and ``Flat<dB>`` profiles by name, if *name* matches."""
    for pattern, build in _PATTERNS:
        match = pattern.fullmatch(name)
        if match:
            return build(match)
    return None


def combine_profiles(parts: Iterable[HearingProfile]) -> HearingProfile:
    """Merge profiles named ``A+B``: the audiogram of the part that has one,
    fiber counts of the part that changes them.

    :raises InvalidConfig: If two parts both define an audiogram or both change the counts.
    """
    items = list(parts)
    name = "+".join(p.name for p in items)
    audiograms = [p.audiogram for p in items if p.audiogram]
    counts = [p.fiber_counts for p in items if p.fiber_counts != NH_COUNTS]
    if len(audiograms) > 1:
        raise InvalidConfig("more than one part defines an audiogram", op="combine_profiles", target=name)
    if len(counts) > 1:
        raise InvalidConfig("more than one part changes fiber counts", op="combine_profiles", target=name)
    return HearingProfile(name, audiograms[0] if audiograms else (), counts[0] if counts else NH_COUNTS)


def load_profile(path: PathLike) -> HearingProfile:
    """Read a profile JSON document.

    :raises DataError: If the file cannot be read or is not JSON.
    :raises InvalidConfig: If the document is not a valid profile.
    """
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read profile: {exc}", op="load_profile", target=str(p)) from None
    if not isinstance(data, dict):
        raise InvalidConfig("profile document must be a JSON object", op="load_profile", target=str(p))
    return HearingProfile.from_dict(data)
