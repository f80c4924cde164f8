"""Registry: named hearing profiles and loss presets."""

from __future__ import annotations

import json
from pathlib import Path
from typing import TYPE_CHECKING

from hearloop._errors import DataError, InvalidConfig, UnknownPreset
from hearloop._losses import LossSpec, builtin_loss_presets
from hearloop.periphery import builtin_profiles, combine_profiles, load_profile, profile_from_pattern

if TYPE_CHECKING:
    from collections.abc import Callable

    from hearloop.periphery import HearingProfile

# Global registries: map names to profile factories and loss specs.
_PROFILE_FACTORIES: dict[str, Callable[[], HearingProfile]] = {}
_LOSS_PRESETS: dict[str, LossSpec] = {}


def register_profile(name: str, factory: Callable[[], HearingProfile]) -> None:
    """Register a hearing profile factory under *name*.

    :param name: The profile name (e.g. ``"Slope35"``).
    :param factory: Zero-argument callable returning the profile.
    """
    _PROFILE_FACTORIES[name] = factory


def register_loss_preset(name: str, spec: LossSpec) -> None:
    """Register a loss preset.

    :raises InvalidConfig: If *spec* is invalid.
    """
    spec.validate()
    _LOSS_PRESETS[name] = spec


def _register_builtin_presets() -> None:
    """Register the built-in profiles and loss presets."""
    for name, factory in builtin_profiles().items():
        if name not in _PROFILE_FACTORIES:
            register_profile(name, factory)
    for name, spec in builtin_loss_presets().items():
        if name not in _LOSS_PRESETS:
            register_loss_preset(name, spec)


def available_profiles() -> list[str]:
    _register_builtin_presets()
    return sorted(_PROFILE_FACTORIES)


def available_loss_presets() -> list[str]:
    _register_builtin_presets()
    return sorted(_LOSS_PRESETS)


def _single_profile(name: str) -> HearingProfile | None:
    if name in _PROFILE_FACTORIES:
        return _PROFILE_FACTORIES[name]()
    return profile_from_pattern(name)


def get_profile(name: str) -> HearingProfile:
    """Resolve a profile name.

    Tried in order: a registered name, a ``CS-h-m-l``/``Slope<dB>``/``Flat<dB>``
    pattern, an ``A+B`` combination of those, then a path to a profile JSON file.

    :raises UnknownPreset: If nothing matches.
    :raises InvalidConfig: If a combination is contradictory.
    """
    _register_builtin_presets()
    profile = _single_profile(name)
    if profile is not None:
        return profile
    if "+" in name:
        parts = [_single_profile(part) for part in name.split("+")]
        if all(p is not None for p in parts):
            return combine_profiles(p for p in parts if p is not None)
    if name.endswith(".json") or Path(name).is_file():
        return load_profile(name)
    available = available_profiles()
    raise UnknownPreset(
        f"Unknown profile '{name}'. Available profiles: {available} (or CS-h-m-l, Slope<dB>, Flat<dB>, A+B)",
        op="get_profile",
        target=name,
        available=available,
    )


def get_loss_preset(name: str) -> LossSpec:
    """Resolve a loss preset name or a path to a loss JSON file.

    :raises UnknownPreset: If the name is not registered and is not a file.
    :raises DataError: If the file cannot be read.
    :raises InvalidConfig: If the file does not describe a valid loss.
    """
    _register_builtin_presets()
    if name in _LOSS_PRESETS:
        return _LOSS_PRESETS[name]
    if name.endswith(".json") or Path(name).is_file():
        p = Path(name)
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read loss file: {exc}", op="get_loss_preset", target=str(p)) from None
        if not isinstance(data, dict):
            raise InvalidConfig("loss document must be a JSON object", op="get_loss_preset", target=str(p))
        return LossSpec.from_dict(data)
    available = available_loss_presets()
    raise UnknownPreset(
        f"Unknown loss preset '{name}'. Available presets: {available}",
        op="get_loss_preset",
        target=name,
        available=available,
    )
