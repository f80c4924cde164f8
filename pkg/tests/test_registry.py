"""Tests for profile and loss-preset resolution."""

from __future__ import annotations

import json
from typing import TYPE_CHECKING

import pytest

from hearloop import _registry
from hearloop._errors import DataError, InvalidConfig, UnknownPreset
from hearloop._losses import LossKind, LossSpec, LossTerm
from hearloop._registry import (
    available_loss_presets,
    available_profiles,
    get_loss_preset,
    get_profile,
    register_loss_preset,
    register_profile,
)
from hearloop.periphery import FiberCounts, HearingProfile

if TYPE_CHECKING:
    from pathlib import Path


@pytest.fixture
def isolated_registry(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr(_registry, "_PROFILE_FACTORIES", dict(_registry._PROFILE_FACTORIES))
    monkeypatch.setattr(_registry, "_LOSS_PRESETS", dict(_registry._LOSS_PRESETS))


class TestProfiles:
    """Registered names, patterns, combinations and files."""

    def test_builtins_listed(self) -> None:
        names = available_profiles()
        for name in ("NH", "Slope35", "Slope25", "Flat35", "CS-7-0-0", "CS-13-0-0"):
            assert name in names

    def test_pattern(self) -> None:
        assert get_profile("CS-10-2-1").fiber_counts == FiberCounts(10, 2, 1)

    def test_combination(self) -> None:
        profile = get_profile("Slope35+CS-7-0-0")
        assert profile.max_loss_db == 35.0
        assert profile.fiber_counts == FiberCounts(7, 0, 0)

    def test_file(self, tmp_path: Path) -> None:
        path = tmp_path / "mine.json"
        path.write_text(json.dumps({"name": "mine", "audiogram": [[2000, 20]]}), encoding="utf-8")
        assert get_profile(str(path)).name == "mine"

    def test_unknown(self) -> None:
        with pytest.raises(UnknownPreset) as exc_info:
            get_profile("Steep99x")
        assert "NH" in exc_info.value.available
        assert exc_info.value.target == "Steep99x"

    def test_unknown_combination_part(self) -> None:
        with pytest.raises(UnknownPreset):
            get_profile("Slope35+Mystery")

    @pytest.mark.usefixtures("isolated_registry")
    def test_register(self) -> None:
        register_profile("Mine", lambda: HearingProfile("Mine", ((4000.0, 10.0),)))
        assert "Mine" in available_profiles()
        assert get_profile("Mine").max_loss_db == 10.0


class TestLossPresets:
    """The eight main presets plus variants, and loss files."""

    def test_main_presets(self) -> None:
        names = available_loss_presets()
        for name in ("L_r", "L_rR", "L_rrp", "L_rrpRp", "L_r2", "L_r2R2", "L_r2rp2", "L_r2rp2Rp2"):
            assert name in names

    def test_preset_weights(self) -> None:
        assert get_loss_preset("L_rrpRp").weights() == {"l_r": 1.0, "l_X": 0.5, "l_rp": 0.1, "l_Rp": 0.02}
        assert get_loss_preset("L_r2").weights() == {"l_r2": 1.0, "l_X": 40.0}

    def test_unknown(self) -> None:
        with pytest.raises(UnknownPreset) as exc_info:
            get_loss_preset("L_zz")
        assert "L_r" in exc_info.value.available

    def test_file(self, tmp_path: Path) -> None:
        path = tmp_path / "loss.json"
        spec = LossSpec((LossTerm(LossKind.TIME_POPULATION, 2.0),), stft_window=1024)
        path.write_text(json.dumps(spec.to_dict()), encoding="utf-8")
        assert get_loss_preset(str(path)) == spec

    def test_unreadable_file(self, tmp_path: Path) -> None:
        path = tmp_path / "loss.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(DataError):
            get_loss_preset(str(path))

    def test_invalid_file(self, tmp_path: Path) -> None:
        path = tmp_path / "loss.json"
        path.write_text(json.dumps({"terms": [{"kind": "time_channels", "weight": -1}]}), encoding="utf-8")
        with pytest.raises(InvalidConfig):
            get_loss_preset(str(path))

    @pytest.mark.usefixtures("isolated_registry")
    def test_register_validates(self) -> None:
        with pytest.raises(InvalidConfig):
            register_loss_preset("empty", LossSpec(()))
        register_loss_preset("pop", LossSpec((LossTerm(LossKind.TIME_POPULATION),)))
        assert get_loss_preset("pop").labels == ("l_rp",)
