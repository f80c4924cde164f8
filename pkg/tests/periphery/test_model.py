"""Tests for the full periphery chain."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from hearloop import adcore as ad
from hearloop._errors import InvalidConfig, ShapeMismatch
from hearloop.periphery import (
    FIBER_TYPES,
    FiberCounts,
    FiberParams,
    HearingProfile,
    Neurogram,
    Periphery,
    PeripheryConfig,
    builtin_profiles,
    cochlear_stage,
    greenwood_cf,
    ihc_stage,
    population_response,
    simulate,
)
from tests.helpers import assert_gradients_match, tone

_N = 4096


def _profile(name: str) -> HearingProfile:
    return builtin_profiles()[name]()


class TestSilence:
    """With no input every fiber fires at its spontaneous rate."""

    def test_nh_rates_equal_spontaneous_sum(self, small_config: PeripheryConfig) -> None:
        r = Periphery(_profile("NH"), small_config).simulate(np.zeros(_N), [0, 50, 100])
        np.testing.assert_allclose(r.values, 13 * 70 + 3 * 10 + 3 * 0.1, rtol=1e-12)

    def test_synaptopathy_silence(self, small_config: PeripheryConfig) -> None:
        r = Periphery(_profile("CS-7-0-0"), small_config).simulate(np.zeros(_N), [10])
        np.testing.assert_allclose(r.values, 490.0, rtol=1e-12)

    def test_ihc_rests(self) -> None:
        out = ihc_stage(ad.Array(np.zeros((2, 64))))
        np.testing.assert_array_equal(out.values, PeripheryConfig().ihc_rest)


class TestShapes:
    """Context trimming, block sizes and channel selection."""

    def test_context_trimmed(self, small_config: PeripheryConfig) -> None:
        r = simulate(np.zeros(_N), _profile("NH"), [0, 200], config=small_config)
        assert isinstance(r, Neurogram)
        assert r.n_channels == 2
        assert r.n_samples == _N - 512 - 256
        assert r.cf_map.cf_hz == (112.0, 12_000.0)
        assert r.sample_rate_hz == 20_000.0

    def test_default_block_size(self) -> None:
        periphery = Periphery(_profile("NH"))
        with pytest.raises(ShapeMismatch) as exc_info:
            periphery.simulate(np.zeros(20_000), [0])
        assert exc_info.value.target == "time"

    def test_signal_must_be_1d(self, small_config: PeripheryConfig) -> None:
        with pytest.raises(ShapeMismatch):
            Periphery(_profile("NH"), small_config).simulate(np.zeros((2, _N)))

    def test_context_must_fit(self) -> None:
        config = PeripheryConfig(context_left=2048, context_right=0, block_size=2048)
        with pytest.raises(ShapeMismatch):
            Periphery(_profile("NH"), config).simulate(np.zeros(2048))

    def test_invalid_subset(self, small_config: PeripheryConfig) -> None:
        with pytest.raises(InvalidConfig):
            Periphery(_profile("NH"), small_config).simulate(np.zeros(_N), [20, 10])

    def test_population_response(self, small_config: PeripheryConfig) -> None:
        r = Periphery(_profile("NH"), small_config).simulate(np.zeros(_N), [0, 1])
        pop = population_response(r)
        assert pop.shape == (r.n_samples,)
        np.testing.assert_allclose(pop.values, 2 * 940.3)


class TestResponses:
    """Level dependence and hearing-loss effects."""

    def test_rates_bounded_by_fiber_limits(self, small_config: PeripheryConfig) -> None:
        periphery = Periphery(_profile("NH"), small_config)
        rates = periphery.simulate_fibers(tone(2000.0, 90.0, _N), [100])
        for kind, fiber in small_config.fibers.items():
            values = rates[kind].values  # type: ignore[index]
            assert values.min() >= fiber.spont_rate - 1e-9
            assert values.max() <= fiber.max_rate + 1e-9

    def test_compressive_growth(self) -> None:
        cf = greenwood_cf().subset([100])
        f0 = cf.cf_hz[0]

        def level(db: float) -> float:
            bm = cochlear_stage(ad.Array(tone(f0, db, 8192)), _profile("NH"), cf)
            return 20 * np.log10(np.sqrt(np.mean(bm.values[0, 4096:] ** 2)))

        assert 9.0 < level(10.0) - level(0.0) < 10.1
        assert level(80.0) - level(60.0) < 12.0

    def test_ohc_loss_reduces_response(self, small_config: PeripheryConfig) -> None:
        x = tone(4000.0, 60.0, _N)
        idx = [150, 160, 170]
        nh = Periphery(_profile("NH"), small_config).simulate(x, idx).values
        hi = Periphery(_profile("Slope35"), small_config).simulate(x, idx).values
        assert hi.mean() < nh.mean()

    def test_ohc_loss_lowers_on_cf_output_by_its_audiogram(self) -> None:
        cf = greenwood_cf().subset([100])
        x = ad.Array(tone(cf.cf_hz[0], 0.0, 8192))

        def level(name: str) -> float:
            bm = cochlear_stage(x, _profile(name), cf).values[0, 4096:]
            return 20 * np.log10(np.sqrt(np.mean(bm**2)))

        assert level("NH") - level("Flat35") == pytest.approx(35.0, abs=1.0)

    def test_low_spont_fibers_rest_where_high_spont_fibers_respond(self, small_config: PeripheryConfig) -> None:
        idx = [150]
        f0 = greenwood_cf().subset(idx).cf_hz[0]
        periphery = Periphery(_profile("NH"), small_config)
        h_spont, l_spont = small_config.fiber("H").spont_rate, small_config.fiber("L").spont_rate
        separated = []
        for level_db in range(0, 82, 2):
            rates = periphery.simulate_fibers(tone(f0, float(level_db), _N), idx)
            h_driven = rates["H"].values[0, _N // 2 :].mean() - h_spont
            l_driven = rates["L"].values[0].max() - l_spont
            if h_driven > 20.0 and l_driven < 1.0:
                separated.append(level_db)
        assert separated
        assert separated[-1] < 80

    def test_fiber_loss_reduces_response(self, small_config: PeripheryConfig) -> None:
        x = tone(1000.0, 60.0, _N)
        nh = Periphery(_profile("NH"), small_config).simulate(x, [80]).values
        cs = Periphery(_profile("CS-13-0-0"), small_config).simulate(x, [80]).values
        assert np.all(cs < nh)

    def test_gradient_reaches_input(self, rng: np.random.Generator) -> None:
        config = PeripheryConfig(context_left=256, context_right=256, block_size=1024)
        periphery = Periphery(_profile("Slope35"), config)
        x = tone(3000.0, 50.0, 1024) + 1e-3 * rng.standard_normal(1024)
        assert_gradients_match(lambda v: ad.mean(periphery.simulate(v, [140]).rates), [x], rtol=1e-3)


class TestConstruction:
    def test_loss_beyond_active_gain(self) -> None:
        profile = HearingProfile("deep", ((1000.0, 70.0),))
        with pytest.raises(InvalidConfig):
            Periphery(profile)

    def test_fingerprint_is_stable(self) -> None:
        a = Periphery(_profile("Slope35")).fingerprint()
        assert a == Periphery(_profile("Slope35")).fingerprint()
        assert a != Periphery(_profile("Slope25")).fingerprint()
        assert a != Periphery(_profile("Slope35"), PeripheryConfig(knee_db_spl=35.0)).fingerprint()

    def test_fiber_count_changes_fingerprint(self) -> None:
        base = Periphery(HearingProfile("x")).fingerprint()
        assert base != Periphery(HearingProfile("x", (), FiberCounts(7, 0, 0))).fingerprint()


class TestPeripheryConfig:
    """Periphery configuration parsing and validation."""

    def test_defaults_validate(self) -> None:
        config = PeripheryConfig()
        config.validate()
        assert config.fiber("H").spont_rate == 70.0
        assert config.max_active_gain_db == 60.0

    def test_from_dict_merges_fibers(self) -> None:
        config = PeripheryConfig.from_dict({"fibers": {"L": {"threshold_db": 45}}, "middle_ear_band_hz": [300, 7000]})
        assert config.fiber("L").threshold_db == 45.0
        assert config.fiber("L").spont_rate == 0.1
        assert config.middle_ear_band_hz == (300.0, 7000.0)

    @pytest.mark.parametrize(
        "data",
        [
            {"gain": 1},
            {"fibers": {"X": {}}},
            {"fibers": {"H": {"spont_rate": 400}}},
            {"max_active_gain_db": 20.0},
            {"middle_ear_band_hz": [100]},
            {"compression_exponent": 0.0},
        ],
        ids=["unknown", "fiber-type", "fiber-range", "gain", "band", "exponent"],
    )
    def test_invalid(self, data: dict[str, object]) -> None:
        with pytest.raises(InvalidConfig):
            PeripheryConfig.from_dict(data)

    def test_to_dict_round_trip(self) -> None:
        config = PeripheryConfig(knee_db_spl=25.0)
        assert PeripheryConfig.from_dict(config.to_dict()).fingerprint_key() == config.fingerprint_key()

    def test_fibers_are_read_only(self) -> None:
        source = {kind: PeripheryConfig().fiber(kind) for kind in FIBER_TYPES}
        config = PeripheryConfig(fibers=source)
        key, digest = config.fingerprint_key(), hash(config)
        source["L"] = FiberParams(spont_rate=1.0, max_rate=100.0, threshold_db=50.0, width_db=2.0)
        assert config.fiber("L").spont_rate == 0.1
        assert (config.fingerprint_key(), hash(config)) == (key, digest)
        with pytest.raises(TypeError):
            config.fibers["L"] = source["L"]  # type: ignore[index]

    def test_replace_keeps_fibers_read_only(self) -> None:
        config = dataclasses.replace(PeripheryConfig(), knee_db_spl=25.0)
        with pytest.raises(TypeError):
            config.fibers["H"] = config.fiber("M")  # type: ignore[index]
        assert config.to_dict()["fibers"] == PeripheryConfig().to_dict()["fibers"]
