"""Tests for NRMSE, SAM tones and EFR, speech-shaped noise and evaluation reports."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from hearloop._audio import spl_db
from hearloop._config import EvalConfig
from hearloop._dnnha import ArchSpec, build
from hearloop._errors import DataError, InvalidConfig, NumericalError, ShapeMismatch
from hearloop._evalkit import (
    EvalReport,
    EvalRow,
    SamStimulus,
    SpeechShapedNoise,
    efr,
    efr_conditions,
    evaluate,
    level_sweep,
    nrmse,
    process_stimulus,
    sam_tone,
    ssn_from_corpus,
)
from hearloop._registry import get_profile
from hearloop.periphery import Periphery, PeripheryConfig
from tests.helpers import speech_like

_SMALL = EvalConfig(
    levels=(60.0,),
    efr=False,
    cf_step=50,
    workers=2,
    window=256,
    context_left=512,
    context_right=256,
    total_length=16_384,
)


def _periphery(name: str) -> Periphery:
    return Periphery(get_profile(name), _SMALL.periphery_config())


class TestNrmse:
    """Normalized RMS error of population responses."""

    def test_worked_example(self) -> None:
        assert nrmse([0.0, 4.0], [0.0, 0.0]) == pytest.approx(0.70711, rel=1e-4)

    def test_scale_invariant(self, rng: np.random.Generator) -> None:
        a, b = rng.uniform(1, 2, 50), rng.uniform(1, 2, 50)
        assert nrmse(3.0 * a, 3.0 * b) == pytest.approx(nrmse(a, b))

    def test_identical_is_zero(self) -> None:
        assert nrmse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_silence_against_synaptopathy(self) -> None:
        config = PeripheryConfig(context_left=512, context_right=256, block_size=2048)
        x = np.zeros(4096)
        nh = Periphery(get_profile("NH"), config).simulate(x, [0, 100, 200])
        hi = Periphery(get_profile("CS-7-0-0"), config).simulate(x, [0, 100, 200])
        assert nrmse(nh, hi) == pytest.approx(1.0 - 490.0 / 940.3, rel=1e-9)

    def test_length_mismatch(self) -> None:
        with pytest.raises(ShapeMismatch):
            nrmse([1.0, 2.0], [1.0])

    def test_no_positive_maximum(self) -> None:
        with pytest.raises(NumericalError):
            nrmse([0.0, 0.0], [1.0, 1.0])


class TestSamTone:
    def test_level(self) -> None:
        assert spl_db(sam_tone(SamStimulus(level_db=60.0))) == pytest.approx(60.0)

    def test_spectral_components(self) -> None:
        spec = SamStimulus(duration_s=0.5, ramp_s=0.0)
        mag = np.abs(np.fft.rfft(sam_tone(spec)))
        # 2 Hz bins
        carrier, lower, upper = mag[2000], mag[1940], mag[2060]
        assert lower == pytest.approx(0.5 * carrier, rel=1e-6)
        assert upper == pytest.approx(0.5 * carrier, rel=1e-6)
        assert mag[1000] < 1e-6 * carrier

    def test_unmodulated(self) -> None:
        mag = np.abs(np.fft.rfft(sam_tone(SamStimulus(duration_s=0.5, ramp_s=0.0, depth=0.0))))
        assert mag[1940] < 1e-6 * mag[2000]

    @pytest.mark.parametrize(
        "spec",
        [SamStimulus(depth=1.5), SamStimulus(ramp_s=0.3), SamStimulus(carrier_hz=12_000.0)],
        ids=["depth", "ramp", "carrier"],
    )
    def test_invalid(self, spec: SamStimulus) -> None:
        with pytest.raises(InvalidConfig):
            sam_tone(spec)


class TestEfr:
    """Envelope-following response from a population response."""

    def test_constant_response_has_no_efr(self) -> None:
        result = efr(np.full(8000, 500.0))
        assert list(result.peaks) == [120.0, 240.0, 360.0, 480.0]
        assert result.efr_sum < 1e-6

    def test_grows_with_modulation_depth(self) -> None:
        periphery = Periphery(get_profile("NH"), PeripheryConfig(context_left=512, context_right=256))
        values = []
        for depth in (0.0, 1.0):
            tone = sam_tone(SamStimulus(depth=depth))
            x = np.zeros(16_384)
            x[512 : 512 + tone.size] = tone
            r = periphery.simulate(x, [120, 130, 140, 150, 160])
            values.append(efr(r, 120.0, duration_s=0.4).efr_sum)
        assert values[1] > 5.0 * values[0]

    def test_modulation_out_of_range(self) -> None:
        with pytest.raises(InvalidConfig):
            efr(np.ones(8000), 3000.0)

    def test_too_short(self) -> None:
        with pytest.raises(InvalidConfig):
            efr(np.ones(1000))

    def test_conditions_match_for_equal_profiles(self) -> None:
        nh = _periphery("NH")
        result = efr_conditions(nh, nh, None, _SMALL)
        assert set(result) == {"nh", "hi_unprocessed"}
        assert result["nh"] == result["hi_unprocessed"]

    def test_synaptopathy_lowers_efr(self) -> None:
        result = efr_conditions(_periphery("NH"), _periphery("CS-7-0-0"), None, _SMALL)
        assert 0.0 < result["hi_unprocessed"] < 0.9 * result["nh"]


class TestSpeechShapedNoise:
    def test_unit_rms_and_seeded(self) -> None:
        ssn = ssn_from_corpus([speech_like(0.5, 20_000)])
        a = ssn.generate(10_000, seed=3)
        assert np.sqrt(np.mean(a**2)) == pytest.approx(1.0)
        np.testing.assert_array_equal(a, ssn.generate(10_000, seed=3))
        assert not np.array_equal(a, ssn.generate(10_000, seed=4))

    def test_follows_corpus_spectrum(self) -> None:
        freqs = np.linspace(0, 10_000, 11)
        psd = np.where(freqs <= 2000, 1.0, 1e-6)
        noise = SpeechShapedNoise(freqs, psd).generate(20_000)
        power = np.abs(np.fft.rfft(noise)) ** 2
        assert power[:3000].sum() > 100 * power[6000:].sum()

    def test_empty_corpus(self) -> None:
        with pytest.raises(DataError):
            ssn_from_corpus([])

    def test_silent_corpus(self) -> None:
        with pytest.raises(DataError):
            ssn_from_corpus([np.zeros(4096)])

    def test_invalid_length(self) -> None:
        with pytest.raises(InvalidConfig):
            SpeechShapedNoise(np.array([0.0, 10_000.0]), np.ones(2)).generate(0)


class TestProcessing:
    def test_unprocessed_passes_through(self) -> None:
        x = np.arange(16.0)
        assert process_stimulus(None, x, 4, 2, 2) is x

    def test_context_is_kept(self, rng: np.random.Generator) -> None:
        params = build(ArchSpec(encoder_filters=(2, 3), kernel_len=4), seed=0)
        x = rng.standard_normal(40)
        out = process_stimulus(params, x, 16, 4, 4)
        assert out.shape == (40,)
        np.testing.assert_array_equal(out[:4], x[:4])
        np.testing.assert_array_equal(out[-4:], x[-4:])

    def test_level_sweep(self) -> None:
        nh = _periphery("NH")
        sweep = level_sweep([speech_like(0.3, 20_000)], nh, nh, None, _SMALL)
        assert sweep == {60.0: 0.0}

    def test_level_sweep_needs_sentences(self) -> None:
        nh = _periphery("NH")
        with pytest.raises(DataError):
            level_sweep([], nh, nh, None, _SMALL)


class TestEvaluate:
    """End-to-end evaluation on a short layout."""

    def test_impaired_unprocessed(self) -> None:
        sentences = [("a", speech_like(0.3, 20_000)), ("b", speech_like(0.4, 20_000, seed=1))]
        report = evaluate(None, sentences, get_profile("NH"), get_profile("Slope35+CS-7-0-0"), _SMALL)
        assert [r.sentence for r in report.rows] == ["a", "b"]
        assert report.conditions() == ["quiet@60dB"]
        assert report.aggregate()["quiet@60dB"] > 0.0
        assert not report.partial

    def test_normal_hearing_matches_itself(self) -> None:
        nh = get_profile("NH")
        report = evaluate(None, [("a", speech_like(0.3, 20_000))], nh, nh, _SMALL)
        assert report.aggregate() == {"quiet@60dB": 0.0}

    def test_failing_sentence_makes_report_partial(self) -> None:
        sentences = [("ok", speech_like(0.3, 20_000)), ("long", speech_like(1.0, 20_000))]
        nh = get_profile("NH")
        report = evaluate(None, sentences, nh, nh, _SMALL)
        assert report.partial
        assert [r.sentence for r in report.rows] == ["ok"]
        assert report.failures[0].startswith("long/quiet@60dB")

    def test_nothing_evaluated(self) -> None:
        nh = get_profile("NH")
        with pytest.raises(DataError):
            evaluate(None, [("long", speech_like(1.0, 20_000))], nh, nh, _SMALL)

    def test_no_sentences(self) -> None:
        nh = get_profile("NH")
        with pytest.raises(DataError):
            evaluate(None, [], nh, nh, _SMALL)

    def test_noise_conditions(self) -> None:
        config = dataclasses.replace(_SMALL, snrs=(0.0,))
        nh = get_profile("NH")
        report = evaluate(None, [("a", speech_like(0.3, 20_000))], nh, nh, config)
        assert report.conditions() == ["quiet@60dB", "snr0dB@70dB"]
        assert report.by_snr() == {0.0: 0.0}

    def test_noise_degrades_in_order(self) -> None:
        config = dataclasses.replace(
            _SMALL, levels=(70.0,), snrs=(-6.0, -12.0), block_size=8192, total_length=8192, workers=3
        )
        sentences = [("a", speech_like(0.35, 20_000)), ("b", speech_like(0.35, 20_000, seed=1))]
        report = evaluate(None, sentences, get_profile("NH"), get_profile("Slope35+CS-7-0-0"), config)
        assert report.conditions() == ["quiet@70dB", "snr-6dB@70dB", "snr-12dB@70dB"]
        noisy = report.by_snr()
        assert report.by_level()[70.0] < noisy[-6.0] < noisy[-12.0]


class TestReport:
    """Aggregation and serialisation of evaluation rows."""

    @pytest.fixture
    def report(self) -> EvalReport:
        rows = [
            EvalRow("a", "quiet@60dB", 60.0, None, 0.1),
            EvalRow("b", "quiet@60dB", 60.0, None, 0.3),
            EvalRow("a", "snr5dB@70dB", 70.0, 5.0, 0.4),
        ]
        return EvalReport(rows, {"nh": 10.0}, {"seed": 0}, runtime_s=12.5)

    def test_aggregate(self, report: EvalReport) -> None:
        assert report.aggregate() == {"quiet@60dB": pytest.approx(0.2), "snr5dB@70dB": pytest.approx(0.4)}
        assert report.by_level() == {60.0: pytest.approx(0.2)}
        assert report.by_snr() == {5.0: pytest.approx(0.4)}

    def test_to_dict(self, report: EvalReport) -> None:
        data = report.to_dict()
        assert data["aggregate_nrmse_percent"] == {
            "quiet@60dB": pytest.approx(20.0),
            "snr5dB@70dB": pytest.approx(40.0),
        }
        assert data["efr_sum_nv"] == {"nh": 10.0}
        assert data["partial"] is False
        assert "runtime_s" not in data

    def test_csv_rows(self, report: EvalReport) -> None:
        header, rows = report.csv_rows()
        assert header[-1] == "nrmse_percent"
        assert rows[0][3] == ""
        assert rows[2][3] == 5.0
        assert float(rows[1][4]) == pytest.approx(30.0)
