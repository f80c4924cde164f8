"""Tests for dataset ingestion and the training loop."""

from __future__ import annotations

import dataclasses
from typing import TYPE_CHECKING

import numpy as np
import pytest

from hearloop import adcore as ad
from hearloop._audio import rms, spl_db
from hearloop._config import EvalConfig, TrainConfig
from hearloop._dnnha import ArchSpec, ModelParams, build
from hearloop._errors import DataError, NumericalError
from hearloop._evalkit import efr_conditions, level_sweep
from hearloop._registry import get_loss_preset, get_profile
from hearloop._trainer import (
    DatasetItem,
    add_noise_training,
    build_dataset,
    ingest,
    load_corpus,
    prepare,
    train,
    train_step,
)
from hearloop.periphery import Periphery, middle_ear_coefficients
from tests.helpers import speech_like

if TYPE_CHECKING:
    from pathlib import Path

TINY = ArchSpec(encoder_filters=(2, 3), kernel_len=4)
SMALL = TrainConfig(
    epochs=2,
    learning_rate=1e-3,
    cf_step=100,
    window=256,
    context_left=512,
    context_right=256,
    total_length=32_768,
    arch=TINY,
)


def _items(n: int = 1) -> list[DatasetItem]:
    return [
        prepare(
            speech_like(0.3, 20_000, seed=i),
            f"s{i}",
            context_left=SMALL.context_left,
            context_right=SMALL.context_right,
            total_length=SMALL.total_length,
        )
        for i in range(n)
    ]


class TestPrepare:
    def test_layout_and_level(self) -> None:
        item = prepare(speech_like(0.5, 20_000), "a")
        assert item.waveform.shape == (81_920,)
        assert item.offset == 7936
        assert item.length == 10_000
        assert item.duration_s == 0.5
        assert not np.any(item.waveform[:7936])
        assert spl_db(item.sentence) == pytest.approx(70.0)

    def test_silent_sentence(self) -> None:
        with pytest.raises(DataError):
            prepare(np.zeros(100), "quiet")

    def test_too_long(self) -> None:
        with pytest.raises(DataError):
            prepare(np.ones(80_000), "long")


class TestCorpus:
    """Reading WAV corpora from disk."""

    def test_load_corpus_sorted(self, wav_corpus: Path) -> None:
        files = load_corpus(wav_corpus)
        assert [p.name for p in files] == ["s00.wav", "s01.wav", "s02.wav"]
        assert len(load_corpus(wav_corpus, max_items=2)) == 2

    def test_missing_directory(self, tmp_path: Path) -> None:
        with pytest.raises(DataError):
            load_corpus(tmp_path / "nope")

    def test_no_wav_files(self, tmp_path: Path) -> None:
        (tmp_path / "notes.txt").write_text("x", encoding="utf-8")
        with pytest.raises(DataError, match="no WAV"):
            load_corpus(tmp_path)

    def test_ingest_resamples(self, wav_corpus: Path) -> None:
        item = ingest(wav_corpus / "s00.wav")
        assert item.length == 12_000
        assert item.source.endswith("s00.wav")

    def test_ingest_uses_config(self, wav_corpus: Path) -> None:
        item = ingest(wav_corpus / "s01.wav", dataclasses.replace(SMALL, level_db=60.0))
        assert item.waveform.size == 32_768
        assert item.offset == 512
        assert spl_db(item.sentence) == pytest.approx(60.0)

    def test_build_dataset_with_noise(self, wav_corpus: Path) -> None:
        config = dataclasses.replace(SMALL, noise_snr_range=(0.0, 5.0), max_items=2)
        items = build_dataset(config, wav_corpus)
        assert len(items) == 2
        assert all(not np.any(item.waveform[:512]) for item in items)


class TestNoiseTraining:
    """White noise over the sentence part only."""

    def test_snr_within_range(self) -> None:
        clean = _items(3)
        noisy = add_noise_training(clean, (-5.0, 5.0), seed=7)
        for a, b in zip(clean, noisy):
            snr = 20 * np.log10(rms(a.sentence) / rms(b.sentence - a.sentence))
            assert -5.01 <= snr <= 5.01
            np.testing.assert_array_equal(b.waveform[: b.offset], 0.0)
            np.testing.assert_array_equal(b.waveform[b.offset + b.length :], 0.0)

    def test_speech_keeps_its_level(self) -> None:
        clean = _items(2)
        noisy = add_noise_training(clean, (0.0, 0.0), seed=3)
        for a, b in zip(clean, noisy):
            assert spl_db(b.sentence - a.sentence) == pytest.approx(spl_db(a.sentence), abs=1e-9)
            assert spl_db(b.sentence) == pytest.approx(70.0 + 10 * np.log10(2.0), abs=0.3)

    def test_seeded(self) -> None:
        a = add_noise_training(_items(), seed=1)[0]
        b = add_noise_training(_items(), seed=1)[0]
        np.testing.assert_array_equal(a.waveform, b.waveform)

    def test_infinite_snr(self) -> None:
        clean = _items()
        noisy = add_noise_training(clean, (float("inf"), float("inf")))
        assert noisy[0] is clean[0]

    def test_empty_range(self) -> None:
        with pytest.raises(DataError):
            add_noise_training(_items(), (5.0, -5.0))


class TestTrain:
    """Closed-loop training on a tiny model and a short layout."""

    def test_result(self) -> None:
        epochs: list[int] = []
        result = train(SMALL, _items(2), workers=2, on_epoch=lambda e, _: epochs.append(e))
        assert epochs == [1, 2]
        assert len(result.log) == 4
        assert [row.step for row in result.log] == [1, 2, 3, 4]
        assert result.labels == ("l_r", "l_X")
        assert result.adam.step == 4
        assert result.params.all_finite()
        assert set(result.periphery_fingerprints) == {"nh", "hi"}
        assert len(result.epoch_losses()) == len(result.epoch_medians()) == 2

    def test_loss_log_csv(self) -> None:
        result = train(dataclasses.replace(SMALL, epochs=1), _items())
        header, rows = result.csv_rows()
        assert header == ["epoch", "step", "item", "total", "l_r", "l_X"]
        assert len(rows) == 1
        row = result.log[0]
        assert float(rows[0][3]) == pytest.approx(sum(row.terms.values()))

    def test_deterministic(self) -> None:
        a = train(SMALL, _items(2))
        b = train(SMALL, _items(2))
        assert [r.total for r in a.log] == [r.total for r in b.log]
        for name, values in a.params.snapshot().items():
            np.testing.assert_array_equal(values, b.params.snapshot()[name])

    def test_parameters_change(self) -> None:
        before = build(TINY, SMALL.seed).snapshot()
        after = train(dataclasses.replace(SMALL, epochs=1), _items()).params.snapshot()
        assert any(not np.array_equal(before[k], after[k]) for k in before)

    def test_step_updates_only_the_model(self) -> None:
        item = _items()[0]
        periphery_config = SMALL.periphery_config()
        nh = Periphery(get_profile(SMALL.nh_profile), periphery_config)
        hi = Periphery(get_profile(SMALL.hi_profile), periphery_config)
        fingerprint = hi.fingerprint()
        filters = [arr.copy() for arr in (hi._b, hi._a, *middle_ear_coefficients(periphery_config))]
        response = hi.simulate(item.waveform, SMALL.cf_subset).values

        params = build(TINY, SMALL.seed)
        before = params.snapshot()
        r_nh = nh.simulate(item.waveform, SMALL.cf_subset)
        total, _ = train_step(params, item, r_nh, hi, get_loss_preset(SMALL.loss), SMALL)
        ad.zero_grad(params.arrays.values())
        ad.backward(total)
        ad.adam_step(params.arrays, ad.AdamState(lr=SMALL.learning_rate))

        after = params.snapshot()
        assert any(not np.array_equal(before[k], after[k]) for k in before)
        assert hi.fingerprint() == fingerprint
        for kept, now in zip(filters, (hi._b, hi._a, *middle_ear_coefficients(periphery_config))):
            np.testing.assert_array_equal(now, kept)
        np.testing.assert_array_equal(hi.simulate(item.waveform, SMALL.cf_subset).values, response)

    def test_result_reports_untouched_peripheries(self) -> None:
        result = train(dataclasses.replace(SMALL, epochs=1), _items())
        periphery_config = SMALL.periphery_config()
        assert result.periphery_fingerprints == {
            "nh": Periphery(get_profile(SMALL.nh_profile), periphery_config).fingerprint(),
            "hi": Periphery(get_profile(SMALL.hi_profile), periphery_config).fingerprint(),
        }

    @pytest.mark.slow
    def test_loss_decreases(self) -> None:
        config = dataclasses.replace(SMALL, epochs=6, shuffle=False)
        losses = train(config, _items()).epoch_losses()
        assert losses[-1] < losses[0]

    def test_empty_dataset(self) -> None:
        with pytest.raises(DataError):
            train(SMALL, [])

    def test_wrong_item_length(self) -> None:
        item = prepare(speech_like(0.3, 20_000), "a")
        with pytest.raises(DataError, match="81920"):
            train(SMALL, [item])

    def test_non_finite_loss_names_item(self) -> None:
        params = build(TINY)
        for _, arr in params.items():
            arr.values[...] = np.nan
        with pytest.raises(NumericalError) as info:
            train(SMALL, _items(), params=params)
        assert info.value.item == 0
        assert set(info.value.breakdown) == {"l_r", "l_X"}


_DESK = dataclasses.replace(
    SMALL, epochs=5, cf_step=10, shuffle=False, arch=ArchSpec(encoder_filters=(4, 8), kernel_len=8, residual=True)
)
_DESK_EVAL = EvalConfig(
    levels=(70.0,),
    cf_step=10,
    workers=4,
    window=SMALL.window,
    context_left=SMALL.context_left,
    context_right=SMALL.context_right,
    total_length=SMALL.total_length,
)
_HELD_OUT = [speech_like(0.4, 20_000, seed=s) for s in (5, 6)]


def _desk_train(hi_profile: str, loss: str) -> ModelParams:
    return train(dataclasses.replace(_DESK, hi_profile=hi_profile, loss=loss), _items(4)).params


def _desk_peripheries(hi_profile: str) -> tuple[Periphery, Periphery]:
    config = _DESK_EVAL.periphery_config()
    return Periphery(get_profile("NH"), config), Periphery(get_profile(hi_profile), config)


@pytest.mark.slow
class TestRestorationTrends:
    """Desk-scale training moves the impaired response towards normal hearing."""

    def test_ohc_loss_is_compensated(self) -> None:
        params = _desk_train("Slope25", "L_r2rp2Rp2+Tx")
        nh, hi = _desk_peripheries("Slope25")
        before = level_sweep(_HELD_OUT, nh, hi, None, _DESK_EVAL)[70.0]
        after = level_sweep(_HELD_OUT, nh, hi, params, _DESK_EVAL)[70.0]
        assert after < before

    def test_synaptopathy_envelope_is_restored(self) -> None:
        params = _desk_train("CS-7-0-0", "L_r2rp2Rp2")
        nh, hi = _desk_peripheries("CS-7-0-0")
        result = efr_conditions(nh, hi, params, _DESK_EVAL)
        assert result["hi_processed"] > result["hi_unprocessed"]

    def test_squared_losses_trade_nrmse_for_efr(self) -> None:
        nh, hi = _desk_peripheries("CS-7-0-0")
        plain = _desk_train("CS-7-0-0", "L_rrp")
        squared = _desk_train("CS-7-0-0", "L_r2rp2Rp2")
        nrmse_plain, nrmse_squared = (level_sweep(_HELD_OUT, nh, hi, p, _DESK_EVAL)[70.0] for p in (plain, squared))
        efr_plain, efr_squared = (efr_conditions(nh, hi, p, _DESK_EVAL)["hi_processed"] for p in (plain, squared))
        assert nrmse_plain < nrmse_squared
        assert efr_squared > efr_plain
