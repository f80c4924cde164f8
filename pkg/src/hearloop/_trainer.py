"""Trainer: dataset ingestion and the closed-loop training procedure.

One training step::

    x -> crop context -> DNN-HA (windowed) -> re-attach context -> x_hat
    NH(x), HI(x_hat) on the CF subset -> joint loss -> backward -> Adam

Both periphery models are fixed; only the DNN-HA parameters are updated.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from hearloop import adcore as ad
from hearloop._audio import (
    MODEL_RATE_HZ,
    attach_context,
    calibrate,
    crop_context,
    load_sentence,
    mix_at_snr,
    pad_context,
)
from hearloop._dnnha import ModelParams, build, forward_windowed
from hearloop._errors import DataError, HearloopError, NumericalError
from hearloop._losses import LossBundle, compose
from hearloop._registry import get_loss_preset, get_profile
from hearloop.periphery import Periphery

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from hearloop._config import TrainConfig
    from hearloop._losses import LossSpec
    from hearloop._types import FloatArray, PathLike
    from hearloop.periphery import HearingProfile, Neurogram

log = logging.getLogger(__name__)


# region: dataset
@dataclasses.dataclass(frozen=True, eq=False)
class DatasetItem:
    """A calibrated, context-padded training stimulus.

    :param waveform: Pressure in pascals at 20 kHz, ``total_length`` samples.
    :param source: Where the sentence came from.
    :param offset: Index of the first sentence sample (the leading context).
    :param length: Number of sentence samples.
    """

    waveform: FloatArray
    source: str
    offset: int
    length: int

    @property
    def duration_s(self) -> float:
        return self.length / MODEL_RATE_HZ

    @property
    def sentence(self) -> FloatArray:
        return self.waveform[self.offset : self.offset + self.length]


def prepare(
    sentence: FloatArray,
    source: str,
    *,
    level_db: float = 70.0,
    context_left: int = 7936,
    context_right: int = 256,
    total_length: int = 81_920,
) -> DatasetItem:
    """Calibrate a 20 kHz sentence to *level_db* dB SPL and pad it with context.

    :raises DataError: If the sentence is silent or does not fit.
    """
    calibrated = calibrate(sentence, level_db)
    waveform = pad_context(calibrated, context_left, context_right, total_length)
    return DatasetItem(waveform, source, context_left, calibrated.size)


def ingest(path: PathLike, config: TrainConfig | None = None) -> DatasetItem:
    """Read, resample to 20 kHz, calibrate and context-pad one WAV file.

    :param path: Mono 16-bit PCM or 32-bit float WAV at any rate.
    :param config: Supplies the level and context lengths; defaults apply without one.
    :raises DataError: If the file is unreadable, empty, multichannel, silent or too long.
    """
    sentence = load_sentence(path)
    if config is None:
        return prepare(sentence, str(path))
    return prepare(
        sentence,
        str(path),
        level_db=config.level_db,
        context_left=config.context_left,
        context_right=config.context_right,
        total_length=config.total_length,
    )


def load_corpus(directory: PathLike, max_items: int | None = None) -> list[Path]:
    """Sorted ``*.wav`` files of *directory*, at most *max_items* of them.

    :raises DataError: If the directory does not exist or holds no WAV files.
    """
    root = Path(directory)
    if not root.is_dir():
        raise DataError(f"corpus directory not found: {root}", op="load_corpus", target=str(root))
    files = sorted(p for p in root.iterdir() if p.suffix.lower() == ".wav" and p.is_file())
    if not files:
        raise DataError(f"no WAV files in {root}", op="load_corpus", target=str(root))
    return files[:max_items] if max_items is not None else files


def build_dataset(config: TrainConfig, directory: PathLike) -> list[DatasetItem]:
    """Ingest the corpus, then add training noise if the config asks for it."""
    items = [ingest(p, config) for p in load_corpus(directory, config.max_items)]
    log.info("ingested %d sentences from %s", len(items), directory)
    if config.noise_snr_range is not None:
        items = add_noise_training(items, config.noise_snr_range, config.seed)
    return items


def add_noise_training(
    items: Sequence[DatasetItem],
    snr_range: tuple[float, float] = (-20.0, 20.0),
    seed: int = 0,
) -> list[DatasetItem]:
    """Mix white noise into every sentence at an SNR drawn uniformly from *snr_range*.

    Noise covers the sentence only; the context stays silent. The speech keeps
    its calibrated level and the noise is added on top, so the mixture is
    louder than the speech by ``10 * log10(1 + 10 ** (-snr / 10))`` dB on
    average. Speech-shaped noise in evaluation is mixed the same way. The
    same noisy stimulus later feeds both the NH and HI pathways. ``(inf, inf)``
    leaves the items unchanged.

    :raises DataError: If the range is empty or a sentence is silent.
    """
    lo, hi = snr_range
    if not lo <= hi:
        raise DataError(f"invalid SNR range {snr_range}", op="add_noise_training", target="snr_range")
    if math.isinf(lo) and lo > 0:
        return list(items)
    rng = np.random.default_rng(seed)
    out: list[DatasetItem] = []
    for item in items:
        snr = float(rng.uniform(lo, hi))
        noise = rng.standard_normal(item.length)
        waveform = item.waveform.copy()
        waveform[item.offset : item.offset + item.length] = mix_at_snr(item.sentence, noise, snr)
        out.append(dataclasses.replace(item, waveform=waveform))
        log.debug("mixed white noise into %s at %.2f dB SNR", item.source, snr)
    return out


# endregion


# region: training
@dataclasses.dataclass(frozen=True)
class LossLogRow:
    """Loss of one training step, before the parameter update."""

    epoch: int
    step: int
    item: int
    total: float
    terms: dict[str, float]


@dataclasses.dataclass
class TrainResult:
    """Trained parameters plus the per-step loss log."""

    params: ModelParams
    log: list[LossLogRow]
    labels: tuple[str, ...]
    periphery_fingerprints: dict[str, str]
    adam: ad.AdamState

    def epoch_losses(self) -> list[float]:
        """Mean total loss of each epoch."""
        by_epoch: dict[int, list[float]] = {}
        for row in self.log:
            by_epoch.setdefault(row.epoch, []).append(row.total)
        return [statistics.fmean(by_epoch[e]) for e in sorted(by_epoch)]

    def epoch_medians(self) -> list[float]:
        by_epoch: dict[int, list[float]] = {}
        for row in self.log:
            by_epoch.setdefault(row.epoch, []).append(row.total)
        return [statistics.median(by_epoch[e]) for e in sorted(by_epoch)]

    def csv_rows(self) -> tuple[list[str], list[list[object]]]:
        """Header and rows of the loss log: epoch, step, item, total, then one column per term."""
        header = ["epoch", "step", "item", "total", *self.labels]
        rows = [
            [r.epoch, r.step, r.item, repr(r.total), *(repr(r.terms[label]) for label in self.labels)]
            for r in self.log
        ]
        return header, rows


def train_step(
    params: ModelParams,
    item: DatasetItem,
    r_nh: Neurogram,
    hi: Periphery,
    loss: LossSpec,
    config: TrainConfig,
) -> tuple[ad.Array, dict[str, float]]:
    """Forward pass of one item under a tape; returns the loss and its breakdown.

    The stimulus entering the HI periphery is the original context around the
    processed cropped part.
    """
    left, right = config.context_left, config.context_right
    x = ad.Array(item.waveform)
    with ad.Tape():
        cropped = crop_context(x, left, right)
        processed = forward_windowed(params, cropped, config.window)
        x_hat = attach_context(x, processed, left, right)
        r_hat = hi.simulate(x_hat, config.cf_subset)
        return compose(loss, LossBundle(x, x_hat, r_nh, r_hat, context_left=left))


def precompute_nh(
    nh: Periphery, items: Sequence[DatasetItem], cf_subset: Sequence[int], workers: int = 4
) -> list[Neurogram]:
    """NH responses of every item, computed in parallel and returned in input order."""
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda item: nh.simulate(item.waveform, cf_subset), items))


def train(
    config: TrainConfig,
    dataset: Sequence[DatasetItem],
    nh_profile: HearingProfile | None = None,
    hi_profile: HearingProfile | None = None,
    *,
    params: ModelParams | None = None,
    loss: LossSpec | None = None,
    workers: int = 4,
    on_epoch: Callable[[int, float], None] | None = None,
) -> TrainResult:
    """Train a DNN-HA so that HI(x_hat) approaches NH(x).

    :param config: Training settings; profiles and loss are resolved from it
        unless given explicitly.
    :param dataset: Context-padded items of ``config.total_length`` samples.
    :param params: Start from these parameters instead of a fresh seeded model.
    :param workers: Threads used to precompute the NH responses.
    :param on_epoch: Called with ``(epoch, mean loss)`` after every epoch.
    :raises DataError: If the dataset is empty or an item has the wrong length.
    :raises NumericalError: If the loss becomes non-finite, naming the item and term values.
    """
    config.validate()
    if not dataset:
        raise DataError("training dataset is empty", op="train", target="dataset")
    for index, item in enumerate(dataset):
        if item.waveform.shape != (config.total_length,):
            raise DataError(
                f"item {index} has {item.waveform.size} samples, expected {config.total_length}",
                op="train",
                target=item.source,
            )
    loss_spec = loss if loss is not None else get_loss_preset(config.loss)
    loss_spec.validate()
    periphery_config = config.periphery_config()
    nh = Periphery(nh_profile or get_profile(config.nh_profile), periphery_config)
    hi = Periphery(hi_profile or get_profile(config.hi_profile), periphery_config)
    fingerprints = {"nh": nh.fingerprint(), "hi": hi.fingerprint()}

    model = params if params is not None else build(config.arch, config.seed)
    state = ad.AdamState(lr=config.learning_rate)
    state.validate()
    cf_subset = config.cf_subset
    log.info(
        "training %s on %d items: %s vs %s, loss %s, %d CFs, %d epochs",
        model,
        len(dataset),
        hi.profile.name,
        nh.profile.name,
        config.loss,
        len(cf_subset),
        config.epochs,
    )
    r_nh = precompute_nh(nh, dataset, cf_subset, workers)

    rng = np.random.default_rng(config.seed)
    rows: list[LossLogRow] = []
    step = 0
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(dataset)) if config.shuffle else np.arange(len(dataset))
        totals: list[float] = []
        for raw_index in order:
            index = int(raw_index)
            total, breakdown = train_step(model, dataset[index], r_nh[index], hi, loss_spec, config)
            value = total.item()
            if not math.isfinite(value):
                raise NumericalError(
                    f"non-finite loss in epoch {epoch}",
                    op="train",
                    target=dataset[index].source,
                    item=index,
                    breakdown=breakdown,
                )
            ad.zero_grad(model.arrays.values())
            ad.backward(total)
            ad.adam_step(model.arrays, state)
            step += 1
            totals.append(value)
            rows.append(LossLogRow(epoch, step, index, value, breakdown))
            log.debug("epoch %d step %d item %d loss %.6g %s", epoch, step, index, value, breakdown)
        mean = statistics.fmean(totals)
        log.info("epoch %d/%d: mean loss %.6g", epoch, config.epochs, mean)
        if on_epoch is not None:
            on_epoch(epoch, mean)

    if {"nh": nh.fingerprint(), "hi": hi.fingerprint()} != fingerprints:
        raise HearloopError("periphery changed during training", op="train", target="periphery")
    if not model.all_finite():
        raise NumericalError("trained parameters are not finite", op="train", target="params")
    return TrainResult(model, rows, loss_spec.labels, fingerprints, state)


# endregion
