"""Evaluation: NRMSE of population responses, EFR from SAM tones, speech-shaped noise and reports."""

from __future__ import annotations

import dataclasses
import logging
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from typing import TYPE_CHECKING

import numpy as np
import scipy.signal

from hearloop import adcore as ad
from hearloop._audio import (
    MODEL_RATE_HZ,
    attach_context,
    calibrate,
    crop_context,
    mix_at_snr,
    pad_context,
)
from hearloop._dnnha import forward_windowed
from hearloop._errors import DataError, HearloopError, InvalidConfig, NumericalError, ShapeMismatch
from hearloop.periphery import Neurogram, Periphery, population_response

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy.typing as npt

    from hearloop._config import EvalConfig
    from hearloop._dnnha import ModelParams
    from hearloop._types import FloatArray
    from hearloop.periphery import HearingProfile

log = logging.getLogger(__name__)


def _population(r: Neurogram | ad.Array | npt.ArrayLike) -> FloatArray:
    if isinstance(r, Neurogram):
        return population_response(r).values
    if isinstance(r, ad.Array):
        return r.values
    return np.asarray(r, dtype=np.float64)


# region: NRMSE
def nrmse(r_nh: Neurogram | ad.Array | npt.ArrayLike, r_hi: Neurogram | ad.Array | npt.ArrayLike) -> float:
    """RMS difference of two population responses over the NH maximum, as a fraction.

    Neurograms are summed over CF first.

    :raises ShapeMismatch: If the lengths differ.
    :raises NumericalError: If the NH response has no positive maximum.
    """
    a, b = _population(r_nh), _population(r_hi)
    if a.shape != b.shape:
        raise ShapeMismatch("responses differ in length", op="nrmse", target="time", expected=a.shape, actual=b.shape)
    peak = float(np.max(a)) if a.size else 0.0
    if not peak > 0.0:
        raise NumericalError("NH response has no positive maximum", op="nrmse", target="r_nh")
    return float(np.sqrt(np.mean((a - b) ** 2)) / peak)


# endregion


# region: processing
def process_stimulus(params: ModelParams | None, x: FloatArray, window: int, left: int, right: int) -> FloatArray:
    """DNN-HA output for a context-padded stimulus; the context is kept as is.

    Without *params* the stimulus is returned unchanged.
    """
    if params is None:
        return x
    signal = ad.Array(x)
    processed = forward_windowed(params, crop_context(signal, left, right), window)
    return attach_context(signal, processed, left, right).values


def _score(
    sentence: FloatArray,
    level_db: float,
    noise: FloatArray | None,
    snr_db: float | None,
    nh: Periphery,
    hi: Periphery,
    params: ModelParams | None,
    config: EvalConfig,
) -> float:
    speech = calibrate(sentence, level_db)
    if noise is not None and snr_db is not None:
        speech = mix_at_snr(speech, noise, snr_db)
    x = pad_context(speech, config.context_left, config.context_right, config.total_length)
    r_nh = nh.simulate(x, config.cf_subset)
    x_hat = process_stimulus(params, x, config.window, config.context_left, config.context_right)
    r_hi = hi.simulate(x_hat, config.cf_subset)
    return nrmse(r_nh, r_hi)


def level_sweep(
    sentences: Sequence[FloatArray],
    nh: Periphery,
    hi: Periphery,
    params: ModelParams | None,
    config: EvalConfig,
) -> dict[float, float]:
    """Mean NRMSE per presentation level, NH(unprocessed) against HI(processed or unprocessed).

    :raises DataError: If *sentences* is empty.
    """
    if not sentences:
        raise DataError("no sentences to evaluate", op="level_sweep", target="sentences")
    tasks = [(s, level) for level in config.levels for s in sentences]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        scores = list(pool.map(lambda t: _score(t[0], t[1], None, None, nh, hi, params, config), tasks))
    result: dict[float, float] = {}
    for i, level in enumerate(config.levels):
        result[level] = statistics.fmean(scores[i * len(sentences) : (i + 1) * len(sentences)])
    return result


# endregion


# region: SAM tone and EFR
@dataclasses.dataclass(frozen=True)
class SamStimulus:
    """Sinusoidally amplitude-modulated tone.

    :param duration_s: Tone duration.
    :param carrier_hz: Carrier frequency.
    :param modulation_hz: Modulation frequency.
    :param depth: Modulation depth in [0, 1].
    :param ramp_s: Hann onset/offset ramp duration (0 disables it).
    :param level_db: Level in dB SPL.
    :param sample_rate_hz: Sample rate.
    """

    duration_s: float = 0.4
    carrier_hz: float = 4000.0
    modulation_hz: float = 120.0
    depth: float = 1.0
    ramp_s: float = 0.005
    level_db: float = 70.0
    sample_rate_hz: int = MODEL_RATE_HZ

    @property
    def n_samples(self) -> int:
        return round(self.duration_s * self.sample_rate_hz)

    def validate(self) -> None:
        """:raises InvalidConfig: On out-of-range values."""
        if not 0.0 <= self.depth <= 1.0:
            raise InvalidConfig(f"depth must be in [0, 1], got {self.depth}", op="SamStimulus", target="depth")
        if self.n_samples < 1 or self.ramp_s < 0 or 2 * self.ramp_s > self.duration_s:
            raise InvalidConfig("invalid duration or ramp", op="SamStimulus", target="duration_s")
        if not 0 < self.carrier_hz < self.sample_rate_hz / 2 or self.modulation_hz <= 0:
            raise InvalidConfig("frequencies must lie in (0, fs/2)", op="SamStimulus", target="carrier_hz")


def sam_tone(spec: SamStimulus | None = None) -> FloatArray:
    """``(1 + m sin(2 pi fm t)) sin(2 pi fc t)`` with Hann ramps, calibrated to the stimulus level."""
    s = spec or SamStimulus()
    s.validate()
    t = np.arange(s.n_samples) / s.sample_rate_hz
    x = (1.0 + s.depth * np.sin(2 * np.pi * s.modulation_hz * t)) * np.sin(2 * np.pi * s.carrier_hz * t)
    ramp = round(s.ramp_s * s.sample_rate_hz)
    if ramp:
        window = scipy.signal.get_window("hann", 2 * ramp, fftbins=False)
        x[:ramp] *= window[:ramp]
        x[-ramp:] *= window[ramp:]
    return calibrate(x, s.level_db)


@dataclasses.dataclass(frozen=True)
class EfrStage:
    """One excitation minus delayed-inhibition stage.

    ``out = gain * max(exc(x) - strength * inh(x)(t - delay), 0)`` with unit-area
    alpha-function kernels of time constants ``tau_exc_s`` and ``tau_inh_s``.
    """

    tau_exc_s: float
    tau_inh_s: float
    delay_s: float
    strength: float
    gain: float


@dataclasses.dataclass(frozen=True)
class EfrConfig:
    """Brainstem backend and spectral analysis of the EFR.

    :param cn: Cochlear-nucleus stage.
    :param ic: Inferior-colliculus stage, fed by the CN output.
    :param onset_exclusion_s: Leading part of the response left out of the analysis.
    :param harmonics: Number of modulation-frequency harmonics summed.
    :param peak_search_bins: Peaks are the maximum within this many bins of each harmonic.
    :param nv_per_unit: Nominal scale from backend output to nanovolts.
    """

    cn: EfrStage = EfrStage(tau_exc_s=0.5e-3, tau_inh_s=2e-3, delay_s=1e-3, strength=0.6, gain=1.5)
    ic: EfrStage = EfrStage(tau_exc_s=1e-3, tau_inh_s=2e-3, delay_s=2e-3, strength=0.9, gain=1.0)
    onset_exclusion_s: float = 0.05
    harmonics: int = 4
    peak_search_bins: int = 2
    nv_per_unit: float = 1e-2


def _alpha_filter(x: FloatArray, tau_s: float, fs: float) -> FloatArray:
    a = math.exp(-1.0 / (tau_s * fs))
    return np.asarray(scipy.signal.lfilter([0.0, (1.0 - a) ** 2], [1.0, -2.0 * a, a * a], x), dtype=np.float64)


def _stage(x: FloatArray, stage: EfrStage, fs: float) -> FloatArray:
    exc = _alpha_filter(x, stage.tau_exc_s, fs)
    inh = _alpha_filter(x, stage.tau_inh_s, fs)
    d = round(stage.delay_s * fs)
    delayed = np.concatenate([np.zeros(d), inh[: inh.size - d]]) if d else inh
    return stage.gain * np.maximum(exc - stage.strength * delayed, 0.0)


@dataclasses.dataclass(frozen=True)
class EfrResult:
    """EFR spectrum and the summed harmonic peaks (nominal nV)."""

    frequencies: FloatArray
    spectrum: FloatArray
    peaks: dict[float, float]
    efr_sum: float


def efr(
    r_p: Neurogram | ad.Array | npt.ArrayLike,
    modulation_hz: float = 120.0,
    *,
    sample_rate_hz: float = MODEL_RATE_HZ,
    duration_s: float | None = None,
    config: EfrConfig | None = None,
) -> EfrResult:
    """EFR_sum of a population response to a SAM tone.

    The response passes the CN and IC stages; the segment from the onset
    exclusion to *duration_s* (default: the whole response) is linearly
    detrended, Hann-windowed and transformed. EFR_sum is the sum of the
    spectral maxima near the modulation frequency and its next harmonics.

    :raises InvalidConfig: If the segment is too short or a harmonic lies above Nyquist.
    """
    cfg = config or EfrConfig()
    fs = float(sample_rate_hz)
    pop = _population(r_p)
    ic = _stage(_stage(pop, cfg.cn, fs), cfg.ic, fs)
    start = round(cfg.onset_exclusion_s * fs)
    stop = ic.size if duration_s is None else min(ic.size, round(duration_s * fs))
    segment = ic[start:stop]
    if segment.size < 2:
        raise InvalidConfig("response too short for EFR analysis", op="efr", target="duration")
    resolution = fs / segment.size
    targets = [modulation_hz * k for k in range(1, cfg.harmonics + 1)]
    if targets[-1] + cfg.peak_search_bins * resolution >= fs / 2 or modulation_hz < resolution:
        raise InvalidConfig(
            f"modulation frequency {modulation_hz} Hz is out of range for {segment.size} samples",
            op="efr",
            target="modulation_hz",
        )
    window = scipy.signal.get_window("hann", segment.size)
    tapered = scipy.signal.detrend(segment, type="linear") * window
    spectrum = 2.0 * np.abs(np.fft.rfft(tapered)) / window.sum() * cfg.nv_per_unit
    freqs = np.fft.rfftfreq(segment.size, 1.0 / fs)
    peaks: dict[float, float] = {}
    for f in targets:
        k = int(round(f / resolution))
        lo, hi = max(k - cfg.peak_search_bins, 0), k + cfg.peak_search_bins + 1
        peaks[f] = float(spectrum[lo:hi].max())
    return EfrResult(freqs, spectrum, peaks, float(sum(peaks.values())))


def _sam_layout(n: int, config: EvalConfig, block: int) -> int:
    """Smallest block multiple holding the tone and both contexts with a window-aligned cropped part."""
    total = math.ceil((config.context_left + n + config.context_right) / block) * block
    for _ in range(config.window):
        if (total - config.context_left - config.context_right) % config.window == 0:
            return total
        total += block
    raise InvalidConfig("no stimulus length aligns the SAM tone with the window", op="efr", target="window")


def efr_conditions(
    nh: Periphery, hi: Periphery, params: ModelParams | None, config: EvalConfig, spec: SamStimulus | None = None
) -> dict[str, float]:
    """EFR_sum of NH, HI unprocessed and (with *params*) HI processed responses to a SAM tone."""
    s = spec or SamStimulus(level_db=config.efr_level_db)
    tone = sam_tone(s)
    total = _sam_layout(tone.size, config, nh.config.block_size)
    x = pad_context(tone, config.context_left, config.context_right, total)

    def measure(periphery: Periphery, stimulus: FloatArray) -> float:
        r = periphery.simulate(stimulus, config.cf_subset)
        return efr(r, s.modulation_hz, sample_rate_hz=s.sample_rate_hz, duration_s=s.duration_s).efr_sum

    result = {"nh": measure(nh, x), "hi_unprocessed": measure(hi, x)}
    if params is not None:
        x_hat = process_stimulus(params, x, config.window, config.context_left, config.context_right)
        result["hi_processed"] = measure(hi, x_hat)
    return result


# endregion


# region: speech-shaped noise
class SpeechShapedNoise:
    """Random-phase noise with a given long-term power spectrum.

    :param frequencies: Frequencies of *psd*, ascending from 0.
    :param psd: Power spectral density.
    :param sample_rate_hz: Sample rate of generated noise.
    """

    def __init__(self, frequencies: FloatArray, psd: FloatArray, sample_rate_hz: float = MODEL_RATE_HZ) -> None:
        self.frequencies = np.asarray(frequencies, dtype=np.float64)
        self.psd = np.asarray(psd, dtype=np.float64)
        self.sample_rate_hz = float(sample_rate_hz)

    def __repr__(self) -> str:
        return f"SpeechShapedNoise(bins={self.psd.size}, sample_rate_hz={self.sample_rate_hz})"

    def generate(self, n: int, seed: int = 0) -> FloatArray:
        """*n* samples of unit-RMS noise; equal seeds give equal noise."""
        if n < 1:
            raise InvalidConfig(f"noise length must be >= 1, got {n}", op="ssn", target="n")
        rng = np.random.default_rng(seed)
        freqs = np.fft.rfftfreq(n, 1.0 / self.sample_rate_hz)
        magnitude = np.sqrt(np.interp(freqs, self.frequencies, self.psd))
        phase = rng.uniform(0.0, 2.0 * np.pi, freqs.size)
        spectrum = magnitude * np.exp(1j * phase)
        spectrum[0] = magnitude[0]
        if n % 2 == 0:
            spectrum[-1] = magnitude[-1]
        noise = np.fft.irfft(spectrum, n)
        level = float(np.sqrt(np.mean(noise**2)))
        if level == 0.0:
            raise DataError("corpus spectrum is empty", op="ssn", target="psd")
        return noise / level


def ssn_from_corpus(
    sentences: Sequence[FloatArray], sample_rate_hz: float = MODEL_RATE_HZ, nperseg: int = 2048
) -> SpeechShapedNoise:
    """Noise source shaped like the average spectrum of *sentences* (Welch estimate per sentence).

    :raises DataError: If no sentences are given or all are silent.
    """
    if not sentences:
        raise DataError("speech-shaped noise needs at least one sentence", op="ssn_from_corpus", target="corpus")
    psds = []
    for s in sentences:
        v = np.asarray(s, dtype=np.float64)
        freqs, psd = scipy.signal.welch(v, fs=sample_rate_hz, nperseg=min(nperseg, v.size))
        if freqs.size != nperseg // 2 + 1:
            psd = np.interp(np.fft.rfftfreq(nperseg, 1.0 / sample_rate_hz), freqs, psd)
        psds.append(psd)
    mean_psd = np.mean(psds, axis=0)
    if not np.any(mean_psd > 0):
        raise DataError("all corpus sentences are silent", op="ssn_from_corpus", target="corpus")
    return SpeechShapedNoise(np.fft.rfftfreq(nperseg, 1.0 / sample_rate_hz), mean_psd, sample_rate_hz)


# endregion


# region: report
@dataclasses.dataclass(frozen=True)
class EvalRow:
    """NRMSE of one sentence under one condition (fraction, not percent)."""

    sentence: str
    condition: str
    level_db: float
    snr_db: float | None
    nrmse: float


@dataclasses.dataclass
class EvalReport:
    """Per-sentence NRMSEs, their condition means and EFR_sum values.

    :param rows: One row per sentence and condition that evaluated successfully.
    :param efr: EFR_sum keyed by ``nh``, ``hi_unprocessed`` and ``hi_processed``.
    :param config: Echo of the evaluation settings.
    :param failures: ``sentence/condition: error`` for every failed evaluation.
    :param runtime_s: Wall-clock time; kept out of :meth:`to_dict` so equal runs give equal reports.
    """

    rows: list[EvalRow]
    efr: dict[str, float]
    config: dict[str, object]
    failures: list[str] = dataclasses.field(default_factory=list)
    runtime_s: float = 0.0

    @property
    def partial(self) -> bool:
        return bool(self.failures)

    def conditions(self) -> list[str]:
        return list(dict.fromkeys(r.condition for r in self.rows))

    def aggregate(self) -> dict[str, float]:
        """Mean NRMSE of each condition, in condition order."""
        return {c: statistics.fmean(r.nrmse for r in self.rows if r.condition == c) for c in self.conditions()}

    def by_level(self) -> dict[float, float]:
        quiet = [r for r in self.rows if r.snr_db is None]
        levels = list(dict.fromkeys(r.level_db for r in quiet))
        return {lv: statistics.fmean(r.nrmse for r in quiet if r.level_db == lv) for lv in levels}

    def by_snr(self) -> dict[float, float]:
        noisy = [r for r in self.rows if r.snr_db is not None]
        snrs = list(dict.fromkeys(r.snr_db for r in noisy if r.snr_db is not None))
        return {snr: statistics.fmean(r.nrmse for r in noisy if r.snr_db == snr) for snr in snrs}

    def to_dict(self) -> dict[str, object]:
        return {
            "rows": [dataclasses.asdict(r) for r in self.rows],
            "aggregate_nrmse_percent": {k: 100.0 * v for k, v in self.aggregate().items()},
            "efr_sum_nv": dict(self.efr),
            "config": self.config,
            "partial": self.partial,
            "failures": list(self.failures),
        }

    def csv_rows(self) -> tuple[list[str], list[list[object]]]:
        header = ["sentence", "condition", "level_db", "snr_db", "nrmse_percent"]
        rows: list[list[object]] = [
            [r.sentence, r.condition, r.level_db, "" if r.snr_db is None else r.snr_db, repr(100.0 * r.nrmse)]
            for r in self.rows
        ]
        return header, rows


def _condition_name(level_db: float, snr_db: float | None) -> str:
    return f"quiet@{level_db:g}dB" if snr_db is None else f"snr{snr_db:g}dB@{level_db:g}dB"


def evaluate(
    params: ModelParams | None,
    sentences: Sequence[tuple[str, FloatArray]],
    nh_profile: HearingProfile,
    hi_profile: HearingProfile,
    config: EvalConfig,
) -> EvalReport:
    """Level sweep in quiet, NRMSE at each SNR in speech-shaped noise and EFR_sum.

    Sentences are ``(name, 20 kHz samples)`` pairs. Conditions run in parallel
    and are merged in input order. A failing sentence/condition is logged and
    listed in :attr:`EvalReport.failures`; the report is then partial.

    :raises InvalidConfig: If the window does not suit the model's architecture.
    :raises DataError: If no sentences are given or nothing could be evaluated.
    """
    config.validate(params.spec if params is not None else None)
    if not sentences:
        raise DataError("no sentences to evaluate", op="evaluate", target="sentences")
    periphery_config = config.periphery_config()
    nh = Periphery(nh_profile, periphery_config)
    hi = Periphery(hi_profile, periphery_config)

    noise: FloatArray | None = None
    if config.snrs:
        ssn = ssn_from_corpus([s for _, s in sentences])
        noise = ssn.generate(max(s.size for _, s in sentences), config.seed)

    tasks: list[tuple[str, FloatArray, float, float | None]] = [
        (name, s, level, None) for level in config.levels for name, s in sentences
    ]
    tasks += [(name, s, config.snr_level_db, snr) for snr in config.snrs for name, s in sentences]

    def run(task: tuple[str, FloatArray, float, float | None]) -> EvalRow | str:
        name, s, level, snr = task
        condition = _condition_name(level, snr)
        try:
            value = _score(s, level, noise if snr is not None else None, snr, nh, hi, params, config)
        except HearloopError as exc:
            log.warning("evaluation of %s under %s failed: %s", name, condition, exc)
            return f"{name}/{condition}: {exc}"
        log.info("%s %s: NRMSE %.2f%%", name, condition, 100.0 * value)
        return EvalRow(name, condition, level, snr, value)

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        results = list(pool.map(run, tasks))
    rows = [r for r in results if isinstance(r, EvalRow)]
    failures = [r for r in results if isinstance(r, str)]
    if not rows:
        raise DataError(f"no condition could be evaluated ({len(failures)} failures)", op="evaluate")

    efr_values = efr_conditions(nh, hi, params, config) if config.efr else {}
    return EvalReport(rows, efr_values, config.to_dict(), failures)


# endregion
