"""Audio plumbing: WAV I/O, resampling, SPL calibration and context padding."""

from __future__ import annotations

import io
import logging
import math
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np
import scipy.signal
import soundfile as sf

from hearloop import adcore as ad
from hearloop._errors import DataError, InvalidConfig, ShapeMismatch
from hearloop.periphery import P_REF_PA

if TYPE_CHECKING:
    import numpy.typing as npt

    from hearloop._types import FloatArray, PathLike

log = logging.getLogger(__name__)

MODEL_RATE_HZ = 20_000
KAISER_BETA = 5.0
WAV_SUBTYPES = ("PCM_16", "FLOAT")


# region: WAV I/O
def read_wav(path: PathLike) -> tuple[FloatArray, int]:
    """Read a mono WAV file as float64 samples in [-1, 1] and its sample rate.

    :raises DataError: If the file cannot be read, has more than one channel or no samples.
    """
    try:
        data, rate = sf.read(str(path), dtype="float64", always_2d=True)
    except (sf.SoundFileError, RuntimeError, OSError) as exc:
        raise DataError(f"cannot read WAV file: {exc}", op="read_wav", target=str(path)) from None
    if data.shape[1] != 1:
        raise DataError(f"expected a mono file, got {data.shape[1]} channels", op="read_wav", target=str(path))
    if data.shape[0] == 0:
        raise DataError("WAV file contains no samples", op="read_wav", target=str(path))
    return np.ascontiguousarray(data[:, 0]), int(rate)


def wav_bytes(signal: npt.ArrayLike, sample_rate_hz: int, subtype: str = "FLOAT") -> bytes:
    """Encode a mono signal as WAV bytes (``PCM_16`` or 32-bit ``FLOAT``)."""
    if subtype not in WAV_SUBTYPES:
        raise InvalidConfig(f"unsupported WAV subtype {subtype!r}. Allowed: {list(WAV_SUBTYPES)}", target="subtype")
    buf = io.BytesIO()
    sf.write(buf, np.asarray(signal, dtype=np.float64), int(sample_rate_hz), format="WAV", subtype=subtype)
    return buf.getvalue()


def write_wav(path: PathLike, signal: npt.ArrayLike, sample_rate_hz: int, subtype: str = "FLOAT") -> None:
    """Write a mono WAV file.

    :raises DataError: If the file cannot be written.
    """
    try:
        with open(path, "wb") as f:
            f.write(wav_bytes(signal, sample_rate_hz, subtype))
    except OSError as exc:
        raise DataError(f"cannot write WAV file: {exc}", op="write_wav", target=str(path)) from None


# endregion


def load_sentence(path: PathLike, rate_hz: int = MODEL_RATE_HZ) -> FloatArray:
    """Read a mono WAV file and resample it to *rate_hz*.

    :raises DataError: If the file cannot be read.
    """
    x, rate = read_wav(path)
    if rate != rate_hz:
        log.warning("resampling %s from %d Hz to %d Hz", path, rate, rate_hz)
        x = resample(x, rate, rate_hz)
    return x


# region: levels
def rms(x: npt.ArrayLike) -> float:
    v = np.asarray(x, dtype=np.float64)
    return float(np.sqrt(np.mean(v * v))) if v.size else 0.0


def spl_db(x: npt.ArrayLike) -> float:
    """Level in dB SPL of a pressure signal in pascals."""
    value = rms(x)
    return 20.0 * math.log10(value / P_REF_PA) if value > 0 else -math.inf


def target_rms(level_db: float) -> float:
    """RMS pressure of a signal at *level_db* dB SPL: ``p0 * 10 ** (level / 20)``."""
    return P_REF_PA * 10.0 ** (level_db / 20.0)


def calibrate(x: npt.ArrayLike, level_db: float) -> FloatArray:
    """Scale *x* so that its RMS corresponds to *level_db* dB SPL (re 20 uPa).

    :raises DataError: If *x* is silent.
    """
    v = np.asarray(x, dtype=np.float64)
    current = rms(v)
    if current == 0.0:
        raise DataError("cannot calibrate a silent signal", op="calibrate", target="signal")
    return v * (target_rms(level_db) / current)


# endregion


def resample(x: npt.ArrayLike, from_rate_hz: int, to_rate_hz: int = MODEL_RATE_HZ) -> FloatArray:
    """Polyphase windowed-sinc resampling (Kaiser window, beta 5).

    The output has ``ceil(len(x) * to / from)`` samples.
    """
    v = np.asarray(x, dtype=np.float64)
    if from_rate_hz <= 0 or to_rate_hz <= 0:
        raise InvalidConfig(f"sample rates must be > 0, got {from_rate_hz} -> {to_rate_hz}", op="resample")
    if from_rate_hz == to_rate_hz:
        return v.copy()
    ratio = Fraction(int(to_rate_hz), int(from_rate_hz))
    out = scipy.signal.resample_poly(v, ratio.numerator, ratio.denominator, window=("kaiser", KAISER_BETA))
    return np.asarray(out, dtype=np.float64)


# region: context
def pad_context(sentence: npt.ArrayLike, left: int = 7936, right: int = 256, total: int = 81_920) -> FloatArray:
    """Surround *sentence* with *left* leading zeros and trailing zeros up to *total* samples.

    At least *right* trailing zeros are always present.

    :raises DataError: If the sentence does not fit.
    """
    v = np.asarray(sentence, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeMismatch("sentence must be 1-D", op="pad_context", target="rank", expected=1, actual=v.ndim)
    if left + v.size + right > total:
        raise DataError(
            f"sentence of {v.size} samples does not fit in {total} samples with context ({left}, {right})",
            op="pad_context",
            target="length",
        )
    out = np.zeros(total)
    out[left : left + v.size] = v
    return out


def crop_context(x: ad.Array, left: int, right: int) -> ad.Array:
    """The part of *x* between the context margins (differentiable)."""
    n = x.shape[-1]
    if left < 0 or right < 0 or left + right >= n:
        raise ShapeMismatch(
            "context does not fit the signal", op="crop_context", target="time", expected=f"> {left + right}", actual=n
        )
    return ad.getitem(x, slice(left, n - right))


def attach_context(original: ad.Array | npt.ArrayLike, processed: ad.Array, left: int, right: int) -> ad.Array:
    """Put *processed* back between the context margins of *original*.

    The margins are taken verbatim from *original*; gradients flow to *processed* only.

    :raises ShapeMismatch: If the lengths do not add up.
    """
    orig = ad.as_array(original)
    n = orig.shape[-1]
    if processed.shape[-1] != n - left - right:
        raise ShapeMismatch(
            "processed part does not match the cropped length",
            op="attach_context",
            target="time",
            expected=n - left - right,
            actual=processed.shape[-1],
        )
    head = ad.Array(orig.values[:left])
    tail = ad.Array(orig.values[n - right :])
    return ad.concat([head, processed, tail], axis=0)


# endregion


def pad_to_multiple(x: npt.ArrayLike, multiple: int) -> FloatArray:
    """Zero-pad the end of *x* to the next multiple of *multiple* samples."""
    v = np.asarray(x, dtype=np.float64)
    extra = (-v.size) % multiple
    return np.concatenate([v, np.zeros(extra)]) if extra else v.copy()


def peak_limit(x: npt.ArrayLike, ceiling: float = 1.0) -> tuple[FloatArray, bool]:
    """Scale *x* down so that its peak does not exceed *ceiling*; report whether it did."""
    v = np.asarray(x, dtype=np.float64)
    peak = float(np.max(np.abs(v))) if v.size else 0.0
    if peak <= ceiling:
        return v.copy(), False
    reduction_db = 20.0 * math.log10(peak / ceiling)
    log.warning("output peak %.3f exceeds %.3f full scale; limiting by %.2f dB", peak, ceiling, reduction_db)
    return v * (ceiling / peak), True


def mix_at_snr(speech: npt.ArrayLike, noise: npt.ArrayLike, snr_db: float) -> FloatArray:
    """Add *noise* to *speech* scaled to ``20 * log10(rms(speech) / rms(noise)) = snr_db``.

    Only the first ``len(speech)`` noise samples are used. An infinite SNR
    returns the speech unchanged.

    :raises DataError: If the noise is shorter than the speech or either input is silent.
    """
    s = np.asarray(speech, dtype=np.float64)
    n = np.asarray(noise, dtype=np.float64)
    if n.size < s.size:
        raise DataError(
            f"noise ({n.size} samples) is shorter than the speech ({s.size})", op="mix_at_snr", target="noise"
        )
    if math.isinf(snr_db) and snr_db > 0:
        return s.copy()
    n = n[: s.size]
    speech_rms, noise_rms = rms(s), rms(n)
    if speech_rms == 0.0 or noise_rms == 0.0:
        raise DataError("cannot mix at an SNR with a silent input", op="mix_at_snr", target="energy")
    gain = speech_rms / (noise_rms * 10.0 ** (snr_db / 20.0))
    return s + gain * n
