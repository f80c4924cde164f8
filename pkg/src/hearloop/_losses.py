"""Loss family: distances between NH and HI auditory-nerve responses and stimuli.

Every term is a mean absolute error (MAE) between a representation of the
normal-hearing response ``r`` (or stimulus ``x``) and the hearing-impaired
response ``r_hat`` to the processed stimulus ``x_hat``. Terms are combined
with raw weights by :func:`compose`.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import TYPE_CHECKING

import numpy as np
import scipy.ndimage

from hearloop import adcore as ad
from hearloop._errors import InvalidConfig, ShapeMismatch
from hearloop.periphery import Neurogram, population_response
from hearloop.periphery._config import _reject_unknown

if TYPE_CHECKING:
    from collections.abc import Mapping

    import numpy.typing as npt

    from hearloop._types import BoolArray, FloatArray
    from hearloop.periphery import CFMap

Response = Neurogram | ad.Array


class LossKind(enum.Enum):
    """What a loss term compares."""

    TIME_CHANNELS = "time_channels"
    TIME_POPULATION = "time_population"
    STFT_CHANNELS = "stft_channels"
    STFT_POPULATION = "stft_population"
    STIMULUS_HIGHFREQ = "stimulus_highfreq"


_STFT_KINDS = frozenset({LossKind.STFT_CHANNELS, LossKind.STFT_POPULATION})
_LABEL_STEMS = {
    LossKind.TIME_CHANNELS: "l_r",
    LossKind.TIME_POPULATION: "l_rp",
    LossKind.STFT_CHANNELS: "l_R",
    LossKind.STFT_POPULATION: "l_Rp",
    LossKind.STIMULUS_HIGHFREQ: "l_X",
}


# region: configuration
@dataclasses.dataclass(frozen=True)
class LossTerm:
    """One weighted term of a joint loss.

    :param kind: The compared representation.
    :param weight: Raw multiplier, > 0.
    :param squared: Compare squared responses (time kinds) or power
        spectrograms (STFT kinds).
    :param complex_stft: Compare real and imaginary STFT parts instead of
        magnitudes (STFT kinds only).
    """

    kind: LossKind
    weight: float = 1.0
    squared: bool = False
    complex_stft: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.kind, LossKind):
            try:
                object.__setattr__(self, "kind", LossKind(self.kind))
            except ValueError:
                allowed = sorted(k.value for k in LossKind)
                raise InvalidConfig(
                    f"Unknown loss kind {self.kind!r}. Allowed: {allowed}", op="LossTerm", target="kind"
                ) from None
        object.__setattr__(self, "weight", float(self.weight))

    @property
    def label(self) -> str:
        """Short name used in breakdowns and loss logs, e.g. ``l_r2`` or ``l_Rc``."""
        stem = _LABEL_STEMS[self.kind]
        if self.complex_stft:
            return f"{stem}c"
        return f"{stem}2" if self.squared else stem

    def validate(self) -> None:
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise InvalidConfig(f"weight must be finite and > 0, got {self.weight}", op="LossTerm", target=self.label)
        if self.complex_stft and self.kind not in _STFT_KINDS:
            raise InvalidConfig("complex_stft applies to STFT terms only", op="LossTerm", target=self.label)
        if self.complex_stft and self.squared:
            raise InvalidConfig("a complex STFT term cannot be squared", op="LossTerm", target=self.label)
        if self.squared and self.kind is LossKind.STIMULUS_HIGHFREQ:
            raise InvalidConfig("the stimulus term cannot be squared", op="LossTerm", target=self.label)

    def to_dict(self) -> dict[str, object]:
        return {
            "kind": self.kind.value,
            "weight": self.weight,
            "squared": self.squared,
            "complex_stft": self.complex_stft,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> LossTerm:
        _reject_unknown(data, {f.name for f in dataclasses.fields(cls)}, "loss term")
        if "kind" not in data:
            raise InvalidConfig("loss term needs a 'kind'", op="from_dict", target="loss term")
        try:
            term = cls(
                kind=data["kind"],  # type: ignore[arg-type]
                weight=float(data.get("weight", 1.0)),  # type: ignore[arg-type]
                squared=bool(data.get("squared", False)),
                complex_stft=bool(data.get("complex_stft", False)),
            )
        except (TypeError, ValueError) as exc:
            raise InvalidConfig(f"invalid loss term: {exc}", op="from_dict", target="loss term") from None
        term.validate()
        return term


@dataclasses.dataclass(frozen=True)
class ResponseThreshold:
    """Moving threshold on the NH response: ``T_r = fraction * (max - min) + min``
    of the moving RMS, with moving extrema over ``extrema_win`` samples."""

    fraction: float = 0.4
    rms_win: int = 51
    extrema_win: int = 1001

    def validate(self) -> None:
        if not 0.0 <= self.fraction <= 1.0:
            raise InvalidConfig(f"fraction must be in [0, 1], got {self.fraction}", target="response_threshold")
        for name in ("rms_win", "extrema_win"):
            win = getattr(self, name)
            if win < 1 or win % 2 == 0:
                raise InvalidConfig(f"{name} must be a positive odd integer, got {win}", target="response_threshold")


@dataclasses.dataclass(frozen=True)
class StimulusThreshold:
    """Excludes samples whose moving stimulus RMS is below ``fraction`` of its maximum."""

    fraction: float = 0.01
    rms_win: int = 101

    def validate(self) -> None:
        if not 0.0 <= self.fraction <= 1.0:
            raise InvalidConfig(f"fraction must be in [0, 1], got {self.fraction}", target="stimulus_threshold")
        if self.rms_win < 1 or self.rms_win % 2 == 0:
            raise InvalidConfig(
                f"rms_win must be a positive odd integer, got {self.rms_win}", target="stimulus_threshold"
            )


@dataclasses.dataclass(frozen=True)
class LossSpec:
    """A joint loss: weighted terms plus optional modifiers.

    :param terms: At least one term; labels must be unique.
    :param freq_emphasis: Maximum attenuation of the highest CF for the
        channel-wise time term, or ``None`` for no emphasis.
    :param response_threshold: Restrict the channel-wise time term to samples
        above the moving NH response threshold.
    :param stimulus_threshold: Exclude samples where the stimulus is near silent
        from all response terms.
    :param stft_window: STFT window length in samples.
    :param stft_hop: STFT hop; half a window when ``None``.
    :param highfreq_cutoff_hz: Lower edge (exclusive) of the stimulus term.
    :param sample_rate_hz: Sample rate of the stimuli.
    """

    terms: tuple[LossTerm, ...]
    freq_emphasis: float | None = None
    response_threshold: ResponseThreshold | None = None
    stimulus_threshold: StimulusThreshold | None = None
    stft_window: int = 2048
    stft_hop: int | None = None
    highfreq_cutoff_hz: float = 8000.0
    sample_rate_hz: float = 20_000.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))

    def validate(self) -> None:
        """:raises InvalidConfig: If the spec cannot be evaluated."""
        if not self.terms:
            raise InvalidConfig("a loss needs at least one term", op="LossSpec", target="terms")
        labels = [t.label for t in self.terms]
        for term in self.terms:
            term.validate()
        duplicates = sorted({lb for lb in labels if labels.count(lb) > 1})
        if duplicates:
            raise InvalidConfig(f"duplicate loss terms {duplicates}", op="LossSpec", target="terms")
        if self.freq_emphasis is not None and not 0.0 <= self.freq_emphasis < 1.0:
            raise InvalidConfig(
                f"freq_emphasis must be in [0, 1), got {self.freq_emphasis}", op="LossSpec", target="freq_emphasis"
            )
        if self.response_threshold is not None:
            self.response_threshold.validate()
        if self.stimulus_threshold is not None:
            self.stimulus_threshold.validate()
        if self.stft_window < 2 or self.stft_window % 2:
            raise InvalidConfig(
                f"stft_window must be even and >= 2, got {self.stft_window}", op="LossSpec", target="stft_window"
            )
        if self.stft_hop is not None and self.stft_hop < 1:
            raise InvalidConfig(f"stft_hop must be >= 1, got {self.stft_hop}", op="LossSpec", target="stft_hop")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(t.label for t in self.terms)

    def weights(self) -> dict[str, float]:
        return {t.label: t.weight for t in self.terms}

    def to_dict(self) -> dict[str, object]:
        return {
            "terms": [t.to_dict() for t in self.terms],
            "freq_emphasis": self.freq_emphasis,
            "response_threshold": dataclasses.asdict(self.response_threshold) if self.response_threshold else None,
            "stimulus_threshold": dataclasses.asdict(self.stimulus_threshold) if self.stimulus_threshold else None,
            "stft_window": self.stft_window,
            "stft_hop": self.stft_hop,
            "highfreq_cutoff_hz": self.highfreq_cutoff_hz,
            "sample_rate_hz": self.sample_rate_hz,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> LossSpec:
        """Construct from parsed JSON.

        :raises InvalidConfig: On unknown keys or invalid values.
        """
        _reject_unknown(data, {f.name for f in dataclasses.fields(cls)}, "loss")
        raw_terms = data.get("terms")
        if not isinstance(raw_terms, list) or not all(isinstance(t, dict) for t in raw_terms):
            raise InvalidConfig("'terms' must be a list of objects", op="from_dict", target="terms")
        kwargs: dict[str, object] = {"terms": tuple(LossTerm.from_dict(t) for t in raw_terms)}
        thresholds: dict[str, type[ResponseThreshold] | type[StimulusThreshold]] = {
            "response_threshold": ResponseThreshold,
            "stimulus_threshold": StimulusThreshold,
        }
        for key, klass in thresholds.items():
            raw = data.get(key)
            if raw is None:
                continue
            if not isinstance(raw, dict):
                raise InvalidConfig(f"'{key}' must be an object or null", op="from_dict", target=key)
            _reject_unknown(raw, {f.name for f in dataclasses.fields(klass)}, key)
            kwargs[key] = klass(**raw)
        for key in ("freq_emphasis", "stft_window", "stft_hop", "highfreq_cutoff_hz", "sample_rate_hz"):
            if key in data:
                kwargs[key] = data[key]
        try:
            spec = cls(**kwargs)  # type: ignore[arg-type]
        except TypeError as exc:
            raise InvalidConfig(f"invalid loss: {exc}", op="from_dict", target="loss") from None
        spec.validate()
        return spec


# endregion


# region: helpers
def _rates(r: Response) -> ad.Array:
    return r.rates if isinstance(r, Neurogram) else ad.as_array(r)


def _check_pair(op: str, a: ad.Array, b: ad.Array) -> None:
    if a.shape != b.shape:
        raise ShapeMismatch(
            "NH and HI inputs differ in shape", op=op, target="responses", expected=a.shape, actual=b.shape
        )


def moving_rms(x: npt.ArrayLike, win: int) -> FloatArray:
    """Centered moving RMS along the last axis.

    Windows shrink at the edges instead of padding, so sample ``i`` averages
    ``x[max(0, i - win//2) : i + win//2 + 1]``.

    :raises InvalidConfig: If *win* is not a positive odd integer.
    """
    if win < 1 or win % 2 == 0:
        raise InvalidConfig(f"window must be a positive odd integer, got {win}", op="moving_rms", target="win")
    v = np.asarray(x, dtype=np.float64)
    n = v.shape[-1]
    half = win // 2
    pad = [(0, 0)] * (v.ndim - 1) + [(half, half)]
    sq = np.pad(v * v, pad)
    sums = np.lib.stride_tricks.sliding_window_view(sq, win, axis=-1).sum(axis=-1)
    idx = np.arange(n)
    counts = np.minimum(idx + half + 1, n) - np.maximum(idx - half, 0)
    return np.asarray(np.sqrt(sums / counts))


# endregion


# region: masks and weights
def freq_emphasis_weights(cf_map: CFMap, max_attenuation: float = 0.62) -> FloatArray:
    """Per-CF weights falling smoothly from 1 at the lowest CF to ``1 - max_attenuation`` at the highest.

    The shape is a logistic in log-frequency centred on the geometric mean of
    the extreme CFs with slope ``8 / ln(f_max / f_min)``, rescaled so the end
    values are exact.

    :raises InvalidConfig: If *max_attenuation* is outside ``[0, 1)``.
    """
    if not 0.0 <= max_attenuation < 1.0:
        raise InvalidConfig(
            f"max_attenuation must be in [0, 1), got {max_attenuation}", op="freq_emphasis_weights", target="max"
        )
    f = cf_map.frequencies
    if f.size == 1 or max_attenuation == 0.0:
        return np.ones_like(f)
    log_f = np.log(f)
    lo, hi = log_f[0], log_f[-1]
    slope = 8.0 / (hi - lo)
    s = 1.0 / (1.0 + np.exp(-slope * (log_f - 0.5 * (lo + hi))))
    s_norm = (s - s[0]) / (s[-1] - s[0])
    return np.asarray(1.0 - max_attenuation * s_norm)


def response_threshold(
    r: Response, fraction: float = 0.4, rms_win: int = 51, extrema_win: int = 1001
) -> BoolArray:
    """Per-sample mask of an NH response, true where the response strictly exceeds
    ``T_r = fraction * (rms_max - rms_min) + rms_min``.

    ``rms_max``/``rms_min`` are moving extrema (window *extrema_win*, shrinking
    at the edges) of the moving RMS (window *rms_win*) of each channel. A
    constant response gives an all-false mask.

    :raises InvalidConfig: If a window is even or longer than the response.
    """
    ResponseThreshold(fraction, rms_win, extrema_win).validate()
    v = _rates(r).values
    n = v.shape[-1]
    if rms_win > n or extrema_win > n:
        raise InvalidConfig(
            f"threshold windows ({rms_win}, {extrema_win}) exceed the response length {n}",
            op="response_threshold",
            target="time",
        )
    rms = moving_rms(v, rms_win)
    hi = scipy.ndimage.maximum_filter1d(rms, extrema_win, axis=-1, mode="nearest")
    lo = scipy.ndimage.minimum_filter1d(rms, extrema_win, axis=-1, mode="nearest")
    return np.asarray(v > fraction * (hi - lo) + lo)


def stimulus_threshold(
    x: npt.ArrayLike | ad.Array,
    rms_win: int = 101,
    fraction: float = 0.01,
    context: tuple[int, int] = (0, 0),
) -> BoolArray:
    """Mask of the samples where the stimulus moving RMS is at least *fraction* of its maximum.

    The threshold is computed over the whole stimulus; the returned mask drops
    ``context = (left, right)`` samples so that sample ``i`` of the result
    aligns with sample ``i`` of the context-trimmed neurogram. An all-zero
    stimulus gives an all-false mask.

    :raises InvalidConfig: If *rms_win* is even or the context exceeds the stimulus.
    """
    StimulusThreshold(fraction, rms_win).validate()
    v = x.values if isinstance(x, ad.Array) else np.asarray(x, dtype=np.float64)
    left, right = context
    n = v.shape[-1]
    if left < 0 or right < 0 or left + right >= n:
        raise InvalidConfig(f"context {context} does not fit a stimulus of {n}", op="stimulus_threshold")
    rms = moving_rms(v, rms_win)
    peak = float(rms.max())
    if peak == 0.0:
        return np.zeros(n - left - right, dtype=bool)
    return np.asarray(rms >= fraction * peak)[left : n - right]


# endregion


# region: terms
def loss_r(
    r: Response,
    r_hat: Response,
    squared: bool = False,
    cf_weights: npt.ArrayLike | None = None,
    mask: npt.ArrayLike | None = None,
) -> ad.Array:
    """MAE across CF and time between (optionally squared) responses.

    :param cf_weights: One non-negative weight per CF applied to both responses.
    :param mask: Boolean mask over time (``[T]``) or CF x time; ``False`` entries are excluded.
    :raises ShapeMismatch: If shapes differ or the weights/mask do not align.
    """
    a, b = _rates(r), _rates(r_hat)
    _check_pair("loss_r", a, b)
    if squared:
        a, b = ad.square(a), ad.square(b)
    if cf_weights is not None:
        w = np.asarray(cf_weights, dtype=np.float64)
        if w.shape != (a.shape[0],):
            raise ShapeMismatch(
                "one weight per CF required", op="loss_r", target="cf_weights", expected=a.shape[0], actual=w.shape
            )
        a, b = ad.mul(a, w[:, None]), ad.mul(b, w[:, None])
    return ad.mae(a, b, mask)


def loss_rp(r: Response, r_hat: Response, squared: bool = False, mask: npt.ArrayLike | None = None) -> ad.Array:
    """MAE between population responses (CF sums) of the (optionally squared) responses.

    :param mask: Boolean time mask ``[T]``.
    :raises ShapeMismatch: If shapes differ.
    """
    a, b = _rates(r), _rates(r_hat)
    _check_pair("loss_rp", a, b)
    if squared:
        a, b = ad.square(a), ad.square(b)
    return ad.mae(population_response(a), population_response(b), mask)


def _masked(a: ad.Array, mask: npt.ArrayLike | None) -> ad.Array:
    if mask is None:
        return a
    keep = np.asarray(mask, dtype=np.float64)
    return ad.mul(a, keep)


def loss_stft_channels(
    r: Response,
    r_hat: Response,
    squared: bool = False,
    complex_out: bool = False,
    *,
    window: int = 2048,
    hop: int | None = None,
    mask: npt.ArrayLike | None = None,
) -> ad.Array:
    """MAE between per-CF STFTs: magnitudes, power spectrograms when *squared*,
    or real and imaginary parts when *complex_out*.

    Samples excluded by *mask* are zeroed in both responses before the STFT.

    :raises ShapeMismatch: If shapes differ or the responses are shorter than *window*.
    """
    a, b = _rates(r), _rates(r_hat)
    _check_pair("loss_stft_channels", a, b)
    a, b = _masked(a, mask), _masked(b, mask)
    spec_a = ad.stft_mag(a, window, hop, squared=squared, complex_out=complex_out)
    spec_b = ad.stft_mag(b, window, hop, squared=squared, complex_out=complex_out)
    return ad.mae(spec_a, spec_b)


def loss_stft_population(
    r: Response,
    r_hat: Response,
    squared: bool = False,
    complex_out: bool = False,
    *,
    window: int = 2048,
    hop: int | None = None,
    mask: npt.ArrayLike | None = None,
) -> ad.Array:
    """:func:`loss_stft_channels` applied to the population responses."""
    a, b = _rates(r), _rates(r_hat)
    _check_pair("loss_stft_population", a, b)
    pa, pb = _masked(population_response(a), mask), _masked(population_response(b), mask)
    spec_a = ad.stft_mag(pa, window, hop, squared=squared, complex_out=complex_out)
    spec_b = ad.stft_mag(pb, window, hop, squared=squared, complex_out=complex_out)
    return ad.mae(spec_a, spec_b)


def loss_x_highfreq(
    x: npt.ArrayLike | ad.Array,
    x_hat: npt.ArrayLike | ad.Array,
    cutoff_hz: float = 8000.0,
    sample_rate_hz: float = 20_000.0,
) -> ad.Array:
    """MAE of one-sided FFT magnitudes over the bins strictly above *cutoff_hz*.

    Gives 0 when no bin lies above the cutoff.

    :raises ShapeMismatch: If the stimuli differ in length or the length is odd.
    """
    a, b = ad.as_array(x), ad.as_array(x_hat)
    if a.ndim != 1 or a.shape != b.shape:
        raise ShapeMismatch(
            "stimuli must be 1-D and of equal length",
            op="loss_x_highfreq",
            target="time",
            expected=a.shape,
            actual=b.shape,
        )
    freqs = ad.bin_frequencies(a.shape[0], sample_rate_hz)
    first = int(np.searchsorted(freqs, cutoff_hz, side="right"))
    if first >= freqs.size:
        return ad.Array(0.0)
    high = slice(first, None)
    return ad.mae(ad.getitem(ad.fft_mag(a), high), ad.getitem(ad.fft_mag(b), high))


# endregion


# region: composition
@dataclasses.dataclass(frozen=True, eq=False)
class LossBundle:
    """Inputs of one loss evaluation.

    :param x: Unprocessed stimulus (full length, with context).
    :param x_hat: Processed stimulus fed to the HI periphery.
    :param r: NH response to *x* (context-trimmed).
    :param r_hat: HI response to *x_hat* (context-trimmed).
    :param context_left: Samples trimmed from the start of the stimulus to get
        the response time axis; the rest of the difference is trimmed from the end.
    """

    x: ad.Array
    x_hat: ad.Array
    r: Neurogram
    r_hat: Neurogram
    context_left: int = 0

    def check(self) -> None:
        """:raises ShapeMismatch: If the parts are inconsistent."""
        if self.x.shape != self.x_hat.shape or self.x.ndim != 1:
            raise ShapeMismatch(
                "stimuli differ in shape",
                op="compose",
                target="stimuli",
                expected=self.x.shape,
                actual=self.x_hat.shape,
            )
        if self.r.rates.shape != self.r_hat.rates.shape:
            raise ShapeMismatch(
                "responses differ in shape",
                op="compose",
                target="responses",
                expected=self.r.rates.shape,
                actual=self.r_hat.rates.shape,
            )
        right = self.x.shape[0] - self.context_left - self.r.n_samples
        if self.context_left < 0 or right < 0:
            raise ShapeMismatch(
                "response is longer than the stimulus minus its context",
                op="compose",
                target="time",
                expected=self.x.shape[0] - self.context_left,
                actual=self.r.n_samples,
            )

    @property
    def context(self) -> tuple[int, int]:
        return self.context_left, self.x.shape[0] - self.context_left - self.r.n_samples


def evaluate_term(
    spec: LossSpec,
    term: LossTerm,
    bundle: LossBundle,
    *,
    time_mask: BoolArray | None = None,
    response_mask: BoolArray | None = None,
) -> ad.Array:
    """Unweighted value of one term of *spec* on *bundle*."""
    r, r_hat = bundle.r, bundle.r_hat
    if term.kind is LossKind.TIME_CHANNELS:
        weights = freq_emphasis_weights(r.cf_map, spec.freq_emphasis) if spec.freq_emphasis else None
        mask: npt.ArrayLike | None = time_mask
        if response_mask is not None:
            mask = response_mask if time_mask is None else response_mask & time_mask
        return loss_r(r, r_hat, term.squared, weights, mask)
    if term.kind is LossKind.TIME_POPULATION:
        return loss_rp(r, r_hat, term.squared, time_mask)
    if term.kind is LossKind.STFT_CHANNELS:
        return loss_stft_channels(
            r, r_hat, term.squared, term.complex_stft, window=spec.stft_window, hop=spec.stft_hop, mask=time_mask
        )
    if term.kind is LossKind.STFT_POPULATION:
        return loss_stft_population(
            r, r_hat, term.squared, term.complex_stft, window=spec.stft_window, hop=spec.stft_hop, mask=time_mask
        )
    return loss_x_highfreq(bundle.x, bundle.x_hat, spec.highfreq_cutoff_hz, spec.sample_rate_hz)


def compose(spec: LossSpec, bundle: LossBundle) -> tuple[ad.Array, dict[str, float]]:
    """Weighted sum of the terms of *spec*.

    Returns the total (differentiable when the inputs are) and a breakdown
    mapping each term label to its weighted contribution.

    :raises InvalidConfig: If *spec* is invalid.
    :raises ShapeMismatch: If the bundle is inconsistent.
    """
    spec.validate()
    bundle.check()
    time_mask = None
    if spec.stimulus_threshold is not None:
        st = spec.stimulus_threshold
        time_mask = stimulus_threshold(bundle.x, st.rms_win, st.fraction, bundle.context)
    response_mask = None
    if spec.response_threshold is not None:
        rt = spec.response_threshold
        response_mask = response_threshold(bundle.r, rt.fraction, rt.rms_win, rt.extrema_win)

    total: ad.Array | None = None
    breakdown: dict[str, float] = {}
    for term in spec.terms:
        value = evaluate_term(spec, term, bundle, time_mask=time_mask, response_mask=response_mask)
        contribution = ad.scale(value, term.weight)
        breakdown[term.label] = contribution.item()
        total = contribution if total is None else ad.add(total, contribution)
    assert total is not None
    return total, breakdown


# endregion


# region: presets
def _t(kind: LossKind, weight: float, *, squared: bool = False, complex_stft: bool = False) -> LossTerm:
    return LossTerm(kind, weight, squared, complex_stft)


_R = LossKind.TIME_CHANNELS
_RP = LossKind.TIME_POPULATION
_S = LossKind.STFT_CHANNELS
_SP = LossKind.STFT_POPULATION
_X = LossKind.STIMULUS_HIGHFREQ


def builtin_loss_presets() -> dict[str, LossSpec]:
    """The eight joint losses of the main comparison plus their training-constraint variants."""
    table = {
        "L_r": LossSpec((_t(_R, 1), _t(_X, 0.5))),
        "L_rR": LossSpec((_t(_R, 1), _t(_X, 0.5), _t(_S, 0.1))),
        "L_rrp": LossSpec((_t(_R, 1), _t(_X, 0.5), _t(_RP, 0.1))),
        "L_rrpRp": LossSpec((_t(_R, 1), _t(_X, 0.5), _t(_RP, 0.1), _t(_SP, 0.02))),
        "L_r2": LossSpec((_t(_R, 1, squared=True), _t(_X, 40))),
        "L_r2R2": LossSpec((_t(_R, 1, squared=True), _t(_X, 40), _t(_S, 0.0014, squared=True))),
        "L_r2rp2": LossSpec((_t(_R, 1, squared=True), _t(_X, 40), _t(_RP, 0.08, squared=True))),
        "L_r2rp2Rp2": LossSpec(
            (_t(_R, 1, squared=True), _t(_X, 40), _t(_RP, 0.08, squared=True), _t(_SP, 1e-5, squared=True))
        ),
    }
    variants = {
        "L_r+FE": dataclasses.replace(table["L_r"], freq_emphasis=0.62),
        "L_r+Tr": dataclasses.replace(table["L_r"], response_threshold=ResponseThreshold()),
        "L_rR_complex": LossSpec((_t(_R, 1), _t(_X, 0.5), _t(_S, 0.1, complex_stft=True))),
        "L_r2+Tx": dataclasses.replace(table["L_r2"], stimulus_threshold=StimulusThreshold()),
        "L_r2R2+Tx": dataclasses.replace(table["L_r2R2"], stimulus_threshold=StimulusThreshold()),
        "L_r2rp2Rp2+Tx": dataclasses.replace(table["L_r2rp2Rp2"], stimulus_threshold=StimulusThreshold()),
    }
    return {**table, **variants}


# endregion
