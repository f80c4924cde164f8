"""Differentiable stages of the surrogate periphery.

Every stage takes and returns :class:`~hearloop.adcore.Array` values so that
gradients flow from the summed response back to the input pressure signal.
Filter coefficients are constants of the model.
"""

from __future__ import annotations

import functools
import math
from typing import TYPE_CHECKING

import numpy as np
import scipy.signal
import scipy.special

from hearloop import adcore as ad
from hearloop._errors import InvalidConfig, ShapeMismatch
from hearloop.periphery._cfmap import erb_hz
from hearloop.periphery._config import PeripheryConfig
from hearloop.periphery._neurogram import Neurogram

if TYPE_CHECKING:
    from hearloop._types import FloatArray
    from hearloop.periphery._cfmap import CFMap
    from hearloop.periphery._config import FiberType
    from hearloop.periphery._profile import FiberCounts, HearingProfile


# region: filter design
@functools.lru_cache(maxsize=16)
def middle_ear_coefficients(config: PeripheryConfig) -> tuple[FloatArray, FloatArray]:
    """``(b, a)`` of the Butterworth band-pass middle-ear filter."""
    b, a = scipy.signal.butter(
        config.middle_ear_order, config.middle_ear_band_hz, btype="bandpass", fs=config.sample_rate_hz
    )
    return np.asarray(b, dtype=np.float64), np.asarray(a, dtype=np.float64)


def cochlear_filter_coefficients(cf_hz: FloatArray, config: PeripheryConfig) -> tuple[FloatArray, FloatArray]:
    """One constant-peak (0 dB) band-pass biquad per CF, bandwidth ``erb_scale * ERB(cf)``.

    Returns ``(b, a)`` banks of shape ``[n_channels, 3]``. The cochlear
    filter of a channel is this biquad applied twice. Design frequencies are
    capped at ``max_design_ratio * sample_rate_hz``.
    """
    fs = config.sample_rate_hz
    f0 = np.minimum(np.asarray(cf_hz, dtype=np.float64), config.max_design_ratio * fs)
    q = f0 / (config.erb_scale * erb_hz(f0))
    w0 = 2.0 * np.pi * f0 / fs
    alpha = np.sin(w0) / (2.0 * q)
    a0 = 1.0 + alpha
    b = np.stack([alpha, np.zeros_like(alpha), -alpha], axis=1) / a0[:, None]
    a = np.stack([a0, -2.0 * np.cos(w0), 1.0 - alpha], axis=1) / a0[:, None]
    return b, a


@functools.lru_cache(maxsize=16)
def ihc_lowpass_coefficients(config: PeripheryConfig) -> tuple[FloatArray, FloatArray]:
    b, a = scipy.signal.butter(1, config.ihc_cutoff_hz, btype="lowpass", fs=config.sample_rate_hz)
    return np.asarray(b, dtype=np.float64), np.asarray(a, dtype=np.float64)


def adaptation_coefficients(tau_s: float, sample_rate_hz: float) -> tuple[FloatArray, FloatArray]:
    """Unit-DC-gain one-pole smoother ``y[n] = d*y[n-1] + (1-d)*x[n]``, ``d = exp(-1/(fs*tau))``."""
    decay = math.exp(-1.0 / (sample_rate_hz * tau_s))
    return np.array([1.0 - decay]), np.array([1.0, -decay])


# endregion


def middle_ear(signal: ad.Array, config: PeripheryConfig | None = None) -> ad.Array:
    """Fixed linear band-pass from ear-canal pressure to stapes drive."""
    b, a = middle_ear_coefficients(config or PeripheryConfig())
    return ad.lfilter(signal, b, a)


def cochlear_response(
    signal: ad.Array,
    ohc_loss_db: FloatArray,
    coefficients: tuple[FloatArray, FloatArray],
    config: PeripheryConfig,
) -> ad.Array:
    """Dual-path filterbank on precomputed filters: ``[T] -> [CF, T]``.

    The active path amplifies the band-passed signal by the maximum gain
    minus the OHC loss and compresses it smoothly,
    ``y = g*u / (1 + (g*u/K)**2) ** ((1 - c) / 2)`` with ``K`` the NH output
    at the knee, then band-passes again. The passive path is the band-passed
    signal at a fixed gain.
    """
    b, a = coefficients
    loss = np.asarray(ohc_loss_db, dtype=np.float64)
    if loss.shape != (b.shape[0],):
        raise ShapeMismatch(
            "one OHC loss per channel required",
            op="cochlear_stage",
            target="channels",
            expected=b.shape[0],
            actual=loss.shape,
        )
    if np.any(loss > config.max_active_gain_db):
        raise InvalidConfig(
            f"OHC loss exceeds the maximum active gain of {config.max_active_gain_db} dB",
            op="cochlear_stage",
            target="ohc_loss_db",
        )
    u = ad.lfilter(ad.lfilter(signal, b, a), b, a)
    gain = (10.0 ** ((config.max_active_gain_db - loss) / 20.0))[:, None]
    driven = ad.mul(u, gain)
    c = config.compression_exponent
    if c < 1.0:
        knee = 10.0 ** (config.max_active_gain_db / 20.0) * config.knee_amplitude
        softness = ad.add(1.0, ad.scale(ad.square(driven), 1.0 / knee**2))
        driven = ad.mul(driven, ad.power(softness, -(1.0 - c) / 2.0))
    active = ad.lfilter(ad.lfilter(driven, b, a), b, a)
    passive = ad.scale(u, 10.0 ** (config.passive_gain_db / 20.0))
    return ad.add(active, passive)


def cochlear_stage(
    signal: ad.Array,
    profile: HearingProfile,
    cf_map: CFMap,
    config: PeripheryConfig | None = None,
) -> ad.Array:
    """Basilar-membrane drive per CF for *profile*: ``[T] -> [CF, T]``."""
    cfg = config or PeripheryConfig()
    coefficients = cochlear_filter_coefficients(cf_map.frequencies, cfg)
    return cochlear_response(signal, profile.ohc_loss_db(cf_map), coefficients, cfg)


def ihc_stage(bm: ad.Array, config: PeripheryConfig | None = None) -> ad.Array:
    """Smooth asymmetric rectification followed by a first-order lowpass.

    ``f(v) = (sqrt(v**2 + e**2) - e) * (1 + s * tanh(v / e))`` is zero at rest,
    non-negative and favours depolarizing (positive) drive.
    """
    cfg = config or PeripheryConfig()
    eps = cfg.rectifier_eps
    envelope = ad.smooth_abs(bm, eps)
    asym = ad.add(1.0, ad.scale(ad.tanh(ad.scale(bm, 1.0 / eps)), cfg.rectifier_asymmetry))
    b, a = ihc_lowpass_coefficients(cfg)
    return ad.add(ad.lfilter(ad.mul(envelope, asym), b, a), cfg.ihc_rest)


def resting_drive(threshold_db: float, width_db: float) -> float:
    """Rate-level sigmoid at zero drive, evaluated exactly as :func:`anf_stage` does."""
    return float(scipy.special.expit((0.0 - threshold_db) * (1.0 / width_db)))


def anf_stage(ihc: ad.Array, fiber: FiberType, config: PeripheryConfig | None = None) -> ad.Array:
    """Adapting firing rate (spikes/s) of one fiber type.

    Drive in dB above ``drive_ref`` passes a sigmoidal rate-level function
    mapped so that rest gives exactly the spontaneous rate and saturation the
    onset maximum. The driven part ``e = R - SR`` is then divided by
    ``1 + (k_f * LP_f(e) + k_s * LP_s(e)) / (R_max - SR)`` where ``LP`` are
    one-pole smoothers with the fast and slow adaptation time constants.
    """
    cfg = config or PeripheryConfig()
    fp = cfg.fiber(fiber)
    span = fp.max_rate - fp.spont_rate
    above_rest = ad.sub(ihc, cfg.ihc_rest)
    drive_db = ad.scale(ad.log10(ad.add(1.0, ad.scale(above_rest, 1.0 / cfg.drive_ref))), 20.0)
    q = ad.sigmoid(ad.scale(ad.sub(drive_db, fp.threshold_db), 1.0 / fp.width_db))
    q0 = resting_drive(fp.threshold_db, fp.width_db)
    excess = ad.scale(ad.sub(q, q0), span / (1.0 - q0))
    fast = ad.lfilter(excess, *adaptation_coefficients(fp.tau_fast_s, cfg.sample_rate_hz))
    slow = ad.lfilter(excess, *adaptation_coefficients(fp.tau_slow_s, cfg.sample_rate_hz))
    depression = ad.add(1.0, ad.add(ad.scale(fast, fp.k_fast / span), ad.scale(slow, fp.k_slow / span)))
    return ad.add(ad.div(excess, depression), fp.spont_rate)


def _weighted_sum(r_h: ad.Array, r_m: ad.Array, r_l: ad.Array, counts: FiberCounts) -> ad.Array:
    if not r_h.shape == r_m.shape == r_l.shape:
        raise ShapeMismatch(
            "fiber responses differ in shape",
            op="an_sum",
            target="rates",
            expected=r_h.shape,
            actual=(r_m.shape, r_l.shape),
        )
    return ad.add(ad.add(ad.scale(r_h, counts.H), ad.scale(r_m, counts.M)), ad.scale(r_l, counts.L))


def an_sum(r_h: Neurogram, r_m: Neurogram, r_l: Neurogram, counts: FiberCounts) -> Neurogram:
    """Summed response ``H*r_H + M*r_M + L*r_L``."""
    return r_h.with_rates(_weighted_sum(r_h.rates, r_m.rates, r_l.rates, counts))


def population_response(r: Neurogram | ad.Array) -> ad.Array:
    """Sum over the CF axis."""
    rates = r.rates if isinstance(r, Neurogram) else r
    return ad.reduce(rates, axis=0, kind="sum")
