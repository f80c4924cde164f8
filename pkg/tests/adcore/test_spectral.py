"""Tests for the differentiable DFT, magnitude spectrum and STFT."""

from __future__ import annotations

import numpy as np
import pytest

from hearloop import adcore as ad
from hearloop._errors import InvalidConfig, ShapeMismatch
from tests.helpers import assert_gradients_match, dft_oracle


class TestFftMag:
    """One-sided magnitude spectrum."""

    def test_matches_dense_dft(self, rng: np.random.Generator) -> None:
        x = rng.standard_normal(64)
        np.testing.assert_allclose(ad.fft_mag(ad.Array(x)).values, np.abs(dft_oracle(x)), rtol=0, atol=1e-10)

    def test_constant_signal(self) -> None:
        mag = ad.fft_mag(ad.Array(np.full(64, 0.5))).values
        assert mag.shape == (33,)
        assert mag[0] == pytest.approx(32.0)
        np.testing.assert_allclose(mag[1:], 0.0, atol=1e-10)

    def test_odd_length_rejected(self) -> None:
        with pytest.raises(ShapeMismatch):
            ad.fft_mag(ad.Array(np.ones(63)))

    def test_gradient(self, rng: np.random.Generator) -> None:
        assert_gradients_match(lambda v: ad.sum(ad.fft_mag(v)), [rng.standard_normal(32)])

    def test_power_gradient(self, rng: np.random.Generator) -> None:
        assert_gradients_match(
            lambda v: ad.sum(ad.magnitude(ad.rfft_parts(v), squared=True)), [rng.standard_normal((2, 16))]
        )

    def test_zero_magnitude_has_zero_gradient(self) -> None:
        x = ad.Array(np.zeros(8), requires_grad=True)
        with ad.Tape():
            y = ad.sum(ad.fft_mag(x))
        ad.backward(y)
        np.testing.assert_array_equal(x.grad, np.zeros(8))


class TestBinFrequencies:
    def test_mapping(self) -> None:
        freqs = ad.bin_frequencies(2048, 20_000.0)
        assert freqs.size == 1025
        assert freqs[0] == 0.0
        assert freqs[1] == pytest.approx(20_000.0 / 2048)
        assert freqs[-1] == pytest.approx(10_000.0)


class TestStft:
    """Hann-windowed short-time spectra."""

    def test_hann_is_periodic_and_read_only(self) -> None:
        win = ad.hann_window(8)
        assert win[0] == 0.0
        assert win[4] == pytest.approx(1.0)
        with pytest.raises(ValueError):
            win[0] = 1.0

    def test_zeros_give_zero_spectrum(self) -> None:
        out = ad.stft_mag(ad.Array(np.zeros(4096)))
        assert out.shape == (3, 1025)
        assert not np.any(out.values)

    def test_frames_match_windowed_dft(self) -> None:
        n, fs = 2048, 20_000.0
        t = np.arange(2 * n) / fs
        x = np.sin(2 * np.pi * (64 * fs / n) * t)
        out = ad.stft_mag(ad.Array(x), n).values
        for f in range(out.shape[0]):
            segment = x[f * n // 2 : f * n // 2 + n] * ad.hann_window(n)
            np.testing.assert_allclose(out[f], np.abs(dft_oracle(segment)), rtol=0, atol=1e-8)
        assert int(np.argmax(out[0])) == 64

    def test_custom_hop(self) -> None:
        assert ad.stft_mag(ad.Array(np.ones(64)), 16, 8).shape == (7, 9)

    def test_complex_output_layout(self, rng: np.random.Generator) -> None:
        x = rng.standard_normal(32)
        out = ad.stft_mag(ad.Array(x), 16, complex_out=True).values
        spec = np.fft.rfft(x[:16] * ad.hann_window(16))
        assert out.shape == (3, 18)
        np.testing.assert_allclose(out[0, :9], spec.real, atol=1e-12)
        np.testing.assert_allclose(out[0, 9:], spec.imag, atol=1e-12)

    def test_shift_moves_phase_not_magnitude(self) -> None:
        x = np.cos(2 * np.pi * np.arange(256) / 8)
        shifted = np.roll(x, 3)
        mag = [ad.stft_mag(ad.Array(v), 64).values for v in (x, shifted)]
        parts = [ad.stft_mag(ad.Array(v), 64, complex_out=True).values for v in (x, shifted)]
        np.testing.assert_allclose(mag[0], mag[1], rtol=0, atol=1e-9)
        assert np.max(np.abs(parts[0] - parts[1])) > 10.0

    def test_squared_and_complex_conflict(self) -> None:
        with pytest.raises(InvalidConfig):
            ad.stft_mag(ad.Array(np.ones(32)), 16, squared=True, complex_out=True)

    def test_short_signal(self) -> None:
        with pytest.raises(ShapeMismatch):
            ad.stft_mag(ad.Array(np.ones(100)), 128)

    def test_gradient(self, rng: np.random.Generator) -> None:
        assert_gradients_match(lambda v: ad.sum(ad.stft_mag(v, 16, 4, squared=True)), [rng.standard_normal(48)])
