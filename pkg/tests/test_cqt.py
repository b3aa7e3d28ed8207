import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timbresep.core import CqtSpectrogram
from timbresep.cqt import (
    CQT,
    EnergyNormalizer,
    HarmonicStacker,
    cqt_direct,
    cqt_forward,
    energy_normalize,
    harmonic_shift,
    harmonic_stack,
    kernel_bank,
    q_factor,
)
from timbresep.core import midi_to_hz

from .conftest import tone


def direct_oracle(x, grid, frames):
    """Independent per-row evaluation: Hann-windowed complex exponential of duration Q/f."""
    sr = grid.sample_rate
    Q = 1.0 / (2 ** (1 / 36) - 1)
    out = np.zeros((grid.f_bins, len(frames)), complex)
    for r in range(grid.f_bins):
        f = grid.f_min * 2 ** ((r - 1) / 36)
        width = Q * sr / (2 * f)
        for j, t in enumerate(frames):
            c = t * grid.hop + grid.hop // 2
            n = np.arange(-int(np.ceil(width)) + 1, int(np.ceil(width)))
            w = 0.5 + 0.5 * np.cos(np.pi * n / width)
            idx = c + n
            ok = (idx >= 0) & (idx < x.size)
            out[r, j] = np.sum(x[idx[ok]] * w[ok] * np.exp(-2j * np.pi * f * n[ok] / sr)) / w.sum()
    return out


def interior_frames(T, grid, freq):
    half = q_factor() / freq / 2 / grid.frame_seconds
    lo, hi = int(np.ceil(half)) + 1, T - int(np.ceil(half)) - 1
    return np.arange(lo, hi)


class TestKernelBank:
    def test_q_and_ratio(self, grid):
        bank = kernel_bank(grid)
        assert bank.q == pytest.approx(1 / (2 ** (1 / 36) - 1))
        assert bank.kernels.shape[1] == 36
        np.testing.assert_allclose(bank.frequencies[1:] / bank.frequencies[:-1], 2 ** (1 / 36))
        assert bank.octave_hop(3) == 32

    def test_kernels_unit_dc_gain_of_window(self, grid):
        bank = kernel_bank(grid)
        # |sum k| is small (band-pass) but sum |k| of the window equals 1
        assert np.all(np.abs(bank.kernels).sum(axis=0) == pytest.approx(1.0))


class TestForward:
    def test_a4_tone(self, grid):
        x = tone(440.0, 2.0)
        Q = np.abs(cqt_forward(x, grid).data)
        frames = interior_frames(Q.shape[1], grid, 440.0)
        expected = 3 * (69 - 24) + 1
        assert np.all(np.abs(Q[:, frames].argmax(axis=0) - expected) <= 1)

    def test_zero_audio(self, grid):
        Q = cqt_forward(np.zeros(22050), grid)
        assert Q.data.shape == (288, 22050 // 256) and not np.any(Q.data)

    def test_linear(self, grid):
        x = tone(300.0, 1.0, amps=(1, 0.5))
        a = cqt_forward(x, grid).data
        b = cqt_forward(2.5 * x, grid).data
        np.testing.assert_allclose(b, 2.5 * a, rtol=1e-10, atol=1e-12)

    def test_shape(self, grid):
        Q = cqt_forward(np.random.default_rng(0).normal(size=256 * 37 + 100), grid)
        assert isinstance(Q, CqtSpectrogram) and Q.data.shape == (288, 37)

    def test_too_short(self, grid):
        with pytest.raises(ValueError, match="audio too short"):
            cqt_forward(np.zeros(100), grid)

    @pytest.mark.parametrize("pitch", [24, 30, 41, 55, 69, 80, 95, 107])
    def test_row_mapping_full_range(self, grid, pitch):
        f = float(midi_to_hz(pitch))
        seconds = max(2.0, 2.5 * q_factor() / f)
        Q = np.abs(cqt_forward(tone(f, seconds), grid).data)
        frames = interior_frames(Q.shape[1], grid, f)
        assert frames.size > 0
        assert np.all(np.abs(Q[:, frames].argmax(axis=0) - (3 * (pitch - 24) + 1)) <= 1)

    def test_matches_independent_direct_evaluation(self, grid):
        x = tone(220.0, 4.0, amps=(1, 0.5, 0.3)) + tone(1234.5, 4.0)
        frames = np.array([150, 170, 190])
        fast = cqt_forward(x, grid).data[:, frames]
        ref = direct_oracle(x, grid, frames)
        rel = np.sqrt(np.mean(np.abs(fast - ref) ** 2) / np.mean(np.abs(ref) ** 2))
        assert rel <= 1e-2
        # the packaged direct evaluation agrees with the independent one
        np.testing.assert_allclose(cqt_direct(x, grid, frames), ref, rtol=1e-9, atol=1e-12)


class TestEnergyNormalize:
    def test_unit_std(self, rng):
        Q = rng.normal(size=(288, 40)) * (1 + rng.random(40)) + 1j * rng.normal(size=(288, 40))
        Qn = energy_normalize(Q)
        e = np.sum(np.abs(Qn) ** 2, axis=0)
        assert np.std(e, ddof=1) == pytest.approx(1.0, abs=1e-6)

    def test_fixed_point(self, rng):
        Q = rng.normal(size=(10, 30)) + 0j
        Q = energy_normalize(Q)
        np.testing.assert_allclose(energy_normalize(Q), Q, rtol=1e-9)

    def test_idempotent(self, rng):
        Q = rng.normal(size=(288, 20)) * 7
        once = energy_normalize(Q)
        np.testing.assert_allclose(energy_normalize(once), once, rtol=1e-6)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32), st.floats(1e-3, 1e3))
    def test_scale_invariant(self, seed, c):
        r = np.random.default_rng(seed)
        Q = r.normal(size=(12, 9)) + 1j * r.normal(size=(12, 9))
        np.testing.assert_allclose(energy_normalize(c * Q), energy_normalize(Q), rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(energy_normalize(-c * Q), -energy_normalize(Q), rtol=1e-9, atol=1e-12)

    def test_phase_preserved(self, rng):
        Q = rng.normal(size=(5, 6)) + 1j * rng.normal(size=(5, 6))
        Qn = energy_normalize(Q)
        np.testing.assert_allclose(np.angle(Qn), np.angle(Q), atol=1e-12)

    def test_silent_returned_unchanged(self):
        Q = np.ones((4, 5), complex)  # identical frames: zero spread
        assert energy_normalize(Q) is Q

    def test_one_frame_error(self):
        with pytest.raises(ValueError):
            energy_normalize(np.ones((4, 1)))

    def test_spectrogram_wrapper(self, rng):
        Q = CqtSpectrogram(rng.normal(size=(288, 5)))
        assert isinstance(energy_normalize(Q), CqtSpectrogram)


class TestHarmonicStack:
    def test_identity(self, rng):
        Q = rng.normal(size=(288, 4))
        out = harmonic_stack(Q, [1])
        assert out.shape == (1, 252, 4)
        np.testing.assert_array_equal(out[0], Q[:252])

    def test_octave_shift(self):
        assert harmonic_shift(2) == 36
        assert harmonic_shift(0.5) == -36
        assert harmonic_shift(3) == 57

    def test_shift_values(self, rng):
        Q = rng.normal(size=(288, 3))
        out = harmonic_stack(Q, [0.5, 2])
        np.testing.assert_array_equal(out[0, :36], 0)
        np.testing.assert_array_equal(out[0, 36:], Q[: 252 - 36])
        np.testing.assert_array_equal(out[1], Q[36:288])

    def test_unknown(self, rng):
        with pytest.raises(ValueError):
            harmonic_stack(rng.normal(size=(288, 3)), [9])

    def test_tone_channels_align(self, grid):
        f0 = float(midi_to_hz(48))
        Q = np.abs(cqt_forward(tone(f0, 2.0, amps=(1, 1, 1, 1)), grid).data)
        stack = harmonic_stack(Q, [1, 2, 3, 4])
        frames = interior_frames(Q.shape[1], grid, f0)
        row = 3 * (48 - 24) + 1
        for h in range(4):
            # each channel has a local peak at the fundamental's row
            local = stack[h][row - 6 : row + 7][:, frames].argmax(axis=0) + row - 6
            assert np.all(np.abs(local - row) <= 1)


class TestEstimators:
    def test_pipeline(self, rng):
        x = tone(440.0, 1.0)
        Q = CQT().fit().transform(x)
        norm = EnergyNormalizer().fit(Q)
        np.testing.assert_allclose(norm.transform(Q), energy_normalize(Q))
        stacked = HarmonicStacker(harmonics=(1, 2)).fit().transform(norm.transform(Q))
        assert stacked.shape == (2, 252, Q.shape[1])
        assert CQT().get_params()["grid"].f_bins == 288

    def test_not_fitted(self):
        from sklearn.exceptions import NotFittedError

        with pytest.raises(NotFittedError):
            EnergyNormalizer().transform(np.ones((3, 3)))
