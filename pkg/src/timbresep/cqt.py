"""Constant-Q analysis with octave-shared kernels, energy normalisation and harmonic stacking.

Only the 36 kernels of the top octave are built. Every lower octave reuses
them on a copy of the signal decimated by two once more, so the kernel length
in samples is the same at every octave while its duration doubles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_finite, check_is_fitted
from .core import DEFAULT_GRID, CqtSpectrogram, GridConfig

ALLOWED_HARMONICS = (0.5, 1, 2, 3, 4, 5, 6, 7, 8)
NORM_EPS = 1e-12
DECIMATION_TAPS = 65
DECIMATION_BETA = 9.0


def q_factor(bins_per_octave: int = 36) -> float:
    return 1.0 / (2.0 ** (1.0 / bins_per_octave) - 1.0)


def _hann(width: float) -> tuple[np.ndarray, np.ndarray]:
    """Hann window of continuous half-width ``width`` samples, sampled at the integers."""
    half = int(np.ceil(width)) - 1
    n = np.arange(-half, half + 1)
    return n, 0.5 * (1.0 + np.cos(np.pi * n / width))


@dataclass(frozen=True)
class CqtKernelBank:
    kernels: np.ndarray  # (2 * max_half + 1, bins_per_octave), zero-padded to a common support
    half_lengths: np.ndarray
    frequencies: np.ndarray  # top-octave centre frequencies in Hz
    lowpass: np.ndarray
    q: float
    grid: GridConfig

    @classmethod
    def build(cls, grid: GridConfig = DEFAULT_GRID) -> CqtKernelBank:
        bpo = grid.bins_per_octave
        q = q_factor(bpo)
        sr = grid.sample_rate
        freqs = grid.row_frequencies()[-bpo:]
        if freqs[-1] >= sr / 2:
            raise ValueError("top CQT bin lies above Nyquist")
        # each kernel lasts q / f seconds, independent of the rate it is sampled at
        widths = q * sr / (2.0 * freqs)
        halves = np.ceil(widths).astype(int) - 1
        hmax = int(halves.max())
        kernels = np.zeros((2 * hmax + 1, bpo), dtype=complex)
        for b, (f, width) in enumerate(zip(freqs, widths)):
            n, w = _hann(width)
            kernels[hmax + n, b] = w * np.exp(-2j * np.pi * f * n / sr) / w.sum()
        lowpass = signal.firwin(DECIMATION_TAPS, 0.5, window=("kaiser", DECIMATION_BETA))
        return cls(kernels, halves, freqs, lowpass, q, grid)

    @property
    def max_half(self) -> int:
        return int(self.half_lengths.max())

    def octave_hop(self, octave: int) -> int:
        """Hop in samples at the rate of ``octave`` (0 = top, full rate)."""
        return self.grid.hop >> octave


_BANKS: dict[GridConfig, CqtKernelBank] = {}


def kernel_bank(grid: GridConfig = DEFAULT_GRID) -> CqtKernelBank:
    bank = _BANKS.get(grid)
    if bank is None:
        bank = _BANKS[grid] = CqtKernelBank.build(grid)
    return bank


def _decimate(x: np.ndarray, lowpass: np.ndarray) -> np.ndarray:
    # zero-phase FIR (odd, symmetric) then keep even samples, so sample j of
    # the output sits at time 2j of the input
    y = signal.oaconvolve(x, lowpass, mode="same") if x.size >= lowpass.size else np.convolve(x, lowpass, mode="same")
    return y[::2]


def _frames_at(x: np.ndarray, centers: np.ndarray, half: int) -> np.ndarray:
    pad = np.pad(x, (half, half + 1))
    win = sliding_window_view(pad, 2 * half + 1)
    return win[centers]


def cqt_forward(audio, grid: GridConfig = DEFAULT_GRID) -> CqtSpectrogram:
    """Complex CQT with ``grid.f_bins`` rows and ``len(audio) // hop`` frames.

    Frame t is centred on sample ``t * hop + hop // 2``. Octave o is computed
    from the signal decimated o times, where the frame grid maps onto integer
    samples, so no interpolation between octave rates is needed.
    """
    x = check_finite(audio, "audio", ndim=1, allow_complex=False).astype(float)
    bank = kernel_bank(grid)
    if x.size < 2 * bank.max_half + 1 or x.size < grid.hop:
        raise ValueError(
            f"audio too short: {x.size} samples, need at least {max(2 * bank.max_half + 1, grid.hop)}"
        )
    n_frames = grid.n_frames(x.size)
    bpo = grid.bins_per_octave
    out = np.zeros((grid.f_bins, n_frames), dtype=complex)
    centers_full = np.arange(n_frames) * grid.hop + grid.hop // 2
    level = x
    for octave in range(grid.n_octaves_cqt):
        if octave:
            level = _decimate(level, bank.lowpass)
        centers = centers_full >> octave
        frames = _frames_at(level, centers, bank.max_half)
        top = grid.f_bins - octave * bpo
        out[top - bpo : top] = (frames @ bank.kernels).T
    return CqtSpectrogram(out, grid)


def cqt_direct(audio, grid: GridConfig = DEFAULT_GRID, frames=None) -> np.ndarray:
    """Reference CQT: every row evaluated at full rate with its own Hann kernel.

    Slow (the lowest kernels span ~1.6 s); meant as a check on ``cqt_forward``.
    Returns the complex (F, len(frames)) matrix.
    """
    x = np.asarray(audio, dtype=float)
    sr = grid.sample_rate
    q = q_factor(grid.bins_per_octave)
    n_frames = grid.n_frames(x.size)
    frames = np.arange(n_frames) if frames is None else np.asarray(frames)
    centers = frames * grid.hop + grid.hop // 2
    freqs = grid.row_frequencies()
    out = np.zeros((freqs.size, frames.size), dtype=complex)
    for r, f in enumerate(freqs):
        width = q * sr / (2.0 * f)
        half = int(np.ceil(width)) - 1
        n = np.arange(-half, half + 1)
        w = 0.5 * (1.0 + np.cos(np.pi * n / width))
        k = w * np.exp(-2j * np.pi * f * n / sr) / w.sum()
        pad = np.pad(x, (half, half + 1))
        for j, c in enumerate(centers):
            out[r, j] = pad[c : c + 2 * half + 1] @ k
    return out


def energy_normalize(Q):
    """Divide by the square root of the sample std of per-frame energies.

    Afterwards the frame energies have unit sample std. Phase is untouched.
    Spectrograms whose frame energies have (near) zero spread are returned as is.
    """
    wrapped = isinstance(Q, CqtSpectrogram)
    data = Q.data if wrapped else check_finite(Q, "Q", ndim=2)
    if data.shape[1] < 2:
        raise ValueError("energy normalisation needs at least two frames")
    sigma = frame_energy_std(data)
    if sigma < NORM_EPS:
        return Q
    normed = data / np.sqrt(sigma)
    return CqtSpectrogram(normed, Q.grid) if wrapped else normed


def frame_energy_std(data) -> float:
    energy = np.sum(np.abs(np.asarray(data)) ** 2, axis=0)
    return float(np.std(energy, ddof=1))


def harmonic_shift(h: float, bins_per_octave: int = 36) -> int:
    return int(round(bins_per_octave * np.log2(h)))


def harmonic_stack(Q_norm, harmonics=(1, 2, 3, 4, 5, 6, 7, 8), grid: GridConfig = DEFAULT_GRID) -> np.ndarray:
    """Stack copies of the spectrogram shifted so harmonic h lines up with the fundamental row.

    Output shape is (len(harmonics), 3 * n_pitches, T); rows that would come
    from outside the spectrogram are zero.
    """
    data = Q_norm.data if isinstance(Q_norm, CqtSpectrogram) else np.asarray(Q_norm)
    bad = [h for h in harmonics if h not in ALLOWED_HARMONICS]
    if bad:
        raise ValueError(f"unknown harmonic(s) {bad}; allowed {ALLOWED_HARMONICS}")
    n_rows = grid.bins_per_semitone * grid.n_pitches
    F, T = data.shape
    out = np.zeros((len(harmonics), n_rows, T), dtype=data.dtype)
    for i, h in enumerate(harmonics):
        s = harmonic_shift(h, grid.bins_per_octave)
        lo, hi = max(0, -s), min(n_rows, F - s)
        if hi > lo:
            out[i, lo:hi] = data[lo + s : hi + s]
    return out


class CQT(TransformerMixin, BaseEstimator):
    """Estimator wrapper around :func:`cqt_forward`; ``transform`` returns the complex matrix."""

    def __init__(self, grid: GridConfig = DEFAULT_GRID):
        self.grid = grid

    def fit(self, X=None, y=None):
        self.bank_ = kernel_bank(self.grid)
        return self

    def transform(self, X):
        return cqt_forward(X, self.grid).data


class EnergyNormalizer(TransformerMixin, BaseEstimator):
    """Learns the frame-energy spread of one spectrogram and rescales by it.

    ``fit_transform(Q)`` equals :func:`energy_normalize`.
    """

    def __init__(self, eps: float = NORM_EPS):
        self.eps = eps

    def fit(self, X, y=None):
        X = check_finite(X, "Q", ndim=2)
        if X.shape[1] < 2:
            raise ValueError("energy normalisation needs at least two frames")
        self.sigma_ = frame_energy_std(X)
        self.scale_ = 1.0 if self.sigma_ < self.eps else 1.0 / np.sqrt(self.sigma_)
        return self

    def transform(self, X):
        check_is_fitted(self, "scale_")
        return check_finite(X, "Q", ndim=2) * self.scale_


class HarmonicStacker(TransformerMixin, BaseEstimator):
    def __init__(self, harmonics=(1, 2, 3, 4, 5, 6, 7, 8), grid: GridConfig = DEFAULT_GRID):
        self.harmonics = harmonics
        self.grid = grid

    def fit(self, X=None, y=None):
        bad = [h for h in self.harmonics if h not in ALLOWED_HARMONICS]
        if bad:
            raise ValueError(f"unknown harmonic(s) {bad}")
        self.shifts_ = [harmonic_shift(h, self.grid.bins_per_octave) for h in self.harmonics]
        return self

    def transform(self, X):
        return harmonic_stack(X, self.harmonics, self.grid)
