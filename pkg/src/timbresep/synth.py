"""Additive synthesis of scores, mixing, WAV I/O and ground-truth rasterisation."""

from __future__ import annotations

import wave
from dataclasses import dataclass, replace

import numpy as np

from .core import DEFAULT_GRID, MIDI_LOW, GridConfig, NoteEvent, Pianoroll, derive_seed, make_rng, midi_to_hz
from .datagen import PitchGenConfig, TimingConfig, fit_score_to_duration, generate_score

N_HARMONICS = 8
MAX_DRIFT_CENTS = 20.0
RENDER_PEAK = 0.9
MIX_PEAK = 0.99


@dataclass(frozen=True)
class Timbre:
    harmonic_amps: tuple
    adsr: tuple = (0.01, 0.1, 0.7, 0.05)
    vibrato_rate: float = 5.5
    vibrato_depth: float = 0.0
    tremolo_depth: float = 0.0
    name: str = ""

    def __post_init__(self):
        a = np.asarray(self.harmonic_amps, dtype=float)
        if a.shape != (N_HARMONICS,) or np.any(a < 0):
            raise ValueError(f"harmonic_amps must be {N_HARMONICS} non-negative values")
        if not a[0] > 0:
            raise ValueError("the fundamental amplitude must be positive")
        a = a / np.sqrt(np.sum(a**2))
        object.__setattr__(self, "harmonic_amps", tuple(float(v) for v in a))
        attack, decay, sustain, release = (float(v) for v in self.adsr)
        if min(attack, decay, release) < 0 or not 0.0 <= sustain <= 1.0:
            raise ValueError("invalid ADSR parameters")
        object.__setattr__(self, "adsr", (attack, decay, sustain, release))
        if not 0.0 <= self.vibrato_depth <= 50.0:
            raise ValueError("vibrato_depth must lie in [0, 50] cents")
        if not 0.0 <= self.tremolo_depth < 1.0:
            raise ValueError("tremolo_depth must lie in [0, 1)")

    @property
    def amps(self) -> np.ndarray:
        return np.asarray(self.harmonic_amps)


PRESETS = {
    "flute": Timbre((1.0, 0.25, 0.08, 0.03, 0.01, 0.0, 0.0, 0.0), name="flute"),
    "clarinet": Timbre((1.0, 0.02, 0.6, 0.02, 0.4, 0.02, 0.25, 0.02), name="clarinet"),
    "saw": Timbre(tuple(1.0 / h for h in range(1, 9)), name="saw"),
    "oboe": Timbre((0.3, 0.8, 1.0, 0.7, 0.45, 0.3, 0.2, 0.12), name="oboe"),
    "organ": Timbre((0.6, 1.0, 0.05, 0.7, 0.02, 0.05, 0.02, 0.4), name="organ"),
    "horn": Timbre((0.5, 0.6, 0.9, 1.0, 0.05, 0.05, 0.02, 0.02), name="horn"),
}


def random_timbre(seed: int, *stream) -> Timbre:
    """A random but musically plausible timbre (decaying, optionally odd-heavy spectrum)."""
    rng = make_rng(seed, "timbre", *stream)
    h = np.arange(1, N_HARMONICS + 1)
    amps = h ** -rng.uniform(0.3, 2.0) * rng.lognormal(0.0, 0.6, N_HARMONICS)
    if rng.random() < 0.4:
        amps[1::2] *= rng.uniform(0.0, 0.3)
    amps[0] = max(amps[0], 0.2 * amps.max())
    adsr = (rng.uniform(0.005, 0.04), rng.uniform(0.05, 0.3), rng.uniform(0.5, 0.95), rng.uniform(0.02, 0.08))
    return Timbre(
        tuple(amps),
        adsr,
        vibrato_rate=rng.uniform(4.0, 7.0),
        vibrato_depth=rng.uniform(0.0, 15.0),
        tremolo_depth=rng.uniform(0.0, 0.1),
    )


def timbre_variant(base: Timbre, seed: int, spread: float = 0.15) -> Timbre:
    """A similar instrument: harmonic amplitudes perturbed by a log-normal factor."""
    rng = make_rng(seed, "variant")
    amps = base.amps * rng.lognormal(0.0, spread, N_HARMONICS)
    return replace(base, harmonic_amps=tuple(amps), name=f"{base.name}~")


def _adsr_envelope(n_on: int, n_total: int, timbre: Timbre, sr: int) -> np.ndarray:
    attack, decay, sustain, release = timbre.adsr
    i = np.arange(n_total) / sr
    na, nd = attack, decay
    env = np.where(
        i < na,
        i / na if na > 0 else 1.0,
        np.where(i < na + nd, 1.0 - (1.0 - sustain) * (i - na) / max(nd, 1e-12), sustain),
    )
    env = np.asarray(env, dtype=float)
    t_off = n_on / sr
    level_off = float(np.interp(t_off, i, env)) if n_on < n_total else float(env[-1])
    rel = i >= t_off
    if release > 0:
        env[rel] = level_off * np.clip(1.0 - (i[rel] - t_off) / release, 0.0, 1.0)
    else:
        env[rel] = 0.0
    return env


def _drift_cents(n: int, rng: np.random.Generator, sr: int, bound: float) -> np.ndarray:
    """Smooth bounded random walk, reflected into [-bound, bound]."""
    if bound <= 0:
        return np.zeros(n)
    step = 256
    n_ctrl = n // step + 2
    walk = np.cumsum(rng.normal(0.0, bound / 8.0, n_ctrl))
    # reflect into the allowed band
    period = 4.0 * bound
    w = np.mod(walk + bound, period)
    walk = np.where(w < 2 * bound, w, period - w) - bound
    return np.interp(np.arange(n) / step, np.arange(n_ctrl), walk)


def render_note(
    ev: NoteEvent,
    timbre: Timbre,
    sr: int,
    rng: np.random.Generator,
    drift: float = MAX_DRIFT_CENTS,
    vibrato: bool = True,
) -> np.ndarray:
    n_on = max(1, int(round(ev.duration * sr)))
    n_total = n_on + int(round(timbre.adsr[3] * sr))
    t = np.arange(n_total) / sr
    cents = ev.detune + _drift_cents(n_total, rng, sr, drift)
    if vibrato and timbre.vibrato_depth > 0:
        cents = cents + timbre.vibrato_depth * np.sin(
            2 * np.pi * timbre.vibrato_rate * t + rng.uniform(0, 2 * np.pi)
        )
    f = float(midi_to_hz(ev.pitch)) * 2.0 ** (cents / 1200.0)
    phase = 2 * np.pi * np.concatenate(([0.0], np.cumsum(f[:-1]))) / sr
    env = _adsr_envelope(n_on, n_total, timbre, sr)
    if timbre.tremolo_depth > 0:
        env = env * (1.0 + timbre.tremolo_depth * np.sin(2 * np.pi * timbre.vibrato_rate * t))
    out = np.zeros(n_total)
    nyquist = sr / 2.0
    fmax = f.max()
    offsets = rng.uniform(0, 2 * np.pi, N_HARMONICS)
    for h, a in enumerate(timbre.amps, start=1):
        if a == 0 or h * fmax >= nyquist:
            continue
        out += a * np.sin(h * phase + offsets[h - 1])
    return ev.velocity * env * out


def render_track(
    score: list[NoteEvent],
    timbre: Timbre,
    grid: GridConfig = DEFAULT_GRID,
    seed: int = 0,
    n_samples: int | None = None,
    *,
    normalize: bool = True,
    drift: float = MAX_DRIFT_CENTS,
    vibrato: bool = True,
) -> np.ndarray:
    """Render ``score`` with additive synthesis.

    Each note gets its own random stream (seed, "note", index) for drift,
    vibrato phase and partial phases. Harmonics that would exceed Nyquist are
    skipped. With ``normalize`` the buffer is scaled to a peak of 0.9.
    """
    sr = grid.sample_rate
    if n_samples is None:
        end = max((ev.offset + timbre.adsr[3] for ev in score), default=0.0)
        n_samples = int(np.ceil(end * sr))
    buf = np.zeros(n_samples)
    for i, ev in enumerate(score):
        start = int(round(ev.onset * sr))
        if start >= n_samples:
            continue
        note = render_note(ev, timbre, sr, make_rng(seed, "note", i), drift=drift, vibrato=vibrato)
        stop = min(n_samples, start + note.size)
        buf[start:stop] += note[: stop - start]
    if normalize:
        peak = np.max(np.abs(buf)) if buf.size else 0.0
        if peak > 0:
            buf *= RENDER_PEAK / peak
    return buf


def mix_tracks(tracks, snr_db: float | None = None, seed: int = 0, *, normalize: bool = True) -> np.ndarray:
    """Sum tracks (zero-padding the shorter ones), optionally add white noise at ``snr_db``."""
    tracks = [np.asarray(t, dtype=float) for t in tracks]
    if not tracks:
        raise ValueError("mix_tracks needs at least one track")
    n = max(t.size for t in tracks)
    mix = np.zeros(n)
    for t in tracks:
        mix[: t.size] += t
    if snr_db is not None:
        p_sig = np.mean(mix**2) if n else 0.0
        if p_sig > 0:
            sigma = np.sqrt(p_sig / 10.0 ** (snr_db / 10.0))
            mix = mix + make_rng(seed, "noise").normal(0.0, sigma, n)
    if normalize:
        peak = np.max(np.abs(mix)) if n else 0.0
        if peak > 0:
            mix = mix * (MIX_PEAK / peak)
    return mix


def score_to_pianoroll(score: list[NoteEvent], grid: GridConfig = DEFAULT_GRID, total_frames: int | None = None) -> Pianoroll:
    """Rasterise events onto the frame grid.

    A frame is active when its centre lies in [onset, onset + duration). The
    onset roll marks the first active frame of each event.
    """
    if total_frames is None:
        end = max((ev.offset for ev in score), default=0.0)
        total_frames = int(np.ceil(end * grid.sample_rate / grid.hop))
    notes = np.zeros((grid.n_pitches, total_frames))
    onsets = np.zeros_like(notes)
    hop_s = grid.hop / grid.sample_rate
    for ev in score:
        # first frame t with (t + 0.5) * hop_s >= onset
        first = max(0, int(np.ceil(ev.onset / hop_s - 0.5 - 1e-9)))
        last = int(np.ceil(ev.offset / hop_s - 0.5 - 1e-9))  # exclusive
        last = min(last, total_frames)
        if first >= last:
            continue
        row = ev.pitch - MIDI_LOW
        notes[row, first:last] = 1.0
        onsets[row, first] = 1.0
    return Pianoroll(notes, onsets, grid)


def write_wav(path, audio, sample_rate: int = 22050) -> None:
    pcm = np.round(np.clip(np.asarray(audio, dtype=float), -1.0, 1.0) * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(sample_rate)
        wf.writeframes(pcm.tobytes())


def read_wav(path) -> tuple[np.ndarray, int]:
    with wave.open(str(path), "rb") as wf:
        if wf.getsampwidth() != 2:
            raise ValueError("only 16-bit PCM WAV files are supported")
        sr = wf.getframerate()
        ch = wf.getnchannels()
        raw = wf.readframes(wf.getnframes())
    x = np.frombuffer(raw, dtype="<i2").astype(float) / 32767.0
    if ch > 1:
        x = x.reshape(-1, ch).mean(axis=1)
    return x, sr


@dataclass(frozen=True)
class Mixture:
    audio: np.ndarray
    references: list  # one ground-truth Pianoroll per source
    scores: list


def profile_cosine(a: Timbre, b: Timbre) -> float:
    return float(a.amps @ b.amps / (np.linalg.norm(a.amps) * np.linalg.norm(b.amps)))


def synthesize_mixture(
    timbres,
    seed: int,
    seconds: float = 8.0,
    *,
    pitch_low: int = 48,
    pitch_high: int = 81,
    n_notes: int = 40,
    snr_db: float | None = None,
    grid: GridConfig = DEFAULT_GRID,
) -> Mixture:
    """Render one generated score per timbre and mix them, with matching reference rolls.

    The audio is trimmed to a whole number of hops so reference and
    estimated rolls have the same frame count.
    """
    pc = PitchGenConfig(pitch_low=pitch_low, pitch_high=pitch_high)
    n = int(seconds * grid.sample_rate)
    n -= n % grid.hop
    T = grid.n_frames(n)
    tracks, refs, scores = [], [], []
    for k, timbre in enumerate(timbres):
        sub = derive_seed(seed, "mixture", k)
        score = fit_score_to_duration(generate_score(pc, TimingConfig(), n_notes, sub, track=k), seconds)
        tracks.append(render_track(score, timbre, grid, sub, n_samples=n))
        refs.append(score_to_pianoroll(score, grid, T))
        scores.append(score)
    return Mixture(mix_tracks(tracks, snr_db, seed), refs, scores)
