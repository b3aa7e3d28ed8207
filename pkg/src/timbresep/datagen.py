"""Randomised score generation for synthetic multi-timbre datasets."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import truncnorm

from ._validation import check_probability
from .core import MIDI_HIGH, MIDI_LOW, NoteEvent, make_rng

ALLOWED_INTERVALS = (4, 5, 7, 12)
TIMING_STATES = ("sequential", "overlap", "rest")
MIN_DURATION = 0.05


@dataclass(frozen=True)
class PitchGenConfig:
    pitch_low: int = MIDI_LOW
    pitch_high: int = MIDI_HIGH
    pool_size: int = 8
    p_nearest: float = 0.7
    p_chord: float = 0.3
    chord_intervals: tuple = ALLOWED_INTERVALS

    def __post_init__(self):
        object.__setattr__(self, "chord_intervals", tuple(int(i) for i in self.chord_intervals))
        if not set(self.chord_intervals) <= set(ALLOWED_INTERVALS) or not self.chord_intervals:
            raise ValueError(f"chord_intervals must be a non-empty subset of {ALLOWED_INTERVALS}")
        check_probability(self.p_nearest, "p_nearest")
        check_probability(self.p_chord, "p_chord")
        if self.pool_size < 1:
            raise ValueError("pool_size must be >= 1")
        if not MIDI_LOW <= self.pitch_low <= MIDI_HIGH or not MIDI_LOW <= self.pitch_high <= MIDI_HIGH:
            raise ValueError(f"pitch bounds must lie in [{MIDI_LOW}, {MIDI_HIGH}]")
        if self.pitch_low > self.pitch_high:
            raise ValueError("empty pitch range: pitch_low exceeds pitch_high")

    @property
    def pitches(self) -> np.ndarray:
        return np.arange(self.pitch_low, self.pitch_high + 1)


def _default_markov():
    return ((0.6, 0.2, 0.2),) * 3


@dataclass(frozen=True)
class TimingConfig:
    """Note timing parameters.

    ``markov[i][j]`` is the probability of moving from state i to state j,
    states ordered as ``TIMING_STATES``. The first note starts in "sequential".
    """

    bpm: float = 120.0
    duration_sigma_ratio: float = 0.25
    offset_sigma: float = 0.02
    markov: tuple = field(default_factory=_default_markov)

    def __post_init__(self):
        m = np.asarray(self.markov, dtype=float)
        if m.shape != (3, 3) or np.any(m < 0) or np.any(np.abs(m.sum(axis=1) - 1.0) > 1e-9):
            raise ValueError("markov must be a 3x3 row-stochastic matrix")
        object.__setattr__(self, "markov", tuple(tuple(float(v) for v in row) for row in m))
        if not self.bpm > 0:
            raise ValueError("bpm must be positive")
        if self.duration_sigma_ratio < 0 or self.offset_sigma < 0:
            raise ValueError("spreads must be non-negative")

    @property
    def beat(self) -> float:
        return 60.0 / self.bpm


def generate_pitch_sequence(cfg: PitchGenConfig, count: int, seed: int) -> list[int]:
    """Draw ``count`` pitches by cycling through shuffled copies of the range.

    Each pick looks at the first ``pool_size`` unused pitches of the current
    cycle and takes the one nearest the previous pitch with probability
    ``p_nearest`` (ties go to the lower pitch), otherwise a uniform one.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if cfg.pitch_low > cfg.pitch_high:
        raise ValueError("empty pitch range")
    rng = make_rng(seed, "pitch")
    out: list[int] = []
    remaining: list[int] = []
    prev = None
    while len(out) < count:
        if not remaining:
            remaining = [int(p) for p in rng.permutation(cfg.pitches)]
        pool = remaining[: cfg.pool_size]
        u = rng.random()
        if prev is not None and u < cfg.p_nearest:
            idx = min(range(len(pool)), key=lambda i: (abs(pool[i] - prev), pool[i]))
        else:
            idx = int(rng.integers(len(pool)))
        prev = remaining.pop(idx)
        out.append(prev)
    return out


def insert_chord_tones(events: list[NoteEvent], cfg: PitchGenConfig, seed: int) -> list[NoteEvent]:
    """Add, with probability ``p_chord``, one simultaneous upper chord tone per event."""
    rng = make_rng(seed, "chord")
    out = []
    for ev in events:
        out.append(ev)
        if rng.random() < cfg.p_chord:
            interval = cfg.chord_intervals[int(rng.integers(len(cfg.chord_intervals)))]
            pitch = ev.pitch + interval
            if pitch <= cfg.pitch_high:
                out.append(
                    NoteEvent(ev.onset, ev.duration, pitch, ev.detune, ev.velocity, ev.track)
                )
    return out


def _truncated_durations(n: int, cfg: TimingConfig, rng: np.random.Generator) -> np.ndarray:
    mean = cfg.beat
    lo, hi = MIN_DURATION, 4.0 * mean
    sigma = cfg.duration_sigma_ratio * mean
    if sigma == 0:
        return np.full(n, float(np.clip(mean, lo, hi)))
    a, b = (lo - mean) / sigma, (hi - mean) / sigma
    d = truncnorm.rvs(a, b, loc=mean, scale=sigma, size=n, random_state=rng)
    return np.clip(d, lo, hi)


def generate_timing(n: int, cfg: TimingConfig, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Onsets and durations (seconds) for a single voice.

    A rest inserts a gap of |N(0, beat)|; every onset then receives N(0,
    offset_sigma) jitter, clamped so onsets never move before the previous one
    or below zero.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = make_rng(seed, "timing")
    durations = _truncated_durations(n, cfg, rng)
    markov = np.asarray(cfg.markov)
    onsets = np.zeros(n)
    state = 0
    for i in range(1, n):
        state = int(rng.choice(3, p=markov[state]))
        prev_end = onsets[i - 1] + durations[i - 1]
        if state == 0:
            nominal = prev_end
        elif state == 1:
            nominal = prev_end - rng.uniform(0.0, durations[i - 1])
        else:
            nominal = prev_end + abs(rng.normal(0.0, cfg.beat))
        jitter = rng.normal(0.0, cfg.offset_sigma) if cfg.offset_sigma > 0 else 0.0
        onsets[i] = max(nominal + jitter, onsets[i - 1], 0.0)
    return onsets, durations


def generate_score(
    pitch_cfg: PitchGenConfig,
    timing_cfg: TimingConfig,
    n_notes: int,
    seed: int,
    track: int = 0,
    chords: bool = True,
) -> list[NoteEvent]:
    if n_notes == 0:
        return []
    pitches = generate_pitch_sequence(pitch_cfg, n_notes, seed)
    onsets, durations = generate_timing(n_notes, timing_cfg, seed)
    rng = make_rng(seed, "expression")
    detune = rng.uniform(-20.0, 20.0, n_notes)
    velocity = rng.uniform(0.5, 1.0, n_notes)
    events = [
        NoteEvent(float(o), float(d), int(p), float(c), float(v), track)
        for o, d, p, c, v in zip(onsets, durations, pitches, detune, velocity)
    ]
    if chords:
        events = insert_chord_tones(events, pitch_cfg, seed)
    return events


def score_length(events: list[NoteEvent]) -> float:
    return max((ev.offset for ev in events), default=0.0)


def fit_score_to_duration(events: list[NoteEvent], seconds: float) -> list[NoteEvent]:
    """Drop events starting after ``seconds`` and trim the rest to end by it."""
    out = []
    for ev in events:
        if ev.onset >= seconds - MIN_DURATION:
            continue
        dur = min(ev.duration, seconds - ev.onset)
        out.append(NoteEvent(ev.onset, dur, ev.pitch, ev.detune, ev.velocity, ev.track))
    return out


def n_mixes(n_instruments: int, songs_per: int, m: int) -> int:
    return songs_per**m * math.comb(n_instruments, m)


def enumerate_mixes(n_instruments: int, songs_per: int, m: int) -> list[tuple[tuple[int, int], ...]]:
    """All M-way mixes of ``(instrument, song)`` pairs with distinct instruments."""
    if not 1 <= m:
        raise ValueError("mixture size must be >= 1")
    if m > n_instruments:
        raise ValueError(f"mixture size {m} exceeds instrument count {n_instruments}")
    mixes = []
    for insts in itertools.combinations(range(n_instruments), m):
        for songs in itertools.product(range(songs_per), repeat=m):
            mixes.append(tuple(zip(insts, songs)))
    return mixes
