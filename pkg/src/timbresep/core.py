"""Shared domain types, seeding, and on-disk formats.

Pitch index ``n`` maps to MIDI pitch ``24 + n`` (C1). Spectrogram row ``3n + 1``
is centred on pitch ``n``; row 0 sits one third of a semitone below C1.
"""

from __future__ import annotations

import json
import math
import struct
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

MIDI_LOW = 24
MIDI_HIGH = 107
TENSOR_MAGIC = b"TAMT0001"


@dataclass(frozen=True)
class GridConfig:
    sample_rate: int = 22050
    hop: int = 256
    n_pitches: int = 84
    bins_per_semitone: int = 3
    n_octaves_cqt: int = 8
    f_min: float = 32.703195662574835  # C1

    def __post_init__(self):
        if self.n_pitches != 7 * 12:
            raise ValueError("n_pitches must be 84 (C1-B7)")
        if self.hop <= 0 or self.sample_rate <= 0:
            raise ValueError("hop and sample_rate must be positive")
        if self.hop % (2 ** (self.n_octaves_cqt - 1)) != 0:
            raise ValueError("hop must be divisible by 2**(n_octaves_cqt - 1)")

    @property
    def f_bins(self) -> int:
        return self.n_octaves_cqt * 12 * self.bins_per_semitone

    @property
    def bins_per_octave(self) -> int:
        return 12 * self.bins_per_semitone

    @property
    def frame_seconds(self) -> float:
        return self.hop / self.sample_rate

    def row_frequencies(self) -> np.ndarray:
        """Centre frequency of every CQT row, lowest first."""
        b = self.bins_per_semitone
        r = np.arange(self.f_bins)
        return self.f_min * 2.0 ** ((r - (b // 2)) / self.bins_per_octave)

    def pitch_row(self, pitch_index):
        return self.bins_per_semitone * np.asarray(pitch_index) + self.bins_per_semitone // 2

    def n_frames(self, n_samples: int) -> int:
        return n_samples // self.hop

    def frame_centers(self, n_frames: int) -> np.ndarray:
        """Frame centres in seconds; frame t spans samples [t*hop, (t+1)*hop)."""
        return (np.arange(n_frames) + 0.5) * self.hop / self.sample_rate


DEFAULT_GRID = GridConfig()


def midi_to_hz(pitch) -> np.ndarray:
    return 440.0 * 2.0 ** ((np.asarray(pitch, dtype=float) - 69.0) / 12.0)


@dataclass(frozen=True)
class NoteEvent:
    onset: float
    duration: float
    pitch: int
    detune: float = 0.0
    velocity: float = 1.0
    track: int = 0

    def __post_init__(self):
        if not math.isfinite(self.onset) or self.onset < 0:
            raise ValueError(f"onset must be finite and >= 0, got {self.onset}")
        if not self.duration > 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")
        if not MIDI_LOW <= self.pitch <= MIDI_HIGH:
            raise ValueError(f"pitch {self.pitch} outside [{MIDI_LOW}, {MIDI_HIGH}]")
        if not 0.0 <= self.velocity <= 1.0:
            raise ValueError(f"velocity must lie in [0, 1], got {self.velocity}")

    @property
    def offset(self) -> float:
        return self.onset + self.duration

    def to_dict(self) -> dict:
        return asdict(self)


# A score is simply an ordered list of events; kept as a plain list so it
# composes with sorting, slicing and concatenation.
Score = list


@dataclass(frozen=True)
class Pianoroll:
    notes: np.ndarray
    onsets: np.ndarray
    grid: GridConfig = field(default=DEFAULT_GRID)

    def __post_init__(self):
        notes = np.asarray(self.notes, dtype=float)
        onsets = np.asarray(self.onsets, dtype=float)
        if notes.shape != onsets.shape or notes.ndim != 2:
            raise ValueError("notes and onsets must be equal-shaped 2-D arrays")
        if notes.shape[0] != self.grid.n_pitches:
            raise ValueError(f"expected {self.grid.n_pitches} pitch rows, got {notes.shape[0]}")
        if notes.size and (notes.min() < 0 or notes.max() > 1 or onsets.min() < 0 or onsets.max() > 1):
            raise ValueError("pianoroll entries must lie in [0, 1]")
        notes.setflags(write=False)
        onsets.setflags(write=False)
        object.__setattr__(self, "notes", notes)
        object.__setattr__(self, "onsets", onsets)

    @property
    def n_frames(self) -> int:
        return self.notes.shape[1]

    @classmethod
    def zeros(cls, n_frames: int, grid: GridConfig = DEFAULT_GRID) -> Pianoroll:
        z = np.zeros((grid.n_pitches, n_frames))
        return cls(z, z.copy(), grid)


@dataclass(frozen=True)
class CqtSpectrogram:
    data: np.ndarray
    grid: GridConfig = field(default=DEFAULT_GRID)

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2 or data.shape[0] != self.grid.f_bins:
            raise ValueError(f"expected {self.grid.f_bins} rows, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("spectrogram contains non-finite values")
        data = data.astype(complex, copy=False)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_frames(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class EmbeddingField:
    """Per-bin embeddings of shape (D, N, T).

    Vector direction carries timbre and vector length the note probability.
    """

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 3:
            raise ValueError("embedding field must be (D, N, T)")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.data, axis=0)

    def directions(self) -> np.ndarray:
        n = self.norms()
        safe = np.where(n > 0, n, 1.0)
        return self.data / safe


# ---------------------------------------------------------------------------
# Seeding
# ---------------------------------------------------------------------------

def _key_to_int(key) -> int:
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError("stream keys must be non-negative")
        return int(key)
    return zlib.crc32(str(key).encode("utf-8"))


def make_rng(seed: int, *stream: Any) -> np.random.Generator:
    """PCG64 generator for ``seed`` and an optional stream path.

    Streams are split with ``SeedSequence.spawn_key``; string parts are mapped
    through CRC-32 so e.g. ``make_rng(seed, "timing", track)`` is stable across
    processes and platforms.
    """
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key_to_int(k) for k in stream))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *stream: Any) -> int:
    return int(make_rng(seed, *stream).integers(0, 2**63))


# ---------------------------------------------------------------------------
# Tensor files
# ---------------------------------------------------------------------------

class TensorFormatError(ValueError):
    """Base class for malformed tensor files."""


class BadMagicError(TensorFormatError):
    pass


class TruncatedPayloadError(TensorFormatError):
    pass


class ShapeMismatchError(TensorFormatError):
    pass


def write_tensor(path, tensor, meta: dict | None = None) -> None:
    """Write ``tensor`` as magic + u32-LE header length + JSON header + f32-LE payload.

    Complex tensors are stored as interleaved (re, im) pairs with dtype "c64".
    """
    arr = np.asarray(tensor)
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite values cannot be written")
    if np.iscomplexobj(arr):
        dtype = "c64"
        flat = np.empty(arr.size * 2, dtype="<f4")
        c = np.ascontiguousarray(arr, dtype=np.complex64).ravel()
        flat[0::2] = c.real
        flat[1::2] = c.imag
    else:
        dtype = "f32"
        flat = np.ascontiguousarray(arr, dtype="<f4").ravel()
    header = json.dumps(
        {"dtype": dtype, "shape": list(arr.shape), "meta": meta or {}}, sort_keys=True
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(flat.tobytes())


def read_tensor(path) -> tuple[np.ndarray, dict]:
    raw = Path(path).read_bytes()
    if raw[:8] != TENSOR_MAGIC:
        raise BadMagicError("bad magic")
    if len(raw) < 12:
        raise TruncatedPayloadError("file ends inside the header length")
    (hlen,) = struct.unpack("<I", raw[8:12])
    if len(raw) < 12 + hlen:
        raise TruncatedPayloadError("file ends inside the header")
    try:
        header = json.loads(raw[12 : 12 + hlen].decode("utf-8"))
        dtype, shape = header["dtype"], [int(s) for s in header["shape"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise TensorFormatError(f"unreadable header: {exc}") from exc
    if dtype not in ("f32", "c64") or any(s < 0 for s in shape):
        raise ShapeMismatchError(f"invalid dtype/shape in header: {dtype} {shape}")
    count = int(np.prod(shape, dtype=np.int64)) * (2 if dtype == "c64" else 1)
    payload = raw[12 + hlen :]
    if len(payload) < 4 * count:
        raise TruncatedPayloadError(f"payload has {len(payload)} bytes, expected {4 * count}")
    if len(payload) > 4 * count:
        raise ShapeMismatchError(f"payload has {len(payload)} bytes, shape {shape} needs {4 * count}")
    flat = np.frombuffer(payload, dtype="<f4").astype(np.float32)
    if dtype == "c64":
        arr = (flat[0::2] + 1j * flat[1::2]).astype(np.complex64)
    else:
        arr = flat
    return arr.reshape(shape), header.get("meta", {})


def write_pianoroll(path, roll: Pianoroll, meta: dict | None = None) -> None:
    m = dict(meta or {})
    m["kind"] = "pianoroll"
    write_tensor(path, np.stack([roll.notes, roll.onsets]), m)


def read_pianoroll(path, grid: GridConfig = DEFAULT_GRID) -> Pianoroll:
    arr, _ = read_tensor(path)
    if arr.ndim != 3 or arr.shape[0] != 2:
        raise ShapeMismatchError(f"expected a (2, N, T) pianoroll tensor, got {arr.shape}")
    return Pianoroll(arr[0].astype(float), arr[1].astype(float), grid)


# ---------------------------------------------------------------------------
# JSONL scores
# ---------------------------------------------------------------------------

_EVENT_KEYS = ("onset", "duration", "pitch", "detune", "velocity", "track")


def write_events(path, events: Iterable[NoteEvent]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(json.dumps({k: getattr(ev, k) for k in _EVENT_KEYS}) + "\n")


def read_events(path) -> list[NoteEvent]:
    events = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            unknown = set(d) - set(_EVENT_KEYS)
            if unknown:
                raise ValueError(f"unknown event keys: {sorted(unknown)}")
            events.append(
                NoteEvent(
                    onset=float(d["onset"]),
                    duration=float(d["duration"]),
                    pitch=int(d["pitch"]),
                    detune=float(d.get("detune", 0.0)),
                    velocity=float(d.get("velocity", 1.0)),
                    track=int(d.get("track", 0)),
                )
            )
    return events
