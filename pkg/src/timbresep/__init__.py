"""Timbre-separated music transcription toolkit on self-generated data.

Modules: ``core`` (types, seeding, file formats), ``datagen`` (random
scores), ``synth`` (additive rendering, mixing), ``cqt`` (constant-Q
analysis), ``memory`` (Hebbian and associative memory), ``losses``,
``separation`` (transcription stand-in and clustering), ``evalmetrics``
and ``cli``.
"""

from .core import (
    DEFAULT_GRID,
    CqtSpectrogram,
    EmbeddingField,
    GridConfig,
    NoteEvent,
    Pianoroll,
    derive_seed,
    make_rng,
    read_events,
    read_pianoroll,
    read_tensor,
    write_events,
    write_pianoroll,
    write_tensor,
)
from .cqt import cqt_forward, energy_normalize, harmonic_stack
from .datagen import PitchGenConfig, TimingConfig, enumerate_mixes, generate_score
from .evalmetrics import FrameScores, frame_metrics, pit_match
from .losses import deep_cluster_loss, dwa_weights, focal_loss, magnitude_balance
from .memory import associate_once, hebb_store, hopfield_recall
from .separation import (
    SalienceParams,
    TimbreSeparator,
    bin_embeddings,
    extract_note_events,
    frame_separate,
    note_separate,
    salience_transcribe,
    separate_audio,
    spectral_cluster,
)
from .synth import PRESETS, Timbre, mix_tracks, render_track, score_to_pianoroll, synthesize_mixture

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
