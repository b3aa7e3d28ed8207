"""Command-line entry point: ``timbresep <command> [options]``.

Every command that writes a directory also writes ``run_config.toml`` there,
holding the fully resolved configuration; passing it back via ``--config``
reproduces the run.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .core import (
    DEFAULT_GRID,
    GridConfig,
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
from .cqt import cqt_forward, energy_normalize
from .datagen import PitchGenConfig, TimingConfig, enumerate_mixes, fit_score_to_duration, generate_score
from .evalmetrics import format_table, pit_match
from .separation import SalienceParams, extract_note_events, separate_audio, salience_transcribe
from .synth import PRESETS, mix_tracks, random_timbre, read_wav, render_track, score_to_pianoroll, timbre_variant, write_wav

CONFIG_NAME = "run_config.toml"


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclasses.dataclass
class GridSection:
    hop: int = 256


@dataclasses.dataclass
class DatagenSection:
    n_categories: int = 9
    songs_per: int = 6
    variants: int = 2
    song_frames: int = 600
    notes_per_song: int = 40
    pitch_low: int = 24
    pitch_high: int = 107
    pool_size: int = 8
    p_nearest: float = 0.7
    p_chord: float = 0.3
    bpm: float = 120.0
    duration_sigma_ratio: float = 0.25
    offset_sigma: float = 0.02


@dataclasses.dataclass
class SynthSection:
    snr_db: float | None = None


@dataclasses.dataclass
class SeparationSection:
    mix: int = 2
    threshold: float = 0.5
    associate: str = "auto"
    frame_level: bool = False
    harmonic_decay: float = SalienceParams.harmonic_decay
    n_harmonics: int = SalienceParams.n_harmonics
    whitening: float = SalienceParams.whitening
    fundamental_gate: float = SalienceParams.fundamental_gate
    max_polyphony: int = SalienceParams.max_polyphony
    stop_ratio: float = SalienceParams.stop_ratio
    octave_suppression: float = SalienceParams.octave_suppression
    even_partial_blend: float = SalienceParams.even_partial_blend
    level_window: float = SalienceParams.level_window


@dataclasses.dataclass
class RunConfig:
    seed: int = 0
    grid: GridSection = dataclasses.field(default_factory=GridSection)
    datagen: DatagenSection = dataclasses.field(default_factory=DatagenSection)
    synth: SynthSection = dataclasses.field(default_factory=SynthSection)
    separation: SeparationSection = dataclasses.field(default_factory=SeparationSection)

    def grid_config(self) -> GridConfig:
        return GridConfig(hop=self.grid.hop)

    def salience_params(self) -> SalienceParams:
        names = {f.name for f in dataclasses.fields(SalienceParams)}
        values = {k: v for k, v in dataclasses.asdict(self.separation).items() if k in names}
        return dataclasses.replace(SalienceParams(), **values)

    def associate_flag(self) -> bool | None:
        return {"auto": None, "on": True, "off": False}[self.separation.associate]


class ConfigError(ValueError):
    pass


_SECTIONS = {"grid": GridSection, "datagen": DatagenSection, "synth": SynthSection, "separation": SeparationSection}


def _coerce(value, current, name: str):
    if isinstance(current, bool) or isinstance(value, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be a boolean")
        return value
    if isinstance(current, int) and not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer")
    if isinstance(current, float) or current is None:
        if not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number")
        return float(value)
    if isinstance(current, str) and not isinstance(value, str):
        raise ConfigError(f"{name} must be a string")
    return value


def load_config(path) -> RunConfig:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> RunConfig:
    cfg = RunConfig()
    for key, value in raw.items():
        if key == "seed":
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ConfigError("seed must be a non-negative integer")
            cfg.seed = value
        elif key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"[{key}] must be a table")
            section = getattr(cfg, key)
            known = {f.name for f in dataclasses.fields(section)}
            for k, v in value.items():
                if k not in known:
                    raise ConfigError(f"unknown key {key}.{k}")
                setattr(section, k, _coerce(v, getattr(section, k), f"{key}.{k}"))
        else:
            raise ConfigError(f"unknown key {key}")
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    if cfg.separation.associate not in ("auto", "on", "off"):
        raise ConfigError("separation.associate must be auto, on or off")
    if cfg.separation.mix < 1:
        raise ConfigError("separation.mix must be >= 1")
    d = cfg.datagen
    if min(d.n_categories, d.songs_per, d.variants, d.song_frames, d.notes_per_song) < 1:
        raise ConfigError("datagen counts must be >= 1")
    try:
        cfg.grid_config()
        pitch_config(cfg)
        timing_config(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else json.dumps(str(v))
    return str(v)


def dump_config(cfg: RunConfig) -> str:
    lines = [f"seed = {cfg.seed}"]
    for name in _SECTIONS:
        lines.append(f"\n[{name}]")
        for k, v in dataclasses.asdict(getattr(cfg, name)).items():
            if v is not None:
                lines.append(f"{k} = {_toml_value(v)}")
    return "\n".join(lines) + "\n"


def pitch_config(cfg: RunConfig) -> PitchGenConfig:
    d = cfg.datagen
    return PitchGenConfig(d.pitch_low, d.pitch_high, d.pool_size, d.p_nearest, d.p_chord)


def timing_config(cfg: RunConfig) -> TimingConfig:
    d = cfg.datagen
    return TimingConfig(bpm=d.bpm, duration_sigma_ratio=d.duration_sigma_ratio, offset_sigma=d.offset_sigma)


def resolve_config(args) -> RunConfig:
    """Defaults, then the ``--config`` file, then explicit flags."""
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "mix", None) is not None:
        cfg.separation.mix = args.mix
    if getattr(args, "threshold", None) is not None:
        cfg.separation.threshold = args.threshold
    if getattr(args, "associate", None) is not None:
        cfg.separation.associate = args.associate
    if getattr(args, "frame_level", False):
        cfg.separation.frame_level = True
    if getattr(args, "snr_db", None) is not None:
        cfg.synth.snr_db = args.snr_db
    validate_config(cfg)
    return cfg


def _prepare_out(args, default: str) -> Path:
    out = Path(args.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _save_config(out: Path, cfg: RunConfig) -> None:
    (out / CONFIG_NAME).write_text(dump_config(cfg))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def category_timbres(cfg: RunConfig):
    """Two similar instruments per category: presets first, random timbres after."""
    presets = list(PRESETS.values())
    out = []
    for c in range(cfg.datagen.n_categories):
        base = presets[c] if c < len(presets) else random_timbre(cfg.seed, "category", c)
        variants = [base] + [
            timbre_variant(base, derive_seed(cfg.seed, "variant", c, v)) for v in range(1, cfg.datagen.variants)
        ]
        out.append(variants)
    return out


def _item_name(c: int, v: int, s: int) -> str:
    return f"c{c}_i{v}_s{s}"


def cmd_gen(args) -> int:
    cfg = resolve_config(args)
    out = _prepare_out(args, "dataset")
    grid = cfg.grid_config()
    d = cfg.datagen
    n_samples = d.song_frames * grid.hop
    seconds = n_samples / grid.sample_rate
    for sub in ("audio", "scores", "rolls"):
        (out / sub).mkdir(exist_ok=True)
    items = []
    for c, variants in enumerate(category_timbres(cfg)):
        for v, timbre in enumerate(variants):
            for s in range(d.songs_per):
                sub_seed = derive_seed(cfg.seed, "song", c, v, s)
                score = generate_score(pitch_config(cfg), timing_config(cfg), d.notes_per_song, sub_seed, track=c)
                score = fit_score_to_duration(score, seconds)
                audio = render_track(score, timbre, grid, sub_seed, n_samples=n_samples)
                name = _item_name(c, v, s)
                write_wav(out / "audio" / f"{name}.wav", audio, grid.sample_rate)
                write_events(out / "scores" / f"{name}.jsonl", score)
                write_pianoroll(out / "rolls" / f"{name}.tamt", score_to_pianoroll(score, grid, d.song_frames))
                items.append({"name": name, "category": c, "instrument": v, "song": s, "timbre": dataclasses.asdict(timbre)})
    M = cfg.separation.mix
    # a manifest row names (category, song) per source; which of the
    # category's instruments plays it is drawn from the seed
    pick = make_rng(cfg.seed, "manifest")
    rows = []
    for mix in enumerate_mixes(d.n_categories, d.songs_per, M):
        choice = pick.integers(0, d.variants, size=len(mix))
        rows.append([_item_name(c, int(v), s) for (c, s), v in zip(mix, choice)])
    manifest = {
        "mix": M,
        "n_categories": d.n_categories,
        "songs_per": d.songs_per,
        "variants": d.variants,
        "song_frames": d.song_frames,
        "n_items": len(items),
        "total_seconds": len(items) * seconds,
        "items": items,
        "rows": rows,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    _save_config(out, cfg)
    print(f"{len(items)} tracks, {len(items) * seconds / 60:.2f} min of audio, {len(rows)} {M}-mixes -> {out}")
    return 0


def cmd_mix(args) -> int:
    cfg = resolve_config(args)
    out = _prepare_out(args, "mix")
    root = Path(args.dataset)
    manifest = json.loads((root / "manifest.json").read_text())
    rows = manifest["rows"]
    if not 0 <= args.index < len(rows):
        raise SystemExit(f"mix index {args.index} out of range (0..{len(rows) - 1})")
    tracks = []
    for k, name in enumerate(rows[args.index]):
        audio, _ = read_wav(root / "audio" / f"{name}.wav")
        tracks.append(audio)
        roll = read_pianoroll(root / "rolls" / f"{name}.tamt")
        write_pianoroll(out / f"ref_{k}.tamt", roll, {"source": name})
        events = read_events(root / "scores" / f"{name}.jsonl")
        write_events(out / f"ref_{k}.jsonl", [dataclasses.replace(ev, track=k) for ev in events])
    mixture = mix_tracks(tracks, cfg.synth.snr_db, derive_seed(cfg.seed, "mix", args.index))
    write_wav(out / "mix.wav", mixture, cfg.grid_config().sample_rate)
    _save_config(out, cfg)
    print(f"mixed {', '.join(rows[args.index])} -> {out / 'mix.wav'}")
    return 0


def _load_audio(path, grid: GridConfig) -> np.ndarray:
    audio, sr = read_wav(path)
    if sr != grid.sample_rate:
        raise SystemExit(f"{path}: sample rate {sr} Hz, expected {grid.sample_rate} Hz")
    return audio


def cmd_cqt(args) -> int:
    cfg = resolve_config(args)
    out = _prepare_out(args, "cqt")
    grid = cfg.grid_config()
    Q = cqt_forward(_load_audio(args.wav, grid), grid)
    write_tensor(out / "cqt.tamt", Q.data, {"kind": "cqt"})
    write_tensor(out / "cqt_norm.tamt", energy_normalize(Q).data, {"kind": "cqt_norm"})
    _save_config(out, cfg)
    print(f"CQT {Q.data.shape[0]} x {Q.data.shape[1]} -> {out}")
    return 0


def cmd_transcribe(args) -> int:
    cfg = resolve_config(args)
    out = _prepare_out(args, "transcription")
    grid = cfg.grid_config()
    Qn = energy_normalize(cqt_forward(_load_audio(args.wav, grid), grid))
    roll = salience_transcribe(Qn, grid, cfg.salience_params())
    write_pianoroll(out / "transcription.tamt", roll)
    events = extract_note_events(roll.notes, roll.onsets, grid=grid)
    write_events(out / "events.jsonl", events)
    _save_config(out, cfg)
    print(f"{len(events)} notes -> {out}")
    return 0


def cmd_separate(args) -> int:
    cfg = resolve_config(args)
    out = _prepare_out(args, "separation")
    grid = cfg.grid_config()
    sep = cfg.separation
    level = "frame" if sep.frame_level else "note"
    res = separate_audio(
        _load_audio(args.wav, grid),
        sep.mix,
        grid=grid,
        level=level,
        associate=cfg.associate_flag(),
        threshold=sep.threshold,
        seed=cfg.seed,
        params=cfg.salience_params(),
    )
    result = res.result
    rolls, events = list(result.rolls), list(result.events)
    summary = {
        "level": level,
        "associate": bool(result.extras.get("associate")),
        "n_sources": sep.mix,
        "n_sources_estimate": result.n_sources_estimate,
        "permutation": None,
    }
    if args.refs:
        refs = [read_pianoroll(p, grid) for p in args.refs]
        perm, per_source, mean = pit_match(refs, rolls, sep.threshold)
        rolls = [rolls[p] for p in perm]
        events = [events[p] for p in perm]
        summary["permutation"] = list(perm)
        table = {f"source_{k}": s for k, s in enumerate(per_source)}
        table["mean"] = mean
        (out / "metrics.tsv").write_text(format_table(table))
    for k, (roll, evs) in enumerate(zip(rolls, events)):
        write_pianoroll(out / f"source_{k}.tamt", roll, {"level": level})
        write_events(out / f"source_{k}.jsonl", [dataclasses.replace(ev, track=k) for ev in evs])
    write_pianoroll(out / "transcription.tamt", res.transcription)
    write_tensor(out / "labels.tamt", np.asarray(result.labels, dtype=np.float32), {"level": level})
    (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    _save_config(out, cfg)
    print(f"{level}-level separation into {sep.mix} sources -> {out}")
    if args.refs:
        print((out / "metrics.tsv").read_text(), end="")
    return 0


def cmd_eval(args) -> int:
    if len(args.ref) != len(args.est):
        raise SystemExit("need as many --est as --ref files")
    refs = [read_pianoroll(p) for p in args.ref]
    ests = [read_pianoroll(p) for p in args.est]
    perm, per_source, mean = pit_match(refs, ests, args.threshold if args.threshold is not None else 0.5)
    table = {f"source_{k}": s for k, s in enumerate(per_source)}
    table["mean"] = mean
    sys.stdout.write(format_table(table))
    print(f"# permutation {list(perm)}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# Plotting
# ---------------------------------------------------------------------------

_VIRIDIS_ANCHORS = np.array(
    [
        (68, 1, 84),
        (72, 40, 120),
        (62, 74, 137),
        (49, 104, 142),
        (38, 130, 142),
        (31, 158, 137),
        (53, 183, 121),
        (109, 205, 89),
        (180, 222, 44),
        (253, 231, 37),
    ],
    dtype=float,
)


def viridis_lut(n: int = 256) -> np.ndarray:
    x = np.linspace(0.0, 1.0, n)
    xp = np.linspace(0.0, 1.0, len(_VIRIDIS_ANCHORS))
    return np.stack([np.interp(x, xp, _VIRIDIS_ANCHORS[:, c]) for c in range(3)], axis=1).round().astype(np.uint8)


def render_image(tensor: np.ndarray, kind: str, dynamic_range_db: float = 80.0) -> np.ndarray:
    """(H, W, 3) uint8 image with row 0 of the tensor at the bottom."""
    a = np.asarray(tensor)
    if kind == "roll":
        if a.ndim == 3:
            a = a[0]  # stacked (notes, onsets) rolls: plot the notes
        v = np.clip(np.real(a).astype(float), 0.0, 1.0)
        grey = (v * 255).round().astype(np.uint8)
        img = np.repeat(grey[:, :, None], 3, axis=2)
    elif kind == "spectrogram":
        mag = np.abs(a).astype(float)
        if mag.ndim != 2:
            raise ValueError("spectrogram plot needs a 2-D tensor")
        peak = mag.max()
        if peak > 0:
            db = 20.0 * np.log10(np.maximum(mag / peak, 1e-12))
            v = np.clip(1.0 + db / dynamic_range_db, 0.0, 1.0)
        else:
            v = np.zeros_like(mag)
        img = viridis_lut()[(v * 255).round().astype(int)]
    else:
        raise ValueError(f"unknown plot kind {kind!r}; use 'spectrogram' or 'roll'")
    return img[::-1]


def write_ppm(path, img: np.ndarray) -> None:
    h, w, _ = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img, dtype=np.uint8).tobytes())


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4][: w * h * 3], dtype=np.uint8).reshape(h, w, 3)


def cmd_plot(args) -> int:
    tensor, _ = read_tensor(args.tensor)
    img = render_image(tensor, args.kind)
    out = Path(args.out or Path(args.tensor).with_suffix(".ppm"))
    out.parent.mkdir(parents=True, exist_ok=True)
    write_ppm(out, img)
    print(f"{img.shape[1]} x {img.shape[0]} PPM -> {out}")
    return 0


# ---------------------------------------------------------------------------
# Self tests
# ---------------------------------------------------------------------------

def _check(name: str, ok: bool, results: list) -> None:
    results.append(bool(ok))
    print(f"{'PASS' if ok else 'FAIL'}\t{name}")


def losses_selftest(seed: int = 0) -> list[bool]:
    from .losses import LossHistory, deep_cluster_loss, dwa_weights, focal_loss, magnitude_balance

    rng = make_rng(seed, "losses-selftest")
    results: list[bool] = []
    worst = 0.0
    for _ in range(20):
        K, D, M = rng.integers(1, 51), rng.integers(1, 9), rng.integers(1, 5)
        V = rng.normal(size=(K, D))
        Z = np.eye(M)[rng.integers(0, M, K)]
        a, b = deep_cluster_loss(V, Z), deep_cluster_loss(V, Z, naive=True)
        worst = max(worst, abs(a - b) / max(abs(b), 1e-12))
    _check("deep clustering loss: Gram form equals K x K form", worst < 1e-9, results)
    p = rng.uniform(0.01, 0.99, 100)
    y = (rng.random(100) < 0.5).astype(float)
    bce = float(np.mean(-(y * np.log(p) + (1 - y) * np.log(1 - p))))
    _check("focal loss with gamma=0, alpha=0.5 is half the BCE", abs(focal_loss(p, y, 0.5, 0.0) - 0.5 * bce) < 1e-9, results)
    L = rng.uniform(0.1, 10.0, 4)
    w = magnitude_balance(L)
    _check("magnitude balancing equalises weighted losses", np.ptp(w * L) < 1e-12, results)
    h = LossHistory()
    h.record([1.0, 2.0, 3.0])
    h.record([0.5, 1.0, 1.5])
    _check("DWA with equal ratios is uniform", np.allclose(dwa_weights(h), 1 / 3, atol=1e-15), results)
    return results


def selftest(seed: int = 0) -> list[bool]:
    from .memory import associate_attention, associate_once, hebb_store, hopfield_recall, weighted_memory

    rng = make_rng(seed, "selftest")
    results: list[bool] = []
    Q = rng.normal(size=(288, 50)) + 1j * rng.normal(size=(288, 50))
    Qn = energy_normalize(Q)
    e = np.sum(np.abs(Qn) ** 2, axis=0)
    _check("energy normalisation gives unit frame-energy std", abs(np.std(e, ddof=1) - 1) < 1e-6, results)
    _check("energy normalisation is scale invariant", np.allclose(energy_normalize(3 * Q), Qn, rtol=0, atol=1e-9), results)
    V, Y = rng.normal(size=(200, 16)), rng.random(200)
    a, b = associate_once(V, Y), associate_attention(V, Y)
    _check("association: memory path equals attention path", np.linalg.norm(a - b) <= 1e-12 * np.linalg.norm(b), results)
    Mm = weighted_memory(V, Y).M
    _check("memory matrix symmetric PSD", np.allclose(Mm, Mm.T) and np.linalg.eigvalsh(Mm).min() > -1e-12, results)
    pats = rng.choice([-1.0, 1.0], size=(5, 64))
    mem = hebb_store(pats)
    probe = pats[0].copy()
    probe[rng.choice(64, 6, replace=False)] *= -1
    _check("Hopfield recall of a corrupted pattern", np.array_equal(hopfield_recall(mem, probe).state, pats[0]), results)
    grid = DEFAULT_GRID
    t = np.arange(grid.sample_rate) / grid.sample_rate
    Qa = np.abs(cqt_forward(np.sin(2 * np.pi * 440.0 * t), grid).data)
    mid = Qa[:, Qa.shape[1] // 4 : 3 * Qa.shape[1] // 4]
    _check("440 Hz tone peaks on the A4 row", np.all(np.abs(mid.argmax(axis=0) - int(grid.pitch_row(69 - 24))) <= 1), results)
    refs = [Pianoroll((rng.random((84, 20)) < 0.2).astype(float), np.zeros((84, 20))) for _ in range(3)]
    perm = (2, 0, 1)
    ests = [None] * 3
    for k in range(3):
        ests[perm[k]] = refs[k]
    _check("PIT recovers a planted permutation", pit_match(refs, ests)[0] == perm, results)
    results += losses_selftest(seed)
    return results


def cmd_selftest(args) -> int:
    results = selftest(resolve_config(args).seed)
    return 0 if all(results) else 1


def cmd_losses(args) -> int:
    results = losses_selftest(resolve_config(args).seed)
    return 0 if all(results) else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out", help="output directory (or file for plot)")
    sepflags = argparse.ArgumentParser(add_help=False)
    sepflags.add_argument("--mix", type=int, help="number of sources M")
    sepflags.add_argument("--threshold", type=float, help="note threshold for frame-level selection and metrics")
    sepflags.add_argument("--associate", choices=("on", "off"), help="association pass before clustering")
    sepflags.add_argument("--frame-level", action="store_true", help="cluster bins instead of notes")
    sepflags.add_argument("--snr-db", type=float, help="add white noise at this SNR when mixing")

    p = argparse.ArgumentParser(prog="timbresep", description="Timbre-separated transcription toolkit.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("gen", parents=[common, sepflags], help="generate the synthetic multi-timbre dataset")
    s.set_defaults(func=cmd_gen)
    s = sub.add_parser("mix", parents=[common, sepflags], help="mix one manifest row of a generated dataset")
    s.add_argument("dataset")
    s.add_argument("--index", type=int, default=0)
    s.set_defaults(func=cmd_mix)
    s = sub.add_parser("cqt", parents=[common], help="constant-Q transform of a WAV file")
    s.add_argument("wav")
    s.set_defaults(func=cmd_cqt)
    s = sub.add_parser("transcribe", parents=[common], help="timbre-agnostic transcription of a WAV file")
    s.add_argument("wav")
    s.set_defaults(func=cmd_transcribe)
    s = sub.add_parser("separate", parents=[common, sepflags], help="timbre-separated transcription of a WAV file")
    s.add_argument("wav")
    s.add_argument("--refs", nargs="+", help="reference roll files for metrics")
    s.set_defaults(func=cmd_separate)
    s = sub.add_parser("eval", parents=[common], help="PIT frame metrics of estimated vs reference rolls")
    s.add_argument("--ref", nargs="+", required=True)
    s.add_argument("--est", nargs="+", required=True)
    s.add_argument("--threshold", type=float)
    s.set_defaults(func=cmd_eval)
    s = sub.add_parser("plot", parents=[common], help="render a tensor file as a PPM heatmap")
    s.add_argument("tensor")
    s.add_argument("--kind", choices=("spectrogram", "roll"), default="spectrogram")
    s.set_defaults(func=cmd_plot)
    s = sub.add_parser("selftest", parents=[common], help="run the built-in contract checks")
    s.set_defaults(func=cmd_selftest)
    s = sub.add_parser("losses", parents=[common], help="loss toolbox commands")
    s.add_argument("action", choices=("selftest",))
    s.set_defaults(func=cmd_losses)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
