"""Synthetic SED dataset generation: sampled scenes written as WAV + CSV.

Layout under the dataset root:

    <split>/foa/<scene>.wav     4-channel float32 WAV, 24 kHz
    <split>/mic/<scene>.wav
    <split>/labels/<scene>.csv  onset_s,offset_s,class_id
    <split>/manifest.txt        one scene id per line

Event onsets/durations are quantized to whole milliseconds so the label
CSV round-trips exactly. All sampling is driven by per-scene seeds spawned
from the master seed; scene renders are order-independent.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from ..labels import write_label_csv
from .arrays import ArrayFormat
from .atoms import N_CLASSES
from .render import render_scene
from .types import DEFAULT_SAMPLE_RATE, EventSpec, SceneSpec

# lognormal matching a 3.2 s median and 8.3 s mean event length
EVENT_LEN_MU = 1.1631508098056809
EVENT_LEN_SIGMA = 1.3806554276841645

SPLITS = ("train", "val", "test")


@dataclass
class DatasetConfig:
    root: Path
    n_train: int = 60
    n_val: int = 15
    n_test: int = 15
    scene_duration: float = 20.0
    n_classes: int = N_CLASSES
    max_polyphony: int = 3
    events_per_scene: tuple[int, int] = (3, 5)
    snr_db: tuple[float, float] = (6.0, 20.0)
    gain: tuple[float, float] = (0.05, 0.2)
    min_event_s: float = 0.25
    event_len_mu: float = EVENT_LEN_MU
    event_len_sigma: float = EVENT_LEN_SIGMA
    formats: tuple[str, ...] = ("foa", "mic")
    sample_rate: int = DEFAULT_SAMPLE_RATE
    seed: int = 0
    n_workers: int = 1

    def __post_init__(self):
        self.root = Path(self.root)
        if min(self.n_train, self.n_val, self.n_test) < 0:
            raise ValueError("split counts must be non-negative")
        if not 1 <= self.n_classes <= N_CLASSES:
            raise ValueError(f"n_classes must be in [1, {N_CLASSES}]")
        if self.max_polyphony < 1:
            raise ValueError("max_polyphony must be >= 1")
        unknown = set(self.formats) - {"foa", "mic"}
        if unknown:
            raise ValueError(f"unknown formats: {sorted(unknown)}")

    @property
    def split_counts(self) -> dict[str, int]:
        return {"train": self.n_train, "val": self.n_val, "test": self.n_test}


def _sample_trajectory(rng: np.random.Generator, n_hops: int) -> np.ndarray:
    az = rng.uniform(-math.pi, math.pi)
    el = rng.uniform(-math.pi / 3, math.pi / 3)
    traj = np.empty((n_hops, 2))
    if rng.random() < 0.5:
        traj[:] = (az, el)
        return traj
    # slow random walk, ~2 degrees rms per 100 ms hop
    step = math.radians(2.0)
    for j in range(n_hops):
        traj[j] = (az, el)
        az = math.remainder(az + rng.normal(0.0, step), 2 * math.pi)
        el = float(np.clip(el + rng.normal(0.0, step), -math.pi / 2, math.pi / 2))
    return traj


def sample_scene(cfg: DatasetConfig, rng: np.random.Generator, seed: int) -> SceneSpec:
    """Draw one scene spec honoring the polyphony cap (count over all classes)."""
    dur_ms = int(round(cfg.scene_duration * 1000))
    n_frames = -(-dur_ms // 100)
    frame_load = np.zeros(n_frames, dtype=np.int64)
    n_events = int(rng.integers(cfg.events_per_scene[0], cfg.events_per_scene[1] + 1))
    events = []
    for _ in range(n_events):
        for _attempt in range(50):
            length = float(rng.lognormal(cfg.event_len_mu, cfg.event_len_sigma))
            length = min(max(length, cfg.min_event_s), cfg.scene_duration - 0.001)
            length_ms = max(1, int(round(length * 1000)))
            onset_ms = int(rng.integers(0, dur_ms - length_ms + 1))
            first = onset_ms // 100
            last = -(-(onset_ms + length_ms) // 100)
            if np.max(frame_load[first:last]) >= cfg.max_polyphony:
                continue
            frame_load[first:last] += 1
            n_hops = -(-length_ms // 100)
            events.append(
                EventSpec(
                    class_id=int(rng.integers(0, cfg.n_classes)),
                    onset=onset_ms / 1000.0,
                    duration=length_ms / 1000.0,
                    trajectory=_sample_trajectory(rng, n_hops),
                    gain=float(rng.uniform(*cfg.gain)),
                )
            )
            break
    events.sort(key=lambda ev: (ev.onset, ev.class_id))
    snr = float(rng.uniform(*cfg.snr_db))
    return SceneSpec(duration=cfg.scene_duration, events=events, noise_snr_db=snr, seed=seed)


def _write_scene(args) -> str:
    cfg, split, scene_id, spec = args
    for kind in cfg.formats:
        audio, _ = render_scene(spec, ArrayFormat(kind), cfg.sample_rate)
        path = cfg.root / split / kind / f"{scene_id}.wav"
        wavfile.write(path, cfg.sample_rate, audio.samples.T)
    write_label_csv(
        cfg.root / split / "labels" / f"{scene_id}.csv",
        [(ev.onset, ev.offset, ev.class_id) for ev in spec.events],
    )
    return scene_id


def generate_dataset(cfg: DatasetConfig) -> Path:
    """Generate all splits under cfg.root; returns the root path."""
    jobs = []
    for s_idx, split in enumerate(SPLITS):
        for sub in list(cfg.formats) + ["labels"]:
            (cfg.root / split / sub).mkdir(parents=True, exist_ok=True)
        for i in range(cfg.split_counts[split]):
            ss = np.random.SeedSequence([cfg.seed, s_idx, i])
            render_seed = int(ss.generate_state(1, np.uint64)[0])
            rng = np.random.Generator(np.random.PCG64(ss.spawn(1)[0]))
            spec = sample_scene(cfg, rng, render_seed)
            jobs.append((cfg, split, f"scene_{i:04d}", spec))

    if cfg.n_workers > 1 and jobs:
        with ProcessPoolExecutor(max_workers=cfg.n_workers) as pool:
            list(pool.map(_write_scene, jobs, chunksize=1))
    else:
        for job in jobs:
            _write_scene(job)

    for split in SPLITS:
        names = sorted(j[2] for j in jobs if j[1] == split)
        text = "".join(f"{name}\n" for name in names)
        (cfg.root / split / "manifest.txt").write_text(text, encoding="utf-8")
    return cfg.root


def read_manifest(root: Path, split: str) -> list[str]:
    path = Path(root) / split / "manifest.txt"
    return [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln]
