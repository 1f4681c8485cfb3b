"""Dataset loading, feature preparation, and chunking for training.

A SplitData handle tags every tensor with its split name; norm fitting
refuses anything but "train" so test data can never leak into the
statistics. Recordings are chunked into fixed windows: training uses the
configured hop and drops incomplete tails, evaluation tiles the full
recording with non-overlapping windows (zero-padded tail, predictions
truncated back).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from ..augment import Sample
from ..features import (
    FeatureTensor,
    MelConfig,
    NormStats,
    StftConfig,
    apply_norm,
    fit_norm_stats,
    logmel,
)
from ..labels import LabelGrid, events_to_grid, read_label_csv
from ..scene.dataset import read_manifest
from ..scene.types import MultichannelAudio
from .config import DataError

LABEL_FPS = 10
FEATURE_FPS = 80


def mono_select(audio: MultichannelAudio, fmt: str) -> MultichannelAudio:
    """Channel 0 for both formats: FOA W, MIC first capsule."""
    if audio.n_channels != 4:
        raise DataError(f"mono_select expects 4 channels, got {audio.n_channels}")
    if fmt not in ("foa", "mic"):
        raise DataError(f"unknown format {fmt!r}")
    return MultichannelAudio(audio.samples[:1].copy(), audio.sample_rate, audio.clipped)


def load_scene_audio(path: Path) -> MultichannelAudio:
    try:
        rate, data = wavfile.read(path)
    except (FileNotFoundError, ValueError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if data.ndim == 1:
        data = data[:, None]
    return MultichannelAudio(np.ascontiguousarray(data.T, dtype=np.float32), rate)


@dataclass
class SplitData:
    """All recordings of one split, featurized (possibly normalized)."""

    split: str
    scene_ids: list
    features: list  # FeatureTensor per scene
    labels: list  # LabelGrid per scene

    def __len__(self) -> int:
        return len(self.scene_ids)


# Featurizing a split reads every WAV and runs the full STFT/mel stack, which
# dominates wall time when many runs share one dataset (grids, seed sweeps).
# Raw (un-normalized) split loads are therefore memoized; entries are shared,
# so callers must treat the returned tensors as read-only (normalize_split and
# chunk already copy).
_SPLIT_CACHE: dict = {}
_SPLIT_CACHE_MAX = 8


def clear_split_cache() -> None:
    _SPLIT_CACHE.clear()


def _split_cache_key(root, split, fmt, channels, n_classes, stft_cfg, mel_cfg):
    s = stft_cfg if stft_cfg is not None else StftConfig()
    m = mel_cfg if mel_cfg is not None else MelConfig()
    return (
        str(root),
        split,
        fmt,
        channels,
        n_classes,
        s.fft_size,
        s.hop,
        s.sample_rate,
        s.centered,
        m.n_mels,
        m.f_min,
        m.f_max,
        m.log_floor,
    )


def load_split(
    root: Path,
    split: str,
    fmt: str,
    channels: str = "all",
    n_classes: int = 12,
    stft_cfg: StftConfig | None = None,
    mel_cfg: MelConfig | None = None,
) -> SplitData:
    root = Path(root).resolve()
    key = _split_cache_key(root, split, fmt, channels, n_classes, stft_cfg, mel_cfg)
    hit = _SPLIT_CACHE.get(key)
    if hit is not None:
        return SplitData(hit.split, list(hit.scene_ids), list(hit.features), list(hit.labels))
    try:
        ids = read_manifest(root, split)
    except FileNotFoundError as exc:
        raise DataError(f"no manifest for split {split!r} under {root}") from exc
    feats, labels = [], []
    for sid in ids:
        audio = load_scene_audio(root / split / fmt / f"{sid}.wav")
        if channels == "mono":
            audio = mono_select(audio, fmt)
        feats.append(logmel(audio, stft_cfg, mel_cfg))
        events = read_label_csv(root / split / "labels" / f"{sid}.csv")
        n_samples = audio.samples.shape[1]
        n_frames = int(math.ceil(round(n_samples / audio.sample_rate * 1000) / 100))
        labels.append(events_to_grid(events, n_frames, n_classes))
    data = SplitData(split, list(ids), feats, labels)
    while len(_SPLIT_CACHE) >= _SPLIT_CACHE_MAX:
        _SPLIT_CACHE.pop(next(iter(_SPLIT_CACHE)))
    _SPLIT_CACHE[key] = data
    return SplitData(data.split, list(ids), list(feats), list(labels))


def fit_split_norm(data: SplitData) -> NormStats:
    if data.split != "train":
        raise DataError(f"norm stats must be fitted on the train split, not {data.split!r}")
    if not data.features:
        raise DataError("cannot fit norm stats on an empty split")
    return fit_norm_stats(data.features)


def normalize_split(data: SplitData, stats: NormStats) -> SplitData:
    feats = [apply_norm(t, stats) for t in data.features]
    return SplitData(data.split, data.scene_ids, feats, data.labels)


def n_chunks(duration_s: float, chunk_s: float, hop_s: float) -> int:
    """Complete sliding windows: floor((duration - chunk) / hop) + 1."""
    if duration_s < chunk_s:
        raise DataError(f"recording of {duration_s} s shorter than {chunk_s} s chunk")
    return int(math.floor((duration_s - chunk_s) / hop_s + 1e-9)) + 1


def chunk(
    features: FeatureTensor,
    labels: LabelGrid,
    chunk_s: float,
    hop_s: float = 0.5,
) -> list:
    """Sliding training windows; the incomplete final window is dropped."""
    duration = labels.n_frames / LABEL_FPS
    feat_frames = int(round(chunk_s * FEATURE_FPS))
    lab_frames = int(round(chunk_s * LABEL_FPS))
    out = []
    for i in range(n_chunks(duration, chunk_s, hop_s)):
        t0 = i * hop_s
        fstart = int(round(t0 * FEATURE_FPS))
        lstart = int(round(t0 * LABEL_FPS))
        feats = FeatureTensor(
            features.values[:, fstart : fstart + feat_frames].copy(),
            features.frame_rate,
            features.normalized,
        )
        lab = LabelGrid(labels.values[lstart : lstart + lab_frames].copy())
        out.append(Sample(feats, lab))
    return out


def eval_windows(features: FeatureTensor, labels: LabelGrid, chunk_s: float):
    """Non-overlapping windows tiling the whole recording.

    Yields (feature_chunk_values, label_frames_in_window); the final window
    is zero-padded in features, and label frame count tells the caller how
    many prediction frames to keep.
    """
    feat_frames = int(round(chunk_s * FEATURE_FPS))
    lab_frames = int(round(chunk_s * LABEL_FPS))
    t_lab = labels.n_frames
    n_windows = -(-t_lab // lab_frames)
    for i in range(n_windows):
        lstart = i * lab_frames
        fstart = lstart * (FEATURE_FPS // LABEL_FPS)
        block = features.values[:, fstart : fstart + feat_frames]
        if block.shape[1] < feat_frames:
            pad = feat_frames - block.shape[1]
            block = np.pad(block, ((0, 0), (0, pad), (0, 0)))
        keep = min(lab_frames, t_lab - lstart)
        yield block, keep
