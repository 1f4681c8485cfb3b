"""Log-mel feature extraction and z-score normalization.

Conventions pinned here (and by the golden tests):
  * STFT uses an unnormalized rfft of Hann-windowed, reflection-padded
    frames; T = floor(N / hop) + 1 with hop 300 at 24 kHz -> 80 frames/s.
  * Mel scale is HTK: mel(f) = 2595 * log10(1 + f / 700), triangles peak
    at 1 on n_mels + 2 uniformly spaced mel breakpoints in [f_min, f_max].
  * Log is natural log with an additive 1e-10 floor.
  * Normalization is per (channel, mel-bin) over all training frames.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .scene.types import MultichannelAudio

NORM_MAGIC = b"SEDNORM1"
STD_FLOOR = 1e-8


@dataclass(frozen=True)
class StftConfig:
    fft_size: int = 1024
    hop: int = 300
    sample_rate: int = 24000
    centered: bool = True

    def __post_init__(self):
        if self.fft_size & (self.fft_size - 1) or self.fft_size <= 0:
            raise ValueError("fft_size must be a power of two")
        if not 0 < self.hop < self.fft_size:
            raise ValueError("hop must lie in (0, fft_size)")

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1

    @property
    def frame_rate(self) -> float:
        return self.sample_rate / self.hop


@dataclass(frozen=True)
class MelConfig:
    n_mels: int = 128
    f_min: float = 50.0
    f_max: float = 12000.0
    log_floor: float = 1e-10

    def __post_init__(self):
        if not 0 <= self.f_min < self.f_max:
            raise ValueError("need 0 <= f_min < f_max")
        if self.n_mels < 1:
            raise ValueError("n_mels must be >= 1")


@dataclass
class FeatureTensor:
    """C x T x F feature values at a fixed frame rate."""

    values: np.ndarray
    frame_rate: float
    normalized: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim != 3:
            raise ValueError("values must be C x T x F")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite feature values")

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]

    @property
    def n_bins(self) -> int:
        return self.values.shape[2]


def hann_window(size: int) -> np.ndarray:
    n = np.arange(size)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * n / size))


def stft(audio: np.ndarray, cfg: StftConfig) -> np.ndarray:
    """Complex T x (R/2+1) spectrogram of one channel."""
    x = np.asarray(audio, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("stft expects a non-empty 1-D signal")
    r = cfg.fft_size
    if cfg.centered:
        x = np.pad(x, r // 2, mode="reflect")
    n_frames = (len(audio) // cfg.hop) + 1
    window = hann_window(r)
    starts = np.arange(n_frames) * cfg.hop
    # centered framing always fits (N + R padded samples); uncentered tail
    # frames are zero-padded so T stays floor(N/hop)+1 in both modes
    end = int(starts[-1]) + r
    if len(x) < end:
        x = np.pad(x, (0, end - len(x)))
    frames = x[starts[:, None] + np.arange(r)[None, :]] * window
    return np.fft.rfft(frames, axis=1)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(mel_cfg: MelConfig, stft_cfg: StftConfig) -> np.ndarray:
    """F x (R/2+1) triangular filters, peak 1, uniform on the mel scale."""
    if mel_cfg.f_max > stft_cfg.sample_rate / 2:
        raise ValueError("f_max above Nyquist")
    breakpoints = mel_to_hz(
        np.linspace(hz_to_mel(mel_cfg.f_min), hz_to_mel(mel_cfg.f_max), mel_cfg.n_mels + 2)
    )
    bin_hz = np.arange(stft_cfg.n_bins) * stft_cfg.sample_rate / stft_cfg.fft_size
    fb = np.zeros((mel_cfg.n_mels, stft_cfg.n_bins))
    for k in range(mel_cfg.n_mels):
        lo, mid, hi = breakpoints[k : k + 3]
        up = (bin_hz - lo) / (mid - lo)
        down = (hi - bin_hz) / (hi - mid)
        fb[k] = np.maximum(0.0, np.minimum(up, down))
        if not fb[k].any():
            raise ValueError(f"mel filter {k} has empty support; reduce n_mels")
    return fb


def logmel(
    audio: MultichannelAudio,
    stft_cfg: StftConfig | None = None,
    mel_cfg: MelConfig | None = None,
) -> FeatureTensor:
    """Unnormalized log-mel features, C x T x n_mels."""
    stft_cfg = stft_cfg or StftConfig(sample_rate=audio.sample_rate)
    mel_cfg = mel_cfg or MelConfig()
    if stft_cfg.sample_rate != audio.sample_rate:
        raise ValueError("sample rate mismatch between audio and StftConfig")
    fb_t = mel_filterbank(mel_cfg, stft_cfg).T
    chans = []
    for c in range(audio.n_channels):
        spec = stft(audio.samples[c], stft_cfg)
        power = (spec.real**2 + spec.imag**2) @ fb_t
        chans.append(np.log(power + mel_cfg.log_floor))
    values = np.stack(chans).astype(np.float32)
    return FeatureTensor(values, frame_rate=stft_cfg.frame_rate, normalized=False)


# ---------------------------------------------------------------------------
# normalization statistics


@dataclass
class NormStats:
    mean: np.ndarray  # C x F
    std: np.ndarray  # C x F, floored

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.std = np.asarray(self.std, dtype=np.float64)
        if self.mean.shape != self.std.shape or self.mean.ndim != 2:
            raise ValueError("mean/std must share a C x F shape")
        if np.any(self.std <= 0):
            raise ValueError("std must be positive")


def fit_norm_stats(tensors: Iterable[FeatureTensor]) -> NormStats:
    """Accumulate per-(channel, bin) moments over all frames, in input order."""
    count = 0
    total = None
    total_sq = None
    for t in tensors:
        v = t.values.astype(np.float64)
        if total is None:
            total = v.sum(axis=1)
            total_sq = (v**2).sum(axis=1)
        else:
            total += v.sum(axis=1)
            total_sq += (v**2).sum(axis=1)
        count += t.n_frames
    if count == 0:
        raise ValueError("fit_norm_stats needs at least one tensor")
    mean = total / count
    var = np.maximum(total_sq / count - mean**2, 0.0)
    return NormStats(mean, np.maximum(np.sqrt(var), STD_FLOOR))


def apply_norm(t: FeatureTensor, stats: NormStats) -> FeatureTensor:
    if (t.n_channels, t.n_bins) != stats.mean.shape:
        raise ValueError("stats shape does not match tensor")
    v = (t.values - stats.mean[:, None, :].astype(t.values.dtype)) / stats.std[
        :, None, :
    ].astype(t.values.dtype)
    return FeatureTensor(v.astype(np.float32), t.frame_rate, normalized=True)


def unapply_norm(t: FeatureTensor, stats: NormStats) -> FeatureTensor:
    v = t.values * stats.std[:, None, :].astype(t.values.dtype) + stats.mean[
        :, None, :
    ].astype(t.values.dtype)
    return FeatureTensor(v.astype(np.float32), t.frame_rate, normalized=False)


def save_norm_stats(path: Path, stats: NormStats) -> None:
    """Binary layout: magic 'SEDNORM1', u32 C, u32 F, f64 mean, f64 std (LE)."""
    c, f = stats.mean.shape
    blob = (
        NORM_MAGIC
        + struct.pack("<II", c, f)
        + stats.mean.astype("<f8").tobytes()
        + stats.std.astype("<f8").tobytes()
    )
    Path(path).write_bytes(blob)


def load_norm_stats(path: Path) -> NormStats:
    raw = Path(path).read_bytes()
    if raw[:8] != NORM_MAGIC:
        raise ValueError(f"{path}: not a norm-stats file")
    c, f = struct.unpack("<II", raw[8:16])
    need = 16 + 2 * 8 * c * f
    if len(raw) != need:
        raise ValueError(f"{path}: truncated norm-stats file")
    flat = np.frombuffer(raw, dtype="<f8", offset=16)
    return NormStats(flat[: c * f].reshape(c, f).copy(), flat[c * f :].reshape(c, f).copy())
