"""Spectrogram-domain augmentations: mixup, cutout family, shift, swap.

All transforms take and return Sample (normalized features + labels) and
leave labels untouched except mixup, which mixes them convexly. Pipeline
order per sample is mixup -> cutout -> frequency shift -> channel swap;
each sample consumes an independent counter-based random stream so batch
parallelism cannot change results.

Optional keyword overrides (lam=, shift=, perm=, ...) bypass the rng for
the corresponding draw; they exist so tests can force exact scenarios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .features import FeatureTensor
from .labels import LabelGrid


@dataclass(frozen=True)
class AugmentConfig:
    mu: bool = False
    co: bool = False
    fs: bool = False
    cs: bool = False
    p_mixup: float = 0.8
    p_other: float = 0.5
    mixup_beta: tuple[float, float] = (0.5, 0.5)
    mixup_skip_band: tuple[float, float] = (0.3, 0.7)
    fs_max_bins: int = 10
    cutout_area: tuple[float, float] = (0.02, 0.30)
    multi_cutout_patches: int = 8
    multi_cutout_size: tuple[int, int] = (8, 8)  # frames x bins
    specaug_time_frac: float = 0.15
    specaug_freq_frac: float = 0.20
    seed: int = 0

    def __post_init__(self):
        for p in (self.p_mixup, self.p_other):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        for frac in (self.specaug_time_frac, self.specaug_freq_frac):
            if not 0.0 < frac < 1.0:
                raise ValueError("stripe fractions must lie in (0, 1)")

    @property
    def flags(self) -> tuple[bool, bool, bool, bool]:
        return (self.mu, self.co, self.fs, self.cs)


@dataclass
class Sample:
    features: FeatureTensor
    labels: LabelGrid

    def copy(self) -> "Sample":
        return Sample(
            FeatureTensor(
                self.features.values.copy(),
                self.features.frame_rate,
                self.features.normalized,
            ),
            self.labels.copy(),
        )


def _with_values(s: Sample, values: np.ndarray, labels: np.ndarray | None = None) -> Sample:
    feats = FeatureTensor(values, s.features.frame_rate, s.features.normalized)
    lab = LabelGrid(labels) if labels is not None else s.labels.copy()
    return Sample(feats, lab)


def mixup(
    a: Sample,
    b: Sample,
    rng: np.random.Generator,
    cfg: AugmentConfig = AugmentConfig(),
    lam: float | None = None,
) -> Sample:
    """Convex combination of two samples, skipped for lam in the mid band."""
    if a.features.values.shape != b.features.values.shape:
        raise ValueError("mixup requires equal feature shapes")
    if a.labels.values.shape != b.labels.values.shape:
        raise ValueError("mixup requires equal label shapes")
    if lam is None:
        lam = float(rng.beta(*cfg.mixup_beta))
    lo, hi = cfg.mixup_skip_band
    if lo <= lam <= hi:
        return a.copy()
    feats = lam * a.features.values + (1.0 - lam) * b.features.values
    labels = lam * a.labels.values + (1.0 - lam) * b.labels.values
    return _with_values(a, feats.astype(np.float32), labels.astype(np.float32))


def freq_shift(
    s: Sample,
    rng: np.random.Generator,
    cfg: AugmentConfig = AugmentConfig(),
    shift: int | None = None,
) -> Sample:
    """Shift all channels by the same number of mel bins; vacated rows = 0."""
    if shift is None:
        shift = int(rng.integers(-cfg.fs_max_bins, cfg.fs_max_bins + 1))
    v = s.features.values
    out = np.zeros_like(v)
    f = v.shape[2]
    if shift >= 0:
        out[:, :, shift:] = v[:, :, : f - shift]
    else:
        out[:, :, :shift] = v[:, :, -shift:]
    return _with_values(s, out)


def channel_swap(
    s: Sample,
    rng: np.random.Generator,
    perm: tuple[int, ...] | None = None,
) -> Sample:
    """Permute the four channels uniformly at random."""
    if s.features.n_channels != 4:
        raise ValueError("channel_swap requires exactly 4 channels")
    if perm is None:
        perm = tuple(rng.permutation(4).tolist())
    if sorted(perm) != [0, 1, 2, 3]:
        raise ValueError(f"not a permutation of 0..3: {perm}")
    return _with_values(s, s.features.values[list(perm)])


def _support_fill(v: np.ndarray, rng: np.random.Generator) -> float:
    return float(rng.uniform(float(v.min()), float(v.max())))


def cutout_composite(
    s: Sample,
    rng: np.random.Generator,
    cfg: AugmentConfig = AugmentConfig(),
    choice: int | None = None,
    time_width: int | None = None,
    freq_width: int | None = None,
) -> Sample:
    """One of: single same-ratio cutout, 8 small patches, SpecAugment stripes.

    Masks and fills are shared across channels.
    """
    v = s.features.values
    _, t, f = v.shape
    if t < cfg.multi_cutout_size[0]:
        raise ValueError(f"chunk too short for cutout ({t} < {cfg.multi_cutout_size[0]} frames)")
    if choice is None:
        choice = int(rng.integers(0, 3))
    out = v.copy()
    if choice == 0:
        # rectangle matching the T:F aspect ratio, area uniform in [2%, 30%]
        side = math.sqrt(rng.uniform(*cfg.cutout_area))
        dt = max(1, int(round(t * side)))
        df = max(1, int(round(f * side)))
        t0 = int(rng.integers(0, t))
        f0 = int(rng.integers(0, f))
        out[:, t0 : t0 + dt, f0 : f0 + df] = _support_fill(v, rng)
    elif choice == 1:
        pt, pf = cfg.multi_cutout_size
        for _ in range(cfg.multi_cutout_patches):
            t0 = int(rng.integers(0, max(1, t - pt + 1)))
            f0 = int(rng.integers(0, max(1, f - pf + 1)))
            out[:, t0 : t0 + pt, f0 : f0 + pf] = _support_fill(v, rng)
    else:
        if time_width is None:
            time_width = int(rng.integers(0, int(cfg.specaug_time_frac * t) + 1))
        if freq_width is None:
            freq_width = int(rng.integers(0, int(cfg.specaug_freq_frac * f) + 1))
        if time_width:
            t0 = int(rng.integers(0, t - time_width + 1))
            out[:, t0 : t0 + time_width, :] = 0.0
        if freq_width:
            f0 = int(rng.integers(0, f - freq_width + 1))
            out[:, :, f0 : f0 + freq_width] = 0.0
    return _with_values(s, out)


def draw_gates(cfg: AugmentConfig, rng: np.random.Generator) -> tuple[bool, bool, bool, bool]:
    """Activation gates in pipeline order (MU, CO, FS, CS).

    All four are always drawn so the stream layout does not depend on the
    enabled flags.
    """
    u = rng.random(4)
    return (
        cfg.mu and u[0] < cfg.p_mixup,
        cfg.co and u[1] < cfg.p_other,
        cfg.fs and u[2] < cfg.p_other,
        cfg.cs and u[3] < cfg.p_other,
    )


def sample_stream(seed_seq: np.random.SeedSequence, index: int) -> np.random.Generator:
    """Independent per-sample stream, keyed by position in the batch."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed_seq.entropy, spawn_key=(index,)))
    )


def apply_pipeline(
    batch: list[Sample],
    cfg: AugmentConfig,
    seed_seq: np.random.SeedSequence | int,
) -> list[Sample]:
    """Augment a batch; mixup partners are drawn from the clean inputs."""
    if isinstance(seed_seq, int):
        seed_seq = np.random.SeedSequence(seed_seq)
    if cfg.mu and len(batch) < 2:
        raise ValueError("mixup needs a batch of at least 2")
    out = []
    for i, sample in enumerate(batch):
        rng = sample_stream(seed_seq, i)
        g_mu, g_co, g_fs, g_cs = draw_gates(cfg, rng)
        cur = sample
        if g_mu:
            j = int(rng.integers(0, len(batch) - 1))
            if j >= i:
                j += 1
            cur = mixup(cur, batch[j], rng, cfg)
        if g_co:
            cur = cutout_composite(cur, rng, cfg)
        if g_fs:
            cur = freq_shift(cur, rng, cfg)
        if g_cs:
            cur = channel_swap(cur, rng)
        out.append(cur.copy() if cur is sample else cur)
    return out
