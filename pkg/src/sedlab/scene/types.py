"""Declarative scene descriptions and the rendered audio container."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_SAMPLE_RATE = 24000
TRAJECTORY_HOP_S = 0.1


@dataclass
class EventSpec:
    """One sound event: what, when, how loud, and where it moves.

    trajectory holds (azimuth, elevation) radians sampled every 100 ms;
    its length must equal ceil(duration / 0.1).
    """

    class_id: int
    onset: float
    duration: float
    trajectory: np.ndarray
    atom: str | None = None
    gain: float = 1.0

    def __post_init__(self):
        if self.onset < 0:
            raise ValueError("onset must be non-negative")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        self.trajectory = np.asarray(self.trajectory, dtype=np.float64)
        if self.trajectory.ndim != 2 or self.trajectory.shape[1] != 2:
            raise ValueError("trajectory must have shape (n_segments, 2)")
        expected = math.ceil(self.duration / TRAJECTORY_HOP_S - 1e-9)
        if len(self.trajectory) != expected:
            raise ValueError(
                f"trajectory length {len(self.trajectory)} != ceil(duration/0.1) = {expected}"
            )
        az, el = self.trajectory[:, 0], self.trajectory[:, 1]
        if np.any(az <= -math.pi) or np.any(az > math.pi):
            raise ValueError("azimuth must lie in (-pi, pi]")
        if np.any(np.abs(el) > math.pi / 2):
            raise ValueError("elevation must lie in [-pi/2, pi/2]")

    @property
    def offset(self) -> float:
        return self.onset + self.duration


@dataclass
class SceneSpec:
    """A scene: duration, events, diffuse-noise SNR, and the render seed."""

    duration: float
    events: list
    noise_snr_db: float = math.inf
    seed: int = 0

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("scene duration must be positive")
        for ev in self.events:
            if ev.onset + ev.duration > self.duration + 1e-9:
                raise ValueError("event extends past the scene end")


@dataclass
class MultichannelAudio:
    """C x N sample block plus its rate; `clipped` flags |sample| > 1."""

    samples: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE
    clipped: bool = False

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if self.samples.ndim != 2:
            raise ValueError("samples must be a C x N matrix")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]
