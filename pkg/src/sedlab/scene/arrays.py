"""Array response models for the two 4-channel recording formats.

FOA gains are frequency-flat intensity ratios; the MIC format encodes
direction as inter-channel phase derived from path-length differences
against a generic far-field model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_SOUND = 343.0
N_CHANNELS = 4

# Tetrahedral capsule directions (azimuth, elevation) in degrees: the
# standard 4-capsule subset geometry, radius 42 mm.
TETRA_CAPSULES_DEG = ((45.0, 35.0), (-45.0, -35.0), (135.0, -35.0), (-135.0, 35.0))
TETRA_RADIUS_M = 0.042


def unit_vector(azimuth: float, elevation: float) -> np.ndarray:
    """Cartesian unit vector for (azimuth, elevation) in radians."""
    return np.array(
        [
            math.cos(azimuth) * math.cos(elevation),
            math.sin(azimuth) * math.cos(elevation),
            math.sin(elevation),
        ]
    )


@dataclass
class ArrayFormat:
    """Geometry bundle for one of the two formats.

    kind is "foa" or "mic"; capsule_dirs/radius/speed_of_sound are only
    meaningful for "mic".
    """

    kind: str
    capsule_dirs: np.ndarray | None = None
    radius: float = TETRA_RADIUS_M
    speed_of_sound: float = SPEED_OF_SOUND
    n_channels: int = N_CHANNELS

    def __post_init__(self):
        self.kind = self.kind.lower()
        if self.kind not in ("foa", "mic"):
            raise ValueError(f"unknown array format kind {self.kind!r}")
        if self.kind == "mic":
            if self.capsule_dirs is None:
                self.capsule_dirs = np.stack(
                    [
                        unit_vector(math.radians(az), math.radians(el))
                        for az, el in TETRA_CAPSULES_DEG
                    ]
                )
            self.capsule_dirs = np.asarray(self.capsule_dirs, dtype=np.float64)
            norms = np.linalg.norm(self.capsule_dirs, axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-6):
                raise ValueError("capsule directions must be unit vectors")
            if self.radius <= 0:
                raise ValueError("radius must be positive")


def foa_response(azimuth: float, elevation: float) -> np.ndarray:
    """FOA gain vector [W, Y, Z, X] for a source at (azimuth, elevation).

    W is omnidirectional unity; Y/Z/X are the dipole gains
    sin(az)cos(el), sin(el), cos(az)cos(el).
    """
    if not (math.isfinite(azimuth) and math.isfinite(elevation)):
        raise ValueError("angles must be finite")
    ce = math.cos(elevation)
    return np.array([1.0, math.sin(azimuth) * ce, math.sin(elevation), math.cos(azimuth) * ce])


def path_difference(capsule_dir: np.ndarray, doa: np.ndarray, radius: float) -> float:
    """Extra travel distance to a capsule relative to the array center.

    A capsule pointing at the source sits closer to it, so the difference
    is -radius * (capsule . doa); magnitude never exceeds the radius.
    """
    capsule_dir = np.asarray(capsule_dir, dtype=np.float64)
    doa = np.asarray(doa, dtype=np.float64)
    for v in (capsule_dir, doa):
        if abs(np.linalg.norm(v) - 1.0) > 1e-6:
            raise ValueError("capsule and DOA vectors must have unit norm")
    return float(-radius * np.dot(capsule_dir, doa))


def mic_phase(
    bin_index,
    path_diff: float,
    fft_size: int,
    sample_rate: float,
    speed_of_sound: float = SPEED_OF_SOUND,
):
    """Far-field per-bin response exp(-j 2 pi f d / (R v / f_s)).

    bin_index may be a scalar or an array of STFT bin indices in
    [0, fft_size/2]; the result is a unit-magnitude complex factor.
    """
    f = np.asarray(bin_index, dtype=np.float64)
    if np.any(f < 0) or np.any(f > fft_size / 2):
        raise ValueError("bin index outside [0, fft_size/2]")
    if min(fft_size, sample_rate, speed_of_sound) <= 0:
        raise ValueError("fft_size, sample_rate and speed_of_sound must be positive")
    angle = -2.0 * math.pi * f * path_diff * sample_rate / (fft_size * speed_of_sound)
    out = np.exp(1j * angle)
    return complex(out) if np.isscalar(bin_index) or out.ndim == 0 else out


def mic_delays_samples(fmt: ArrayFormat, azimuth: float, elevation: float, sample_rate: float) -> np.ndarray:
    """Per-channel arrival delay in samples relative to the array center."""
    doa = unit_vector(azimuth, elevation)
    d = np.array([path_difference(c, doa, fmt.radius) for c in fmt.capsule_dirs])
    return d * sample_rate / fmt.speed_of_sound
