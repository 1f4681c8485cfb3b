"""Synthetic event-atom families, one per target class.

Twelve families chosen so classes stay separable by spectrogram pattern:
harmonic stacks with distinct fundamentals, up/down chirps, band-limited
noise bursts with distinct centers, and AM tones. All atoms keep their
energy below 8 kHz so fractional-delay filtering stays accurate, are
peak-normalized, and carry 10 ms raised-cosine edge fades.
"""

from __future__ import annotations

import math

import numpy as np

EDGE_FADE_S = 0.01


def _edge_fade(x: np.ndarray, fs: int) -> np.ndarray:
    n = min(int(EDGE_FADE_S * fs), len(x) // 2)
    if n > 0:
        ramp = 0.5 * (1 - np.cos(np.pi * np.arange(n) / n))
        x[:n] *= ramp
        x[-n:] *= ramp[::-1]
    return x


def _normalize(x: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(x))
    return x / peak if peak > 0 else x


def harmonic_stack(n: int, fs: int, rng, f0: float, n_harm: int = 8) -> np.ndarray:
    t = np.arange(n) / fs
    x = np.zeros(n)
    for h in range(1, n_harm + 1):
        f = f0 * h
        if f >= 8000:
            break
        x += np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi)) / h
    return _edge_fade(_normalize(x), fs)


def chirp(n: int, fs: int, rng, f_start: float, f_end: float) -> np.ndarray:
    t = np.arange(n) / fs
    dur = n / fs
    # linear sweep: instantaneous frequency f_start + (f_end-f_start) t/dur
    phase = 2 * np.pi * (f_start * t + 0.5 * (f_end - f_start) * t**2 / dur)
    x = np.sin(phase + rng.uniform(0, 2 * np.pi))
    return _edge_fade(_normalize(x), fs)


def noise_burst(n: int, fs: int, rng, center: float, octaves: float = 1.0) -> np.ndarray:
    lo = center * 2 ** (-octaves / 2)
    hi = center * 2 ** (octaves / 2)
    white = rng.standard_normal(n)
    spec = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, 1 / fs)
    band = ((freqs >= lo) & (freqs <= hi)).astype(float)
    # soften band edges by ~5% of the bandwidth to avoid ringing
    width = max(1, int(0.05 * (hi - lo) / (fs / n)))
    kernel = np.hanning(2 * width + 1)
    band = np.convolve(band, kernel / kernel.sum(), mode="same")
    x = np.fft.irfft(spec * band, n=n)
    return _edge_fade(_normalize(x), fs)


def am_tone(n: int, fs: int, rng, carrier: float, mod_rate: float) -> np.ndarray:
    t = np.arange(n) / fs
    env = 0.5 * (1 + np.sin(2 * np.pi * mod_rate * t + rng.uniform(0, 2 * np.pi)))
    x = env * np.sin(2 * np.pi * carrier * t + rng.uniform(0, 2 * np.pi))
    return _edge_fade(_normalize(x), fs)


ATOMS = {
    "harmonic_110": lambda n, fs, rng: harmonic_stack(n, fs, rng, 110.0),
    "harmonic_196": lambda n, fs, rng: harmonic_stack(n, fs, rng, 196.0),
    "harmonic_311": lambda n, fs, rng: harmonic_stack(n, fs, rng, 311.0),
    "harmonic_523": lambda n, fs, rng: harmonic_stack(n, fs, rng, 523.0),
    "chirp_up": lambda n, fs, rng: chirp(n, fs, rng, 400.0, 4000.0),
    "chirp_down": lambda n, fs, rng: chirp(n, fs, rng, 4000.0, 400.0),
    "noise_750": lambda n, fs, rng: noise_burst(n, fs, rng, 750.0),
    "noise_2000": lambda n, fs, rng: noise_burst(n, fs, rng, 2000.0),
    "noise_5000": lambda n, fs, rng: noise_burst(n, fs, rng, 5000.0),
    "am_880": lambda n, fs, rng: am_tone(n, fs, rng, 880.0, 3.0),
    "am_1760": lambda n, fs, rng: am_tone(n, fs, rng, 1760.0, 6.0),
    "am_3520": lambda n, fs, rng: am_tone(n, fs, rng, 3520.0, 12.0),
}

# class_id -> default atom name, in registry order
DEFAULT_ATOMS = list(ATOMS.keys())
N_CLASSES = len(DEFAULT_ATOMS)


def render_atom(name: str, n_samples: int, fs: int, rng) -> np.ndarray:
    if name not in ATOMS:
        raise KeyError(f"unknown atom {name!r}")
    return ATOMS[name](n_samples, fs, rng)
