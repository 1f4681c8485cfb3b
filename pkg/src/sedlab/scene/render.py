"""Scene rendering: event atoms through the array model plus diffuse noise.

FOA applies the frequency-flat gain vector per 100 ms trajectory segment;
MIC applies per-channel fractional delays with a 32-tap windowed-sinc
filter. Segment transitions are cross-faded over 10 ms so piecewise
parameters never click. All randomness derives from SceneSpec.seed.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from ..labels import LabelGrid, events_to_grid
from .arrays import ArrayFormat, foa_response, path_difference, unit_vector
from .atoms import DEFAULT_ATOMS, render_atom
from .types import DEFAULT_SAMPLE_RATE, MultichannelAudio, SceneSpec, TRAJECTORY_HOP_S

logger = logging.getLogger(__name__)

SINC_TAPS = 32
XFADE_S = 0.01
# FOA diffuse noise: dipole channels at half the W amplitude
FOA_XYZ_NOISE_GAIN = 0.5


def fractional_delay_filter(frac: float, taps: int = SINC_TAPS) -> np.ndarray:
    """Blackman-windowed sinc delaying by (taps//2 - 1 + frac) samples."""
    center = taps // 2 - 1
    k = np.arange(taps)
    h = np.sinc(k - center - frac) * np.blackman(taps)
    return h / h.sum()


def apply_fractional_delay(x: np.ndarray, delay_samples: float) -> np.ndarray:
    """Delay x by a (possibly negative, fractional) number of samples."""
    d_int = math.floor(delay_samples)
    frac = delay_samples - d_int
    h = fractional_delay_filter(frac)
    center = SINC_TAPS // 2 - 1
    full = np.convolve(x, h)
    # full[m] = x delayed by center + frac; out[n] = full[n - d_int + center]
    shift = d_int - center
    out = np.zeros_like(x)
    n = len(x)
    src_lo = max(0, -shift)
    src_hi = min(len(full), n - shift)
    if src_hi > src_lo:
        out[src_lo + shift : src_hi + shift] = full[src_lo:src_hi]
    return out


def _segment_weights(n_samples: int, n_segments: int, hop: int, xfade: int):
    """Trapezoid weights per trajectory segment, summing to 1 everywhere.

    Segment j holds weight 1 on its interior and hands off linearly to
    segment j+1 over the first `xfade` samples after the boundary.
    """
    ramp = np.arange(1, xfade + 1) / xfade
    for j in range(n_segments):
        start = j * hop
        end = min((j + 1) * hop, n_samples)
        w_start = start
        w_end = min(end + xfade, n_samples) if j + 1 < n_segments else n_samples
        w = np.ones(w_end - w_start)
        if j > 0:
            m = min(xfade, len(w))
            w[:m] = ramp[:m]
        if j + 1 < n_segments:
            m = min(xfade, w_end - end)
            if m > 0:
                w[end - w_start : end - w_start + m] = 1.0 - ramp[:m]
        yield j, w_start, w_end, w


def _render_event_foa(out: np.ndarray, event, atom: np.ndarray, start: int, fs: int):
    n = len(atom)
    hop = int(TRAJECTORY_HOP_S * fs)
    xfade = int(XFADE_S * fs)
    gains = np.stack([foa_response(az, el) for az, el in event.trajectory])
    for j, lo, hi, w in _segment_weights(n, len(event.trajectory), hop, xfade):
        seg = event.gain * atom[lo:hi] * w
        out[:, start + lo : start + hi] += gains[j][:, None] * seg


def _render_event_mic(out: np.ndarray, event, atom: np.ndarray, start: int, fs: int, fmt: ArrayFormat):
    n = len(atom)
    hop = int(TRAJECTORY_HOP_S * fs)
    xfade = int(XFADE_S * fs)
    margin = SINC_TAPS + 8
    for j, lo, hi, w in _segment_weights(n, len(event.trajectory), hop, xfade):
        az, el = event.trajectory[j]
        doa = unit_vector(az, el)
        src_lo = max(0, lo - margin)
        src_hi = min(n, hi + margin)
        chunk = atom[src_lo:src_hi]
        for c in range(fmt.n_channels):
            d = path_difference(fmt.capsule_dirs[c], doa, fmt.radius)
            delayed = apply_fractional_delay(chunk, d * fs / fmt.speed_of_sound)
            seg = delayed[lo - src_lo : hi - src_lo]
            out[c, start + lo : start + hi] += event.gain * w * seg


def render_scene(
    spec: SceneSpec,
    fmt: ArrayFormat,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
) -> tuple[MultichannelAudio, LabelGrid]:
    """Render a scene to 4-channel audio plus its 100 ms label grid."""
    fs = sample_rate
    n = int(round(spec.duration * fs))
    out = np.zeros((fmt.n_channels, n), dtype=np.float64)

    for i, event in enumerate(spec.events):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([spec.seed, i])))
        atom_name = event.atom or DEFAULT_ATOMS[event.class_id]
        n_event = int(round(event.duration * fs))
        atom = render_atom(atom_name, n_event, fs, rng)
        start = int(round(event.onset * fs))
        n_event = min(n_event, n - start)
        atom = atom[:n_event]
        if fmt.kind == "foa":
            _render_event_foa(out, event, atom, start, fs)
        else:
            _render_event_mic(out, event, atom, start, fs, fmt)

    if math.isfinite(spec.noise_snr_db):
        event_power = float(np.mean(out**2))
        if event_power > 0:
            noise_rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence([spec.seed, 0xD1FF]))
            )
            target = event_power / 10 ** (spec.noise_snr_db / 10)
            if fmt.kind == "mic":
                out += math.sqrt(target) * noise_rng.standard_normal(out.shape)
            else:
                # W-only plus low-gain XYZ: mean channel power
                # (1 + 3 g^2) / 4 * sigma_w^2 must equal the target
                g = FOA_XYZ_NOISE_GAIN
                sigma_w = math.sqrt(target / ((1 + 3 * g * g) / 4))
                scale = sigma_w * np.array([1.0, g, g, g])
                out += scale[:, None] * noise_rng.standard_normal(out.shape)

    clipped = bool(np.max(np.abs(out), initial=0.0) > 1.0)
    if clipped:
        logger.warning("rendered scene exceeds full scale (seed=%d)", spec.seed)

    n_frames = -(-int(round(spec.duration * 1000)) // 100)
    grid = events_to_grid(
        [(ev.onset, ev.offset, ev.class_id) for ev in spec.events],
        n_frames=n_frames,
        n_classes=len(DEFAULT_ATOMS),
    )
    audio = MultichannelAudio(out.astype(np.float32), fs, clipped=clipped)
    return audio, grid
