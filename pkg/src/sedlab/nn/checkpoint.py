"""Versioned binary checkpoints: parameters plus Adam state.

Layout (all little-endian):

    magic 'SEDCKPT1' | u32 version | u64 adam step count
    u32 len + utf-8 config hash | u32 len + utf-8 norm-stats reference
    u32 blob count, then per blob:
      u32 name length | utf-8 name | u32 ndim | u32 * ndim shape | f32 data

Adam moments are stored as extra blobs named '<param>#m' / '<param>#v'.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

CKPT_MAGIC = b"SEDCKPT1"
CKPT_VERSION = 1


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def _pack_blob(name: str, arr: np.ndarray) -> bytes:
    shape = arr.shape
    head = _pack_str(name) + struct.pack("<I", arr.ndim) + struct.pack(f"<{arr.ndim}I", *shape)
    return head + arr.astype("<f4").tobytes()


def save_checkpoint(
    path: Path,
    params: dict,
    adam_t: int = 0,
    config_hash: str = "",
    norm_ref: str = "",
) -> None:
    blobs = []
    for name, p in params.items():
        blobs.append(_pack_blob(name, p.value))
        if p.m is not None:
            blobs.append(_pack_blob(f"{name}#m", p.m))
            blobs.append(_pack_blob(f"{name}#v", p.v))
    out = [
        CKPT_MAGIC,
        struct.pack("<I", CKPT_VERSION),
        struct.pack("<Q", adam_t),
        _pack_str(config_hash),
        _pack_str(norm_ref),
        struct.pack("<I", len(blobs)),
        *blobs,
    ]
    Path(path).write_bytes(b"".join(out))


class _Reader:
    def __init__(self, raw: bytes):
        self.raw = raw
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.raw):
            raise ValueError("truncated checkpoint")
        out = self.raw[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def text(self) -> str:
        return self.take(self.u32()).decode("utf-8")


def load_checkpoint(path: Path) -> dict:
    """Returns {'version', 'adam_t', 'config_hash', 'norm_ref', 'blobs'}."""
    r = _Reader(Path(path).read_bytes())
    if r.take(8) != CKPT_MAGIC:
        raise ValueError(f"{path}: not a checkpoint file")
    version = r.u32()
    if version != CKPT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    adam_t = r.u64()
    config_hash = r.text()
    norm_ref = r.text()
    blobs = {}
    for _ in range(r.u32()):
        name = r.text()
        ndim = r.u32()
        shape = struct.unpack(f"<{ndim}I", r.take(4 * ndim))
        count = int(np.prod(shape)) if ndim else 1
        data = np.frombuffer(r.take(4 * count), dtype="<f4").reshape(shape)
        blobs[name] = data.copy()
    return {
        "version": version,
        "adam_t": adam_t,
        "config_hash": config_hash,
        "norm_ref": norm_ref,
        "blobs": blobs,
    }


def restore_model(model, ckpt: dict, with_adam: bool = False) -> None:
    """Copy checkpoint blobs into a model's parameters (shape-checked)."""
    params = model.parameters()
    blobs = ckpt["blobs"]
    missing = [k for k in params if k not in blobs]
    if missing:
        raise ValueError(f"checkpoint missing parameters: {missing[:3]}")
    for name, p in params.items():
        arr = blobs[name]
        if arr.shape != p.value.shape:
            raise ValueError(f"{name}: shape {arr.shape} != {p.value.shape}")
        p.value[...] = arr.astype(p.value.dtype)
        if with_adam and f"{name}#m" in blobs:
            p.ensure_moments()
            p.m[...] = blobs[f"{name}#m"].astype(p.value.dtype)
            p.v[...] = blobs[f"{name}#v"].astype(p.value.dtype)
