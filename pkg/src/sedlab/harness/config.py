"""Experiment configuration: flat, hashable, file round-trippable.

Configs serialize to flat key=value text (one pair per line, '#' comments
allowed) and every run writes the resolved config to config.lock in its
output directory. The config hash keys grid cells and checkpoints.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass
from pathlib import Path

FORMATS = ("foa", "mic")
CHANNEL_MODES = ("all", "mono")
LOSSES = ("bce", "dice", "bce_dice")
TRANSFERS = ("scratch", "mono_pretrained")


class DataError(Exception):
    """Bad or missing input data (exit code 2)."""


class NumericError(Exception):
    """Non-finite loss/gradients during training (exit code 3)."""


@dataclass
class ExperimentConfig:
    dataset: str = ""
    format: str = "foa"
    channels: str = "all"
    mu: bool = False
    co: bool = False
    fs: bool = False
    cs: bool = False
    loss: str = "bce"
    transfer: str = "scratch"
    chunk_s: float = 4.0
    chunk_hop_s: float = 0.5
    epochs: int = 30
    batch: int = 32
    seed: int = 0
    width: int = 16
    gru_units: int = 32
    n_classes: int = 12
    n_mels: int = 128
    use_bn: bool = True

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.channels not in CHANNEL_MODES:
            raise ValueError(f"channels must be one of {CHANNEL_MODES}")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}")
        if self.transfer not in TRANSFERS:
            raise ValueError(f"transfer must be one of {TRANSFERS}")
        if self.chunk_s <= 0 or self.chunk_hop_s <= 0:
            raise ValueError("chunk_s and chunk_hop_s must be positive")
        if self.epochs < 1 or self.batch < 1:
            raise ValueError("epochs and batch must be >= 1")
        if self.width < 1 or self.gru_units < 1:
            raise ValueError("width and gru_units must be >= 1")

    @property
    def aug_flags(self) -> tuple[bool, bool, bool, bool]:
        return (self.mu, self.co, self.fs, self.cs)

    def to_lines(self) -> str:
        parts = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                v = int(v)
            parts.append(f"{f.name}={v}")
        return "\n".join(parts) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_lines().encode("utf-8")).hexdigest()[:16]

    def write_lock(self, out_dir: Path) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "config.lock"
        path.write_text(self.to_lines(), encoding="utf-8")
        return path


def default_aug_flags(fmt: str) -> tuple[bool, bool, bool, bool]:
    """Best augmentation set per format: FOA all four, MIC all but mixup."""
    return (True, True, True, True) if fmt == "foa" else (False, True, True, True)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    if kind == "bool":
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: not a boolean: {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw.strip()


def parse_config_file(path: Path) -> dict:
    """Flat key=value lines -> kwargs dict for ExperimentConfig."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        out[key] = _coerce(key, raw)
    return out


def load_config(path: Path, **overrides) -> ExperimentConfig:
    kwargs = parse_config_file(path)
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)
