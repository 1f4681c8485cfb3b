"""The CRNN: conv blocks -> frequency pooling -> BiGRU -> sigmoid head.

Input is a B x C x T x F normalized feature batch at 80 frames/s; output
is B x T_lab x L probabilities at the 100 ms label rate (10 frames/s).
The conv stack downsamples time by the product of its pool_t values and
the head mean-pools logit groups to close the remaining 80 -> 10 gap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gru import BiGru
from .layers import ConvBlock, FreqPool, Linear, TimePool

FEATURE_FPS = 80
LABEL_FPS = 10


@dataclass(frozen=True)
class CrnnConfig:
    conv_blocks: tuple[tuple[int, int, int], ...] = ((16, 2, 2), (32, 2, 2), (64, 1, 2))
    gru_units: int = 32
    n_classes: int = 12
    input_channels: int = 4
    n_mels: int = 128
    use_bn: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.input_channels not in (1, 3, 4):
            raise ValueError("input_channels must be 1, 3, or 4")
        pt = self.time_downsample
        if FEATURE_FPS % (pt * LABEL_FPS):
            raise ValueError(
                f"time pooling x{pt} does not divide {FEATURE_FPS} fps into {LABEL_FPS} fps labels"
            )
        f = self.n_mels
        for _, _, pf in self.conv_blocks:
            if f % pf:
                raise ValueError("frequency pooling does not divide n_mels")
            f //= pf

    @property
    def time_downsample(self) -> int:
        out = 1
        for _, pt, _ in self.conv_blocks:
            out *= pt
        return out

    @property
    def head_group(self) -> int:
        return FEATURE_FPS // (self.time_downsample * LABEL_FPS)


class Crnn:
    def __init__(self, cfg: CrnnConfig, dtype=np.float32):
        self.cfg = cfg
        self.dtype = dtype
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, 0x51ED])))
        self.blocks = []
        in_ch = cfg.input_channels
        for out_ch, pool_t, pool_f in cfg.conv_blocks:
            self.blocks.append(
                ConvBlock(in_ch, out_ch, pool_t, pool_f, rng, dtype, use_bn=cfg.use_bn)
            )
            in_ch = out_ch
        self.freq_pool = FreqPool()
        self.gru = BiGru(in_ch, cfg.gru_units, rng, dtype)
        self.head = Linear(2 * cfg.gru_units, cfg.n_classes, rng, dtype)
        self.time_pool = TimePool(cfg.head_group)
        self._pred = None

    # -- plumbing -----------------------------------------------------------

    def parameters(self) -> dict:
        out = {}
        for i, blk in enumerate(self.blocks):
            out.update(blk.parameters(f"block{i}"))
        out.update(self.gru.parameters("gru"))
        out.update(self.head.parameters("head"))
        return out

    def zero_grad(self) -> None:
        for p in self.parameters().values():
            p.zero_grad()

    def set_training(self, training: bool) -> None:
        for blk in self.blocks:
            if blk.bn is not None:
                blk.bn.training = training

    # -- compute ------------------------------------------------------------

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim != 4 or x.shape[1] != self.cfg.input_channels:
            raise ValueError(
                f"expected B x {self.cfg.input_channels} x T x {self.cfg.n_mels} input, got {x.shape}"
            )
        for blk in self.blocks:
            x = blk.forward(x)
        seq = self.freq_pool.forward(x)
        seq = self.gru.forward(seq)
        logits = self.time_pool.forward(self.head.forward(seq))
        pred = 1.0 / (1.0 + np.exp(-logits))
        self._pred = pred
        return pred

    def backward(self, grad_pred: np.ndarray) -> np.ndarray:
        pred, self._pred = self._pred, None
        g = (grad_pred * pred * (1.0 - pred)).astype(self.dtype)
        g = self.head.backward(self.time_pool.backward(g))
        g = self.gru.backward(g)
        g = self.freq_pool.backward(g)
        for blk in reversed(self.blocks):
            g = blk.backward(g)
        return g

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Inference forward pass (BN in eval mode), restoring train mode."""
        self.set_training(False)
        try:
            return self.forward(x)
        finally:
            self.set_training(True)
