"""First-conv weight replication for channel-count transfer."""

from __future__ import annotations

import numpy as np


def replicate_first_layer(weight: np.ndarray, target_channels: int = 4) -> np.ndarray:
    """Tile input-channel slices cyclically to `target_channels`, scaled by
    C_pre / C_target so the expected pre-activation magnitude is preserved.
    """
    w = np.asarray(weight)
    if w.ndim != 4:
        raise ValueError("expected K x C x kh x kw conv weights")
    c_pre = w.shape[1]
    if c_pre not in (1, 3, target_channels):
        raise ValueError(f"unsupported pretrained channel count {c_pre}")
    idx = [i % c_pre for i in range(target_channels)]
    return (w[:, idx] * (c_pre / target_channels)).astype(w.dtype)
