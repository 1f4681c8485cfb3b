"""Learning-rate ramp: piecewise linear in log10(rate) over training progress.

Anchors: (0, 1e-4) -> (0.10, 1e-3) plateau to (0.70, 1e-3) -> (1.0, 1e-4).
"""

from __future__ import annotations

import math

LR_ANCHORS = ((0.0, 1e-4), (0.10, 1e-3), (0.70, 1e-3), (1.0, 1e-4))


def lr_schedule(progress: float, anchors=LR_ANCHORS) -> float:
    p = min(max(progress, anchors[0][0]), anchors[-1][0])
    for (x0, y0), (x1, y1) in zip(anchors, anchors[1:]):
        if p <= x1:
            if x1 == x0:
                return y1
            w = (p - x0) / (x1 - x0)
            return 10.0 ** ((1.0 - w) * math.log10(y0) + w * math.log10(y1))
    return anchors[-1][1]
