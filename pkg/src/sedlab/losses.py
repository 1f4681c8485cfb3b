"""Training objectives: BCE, set/soft Dice, and their sum.

Every loss returns (value, gradient w.r.t. pred) so the network backward
pass can consume the gradient directly; gradients are exact for the
clamped/smoothed functions as implemented and are finite-difference
checked in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BCE_CLAMP = 1e-7
DICE_EPS_TRAIN = 1.0
DICE_EPS_ANALYSIS = 1e-7


@dataclass(frozen=True)
class LossConfig:
    kind: str = "bce"  # bce | dice | bce_dice
    dice_epsilon: float = DICE_EPS_TRAIN
    bce_clamp: float = BCE_CLAMP

    def __post_init__(self):
        if self.kind not in ("bce", "dice", "bce_dice"):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.dice_epsilon <= 0:
            raise ValueError("dice_epsilon must be > 0")


def sdc(a: set, b: set) -> float:
    """Soerensen-Dice coefficient of two finite sets; 1.0 when both empty."""
    if not a and not b:
        return 1.0
    return 2.0 * len(a & b) / (len(a) + len(b))


def _check_shapes(pred: np.ndarray, target: np.ndarray) -> None:
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs target {target.shape}")


def bce(pred: np.ndarray, target: np.ndarray, clamp: float = BCE_CLAMP):
    """Mean binary cross-entropy; pred clamped to [clamp, 1-clamp]."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _check_shapes(pred, target)
    q = np.clip(pred, clamp, 1.0 - clamp)
    m = pred.size
    loss = float(np.mean(-target * np.log(q) - (1.0 - target) * np.log1p(-q)))
    grad = (q - target) / (q * (1.0 - q)) / m
    grad[(pred < clamp) | (pred > 1.0 - clamp)] = 0.0  # clamp is flat outside
    return loss, grad


def dice_loss(pred: np.ndarray, target: np.ndarray, epsilon: float = DICE_EPS_TRAIN):
    """Soft Dice loss averaged over the batch (leading axis when 3-D).

    Per sample: 1 - 2*sum(pred*target) / (sum(pred + target) + epsilon).
    1-D/2-D inputs are treated as a single sample.
    """
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _check_shapes(pred, target)
    if pred.ndim < 3:
        p = pred.reshape(1, -1)
        y = target.reshape(1, -1)
    else:
        p = pred.reshape(pred.shape[0], -1)
        y = target.reshape(target.shape[0], -1)
    n = p.shape[0]
    inter = np.sum(p * y, axis=1)
    den = np.sum(p + y, axis=1) + epsilon
    loss = float(np.mean(1.0 - 2.0 * inter / den))
    # d/dp [1 - 2*inter/den] = -2 y / den + 2*inter / den^2, then / n
    grad = (-2.0 * y / den[:, None] + 2.0 * inter[:, None] / den[:, None] ** 2) / n
    return loss, grad.reshape(pred.shape)


def bce_dice(
    pred: np.ndarray,
    target: np.ndarray,
    epsilon: float = DICE_EPS_TRAIN,
    clamp: float = BCE_CLAMP,
):
    """Unweighted sum of BCE and Dice; gradient is the elementwise sum."""
    lb, gb = bce(pred, target, clamp)
    ld, gd = dice_loss(pred, target, epsilon)
    return lb + ld, gb + gd


def compute_loss(cfg: LossConfig, pred: np.ndarray, target: np.ndarray):
    if cfg.kind == "bce":
        return bce(pred, target, cfg.bce_clamp)
    if cfg.kind == "dice":
        return dice_loss(pred, target, cfg.dice_epsilon)
    return bce_dice(pred, target, cfg.dice_epsilon, cfg.bce_clamp)
