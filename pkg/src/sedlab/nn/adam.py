"""Bias-corrected Adam over a named parameter dict."""

from __future__ import annotations

import numpy as np


class Adam:
    def __init__(self, params: dict, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        for p in params.values():
            p.ensure_moments()

    def step(self, lr: float) -> bool:
        """Apply one update; returns False (no update) on non-finite grads."""
        for p in self.params.values():
            if not np.all(np.isfinite(p.grad)):
                return False
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p in self.params.values():
            g = p.grad
            p.m[...] = self.beta1 * p.m + (1.0 - self.beta1) * g
            p.v[...] = self.beta2 * p.v + (1.0 - self.beta2) * g * g
            p.value -= (lr / c1) * p.m / (np.sqrt(p.v / c2) + self.eps)
        return True
