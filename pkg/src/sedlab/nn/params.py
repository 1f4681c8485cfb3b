"""Trainable parameter container and weight initializers."""

from __future__ import annotations

import math

import numpy as np


class Parameter:
    """A named tensor with gradient and (lazily created) Adam moments."""

    __slots__ = ("value", "grad", "m", "v")

    def __init__(self, value: np.ndarray):
        self.value = np.ascontiguousarray(value)
        self.grad = np.zeros_like(self.value)
        self.m = None
        self.v = None

    @property
    def shape(self):
        return self.value.shape

    @property
    def dtype(self):
        return self.value.dtype

    def zero_grad(self) -> None:
        self.grad[...] = 0.0

    def ensure_moments(self) -> None:
        if self.m is None:
            self.m = np.zeros_like(self.value)
            self.v = np.zeros_like(self.value)


def kaiming_uniform(rng: np.random.Generator, shape, fan_in: int, dtype) -> np.ndarray:
    bound = math.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def orthogonal(rng: np.random.Generator, n: int, dtype) -> np.ndarray:
    """Random n x n orthogonal matrix (QR of a Gaussian, sign-fixed)."""
    a = rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    return q.astype(dtype)
