"""Feed-forward layers with exact analytic backward passes.

Every layer follows the same protocol: forward(x) caches what backward
needs, backward(grad_out) accumulates into Parameter.grad and returns the
gradient w.r.t. the layer input. Shapes are B x C x T x F through the
conv stack, B x T x D afterwards.
"""

from __future__ import annotations

import numpy as np

from .params import Parameter, kaiming_uniform

BN_MOMENTUM = 0.9
BN_EPS = 1e-5


class Conv2d:
    """3x3 convolution, stride 1, zero padding 1, as nine shifted GEMMs."""

    def __init__(self, in_ch: int, out_ch: int, rng: np.random.Generator, dtype=np.float32, bias: bool = True):
        self.in_ch = in_ch
        self.out_ch = out_ch
        fan_in = in_ch * 9
        self.weight = Parameter(kaiming_uniform(rng, (out_ch, in_ch, 3, 3), fan_in, dtype))
        self.bias = Parameter(np.zeros(out_ch, dtype=dtype)) if bias else None
        self._xp = None

    def parameters(self, prefix: str) -> dict:
        out = {f"{prefix}.weight": self.weight}
        if self.bias is not None:
            out[f"{prefix}.bias"] = self.bias
        return out

    def forward(self, x: np.ndarray) -> np.ndarray:
        b, c, t, f = x.shape
        if c != self.in_ch:
            raise ValueError(f"expected {self.in_ch} input channels, got {c}")
        xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
        self._xp = xp
        out = np.zeros((b, self.out_ch, t * f), dtype=x.dtype)
        w = self.weight.value
        for di in range(3):
            for dj in range(3):
                tap = xp[:, :, di : di + t, dj : dj + f].reshape(b, c, t * f)
                out += np.matmul(w[:, :, di, dj][None], tap)
        out = out.reshape(b, self.out_ch, t, f)
        if self.bias is not None:
            out += self.bias.value[None, :, None, None]
        return out

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        xp = self._xp
        b, _, tp2, fp2 = xp.shape
        t, f = tp2 - 2, fp2 - 2
        go = grad_out.reshape(b, self.out_ch, t * f)
        w = self.weight.value
        grad_xp = np.zeros_like(xp)
        for di in range(3):
            for dj in range(3):
                tap = xp[:, :, di : di + t, dj : dj + f].reshape(b, self.in_ch, t * f)
                self.weight.grad[:, :, di, dj] += np.einsum("bkn,bcn->kc", go, tap)
                grad_xp[:, :, di : di + t, dj : dj + f] += np.matmul(
                    w[:, :, di, dj].T[None], go
                ).reshape(b, self.in_ch, t, f)
        if self.bias is not None:
            self.bias.grad += grad_out.sum(axis=(0, 2, 3))
        self._xp = None
        return grad_xp[:, :, 1 : 1 + t, 1 : 1 + f]


class BatchNorm2d:
    """Per-channel batch normalization with exact batch-statistics backward."""

    def __init__(self, n_ch: int, dtype=np.float32, momentum: float = BN_MOMENTUM, eps: float = BN_EPS):
        self.gamma = Parameter(np.ones(n_ch, dtype=dtype))
        self.beta = Parameter(np.zeros(n_ch, dtype=dtype))
        self.running_mean = np.zeros(n_ch, dtype=np.float64)
        self.running_var = np.ones(n_ch, dtype=np.float64)
        self.momentum = momentum
        self.eps = eps
        self.training = True
        self._cache = None

    def parameters(self, prefix: str) -> dict:
        return {f"{prefix}.gamma": self.gamma, f"{prefix}.beta": self.beta}

    def forward(self, x: np.ndarray) -> np.ndarray:
        if self.training:
            mean = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            self.running_mean = self.momentum * self.running_mean + (1 - self.momentum) * mean
            self.running_var = self.momentum * self.running_var + (1 - self.momentum) * var
        else:
            mean = self.running_mean.astype(x.dtype)
            var = self.running_var.astype(x.dtype)
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean[None, :, None, None]) * inv_std[None, :, None, None]
        self._cache = (xhat, inv_std.astype(x.dtype))
        return self.gamma.value[None, :, None, None] * xhat + self.beta.value[None, :, None, None]

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        xhat, inv_std = self._cache
        self._cache = None
        axes = (0, 2, 3)
        self.gamma.grad += np.sum(grad_out * xhat, axis=axes)
        self.beta.grad += np.sum(grad_out, axis=axes)
        g = grad_out * self.gamma.value[None, :, None, None]
        if not self.training:
            return g * inv_std[None, :, None, None]
        m = grad_out.shape[0] * grad_out.shape[2] * grad_out.shape[3]
        # d/dx of (x - mean)/std with batch mean/var in the graph
        sum_g = np.sum(g, axis=axes, keepdims=True)
        sum_gx = np.sum(g * xhat, axis=axes, keepdims=True)
        return inv_std[None, :, None, None] * (g - sum_g / m - xhat * sum_gx / m)


class ReLU:
    def __init__(self):
        self._mask = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._mask = x > 0
        return np.where(self._mask, x, 0.0).astype(x.dtype)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        mask, self._mask = self._mask, None
        return np.where(mask, grad_out, 0.0).astype(grad_out.dtype)


class AvgPool2d:
    """Non-overlapping (pool_t x pool_f) mean pooling; sizes must divide."""

    def __init__(self, pool_t: int, pool_f: int):
        self.pool_t = pool_t
        self.pool_f = pool_f
        self._in_shape = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        b, c, t, f = x.shape
        pt, pf = self.pool_t, self.pool_f
        if t % pt or f % pf:
            raise ValueError(f"pool {pt}x{pf} does not divide {t}x{f}")
        self._in_shape = x.shape
        return x.reshape(b, c, t // pt, pt, f // pf, pf).mean(axis=(3, 5))

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        b, c, t, f = self._in_shape
        pt, pf = self.pool_t, self.pool_f
        g = grad_out[:, :, :, None, :, None] / (pt * pf)
        return np.broadcast_to(g, (b, c, t // pt, pt, f // pf, pf)).reshape(
            b, c, t, f
        ).astype(grad_out.dtype)


class ConvBlock:
    """conv 3x3 -> (batch norm) -> ReLU -> average pool."""

    def __init__(
        self,
        in_ch: int,
        out_ch: int,
        pool_t: int,
        pool_f: int,
        rng: np.random.Generator,
        dtype=np.float32,
        use_bn: bool = True,
    ):
        self.conv = Conv2d(in_ch, out_ch, rng, dtype, bias=not use_bn)
        self.bn = BatchNorm2d(out_ch, dtype) if use_bn else None
        self.relu = ReLU()
        self.pool = AvgPool2d(pool_t, pool_f)

    def parameters(self, prefix: str) -> dict:
        out = self.conv.parameters(f"{prefix}.conv")
        if self.bn is not None:
            out.update(self.bn.parameters(f"{prefix}.bn"))
        return out

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = self.conv.forward(x)
        if self.bn is not None:
            x = self.bn.forward(x)
        return self.pool.forward(self.relu.forward(x))

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        g = self.relu.backward(self.pool.backward(grad_out))
        if self.bn is not None:
            g = self.bn.backward(g)
        return self.conv.backward(g)


class FreqPool:
    """B x C x T x F -> B x T x C by averaging out the frequency axis."""

    def __init__(self):
        self._f = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._f = x.shape[3]
        return x.mean(axis=3).transpose(0, 2, 1)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        g = grad_out.transpose(0, 2, 1)[:, :, :, None] / self._f
        b, c, t, _ = g.shape
        return np.broadcast_to(g, (b, c, t, self._f)).astype(grad_out.dtype)


class Linear:
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, dtype=np.float32):
        self.weight = Parameter(kaiming_uniform(rng, (in_dim, out_dim), in_dim, dtype))
        self.bias = Parameter(np.zeros(out_dim, dtype=dtype))
        self._x = None

    def parameters(self, prefix: str) -> dict:
        return {f"{prefix}.weight": self.weight, f"{prefix}.bias": self.bias}

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return x @ self.weight.value + self.bias.value

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        x, self._x = self._x, None
        flat_x = x.reshape(-1, x.shape[-1])
        flat_g = grad_out.reshape(-1, grad_out.shape[-1])
        self.weight.grad += flat_x.T @ flat_g
        self.bias.grad += flat_g.sum(axis=0)
        return (flat_g @ self.weight.value.T).reshape(x.shape)


class TimePool:
    """Mean over consecutive groups of `group` frames along axis 1."""

    def __init__(self, group: int):
        self.group = group
        self._t = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        b, t, d = x.shape
        if t % self.group:
            raise ValueError(f"time axis {t} not divisible by pooling group {self.group}")
        self._t = t
        return x.reshape(b, t // self.group, self.group, d).mean(axis=2)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        b, tg, d = grad_out.shape
        g = grad_out[:, :, None, :] / self.group
        return np.broadcast_to(g, (b, tg, self.group, d)).reshape(b, self._t, d).astype(
            grad_out.dtype
        )
