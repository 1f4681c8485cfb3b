"""Gated recurrent unit with exact backpropagation through time.

Gate equations (classic formulation):

    r_t = sigmoid(x_t Wx_r + h_{t-1} Wh_r + b_r)
    z_t = sigmoid(x_t Wx_z + h_{t-1} Wh_z + b_z)
    n_t = tanh(x_t Wx_n + (r_t * h_{t-1}) Wh_n + b_n)
    h_t = z_t * h_{t-1} + (1 - z_t) * n_t

Weights are stored stacked with gate blocks in [r | z | n] column order.
BiGRU runs one cell per direction and concatenates along features.
"""

from __future__ import annotations

import numpy as np

from .params import Parameter, kaiming_uniform, orthogonal


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class GruCell:
    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator, dtype=np.float32):
        self.in_dim = in_dim
        self.hidden = hidden
        self.w_x = Parameter(kaiming_uniform(rng, (in_dim, 3 * hidden), in_dim, dtype))
        w_h = np.concatenate([orthogonal(rng, hidden, dtype) for _ in range(3)], axis=1)
        self.w_h = Parameter(w_h)
        self.b = Parameter(np.zeros(3 * hidden, dtype=dtype))
        self._cache = None

    def parameters(self, prefix: str) -> dict:
        return {
            f"{prefix}.w_x": self.w_x,
            f"{prefix}.w_h": self.w_h,
            f"{prefix}.b": self.b,
        }

    def forward(self, x: np.ndarray) -> np.ndarray:
        b, t, _ = x.shape
        hdim = self.hidden
        h = np.zeros((b, hdim), dtype=x.dtype)
        gx = x @ self.w_x.value + self.b.value  # B x T x 3H
        hs = np.empty((b, t, hdim), dtype=x.dtype)
        cache = []
        wh = self.w_h.value
        for step in range(t):
            gh = h @ wh
            r = _sigmoid(gx[:, step, :hdim] + gh[:, :hdim])
            z = _sigmoid(gx[:, step, hdim : 2 * hdim] + gh[:, hdim : 2 * hdim])
            rh = r * h
            n = np.tanh(gx[:, step, 2 * hdim :] + rh @ wh[:, 2 * hdim :])
            h_new = z * h + (1.0 - z) * n
            cache.append((h, r, z, n, rh))
            hs[:, step] = h_new
            h = h_new
        self._cache = (x, cache)
        return hs

    def backward(self, grad_hs: np.ndarray) -> np.ndarray:
        x, cache = self._cache
        self._cache = None
        b, t, _ = x.shape
        hdim = self.hidden
        wh = self.w_h.value
        grad_x = np.zeros_like(x)
        d_wx = np.zeros_like(self.w_x.value)
        d_wh = np.zeros_like(wh)
        d_b = np.zeros_like(self.b.value)
        dh = np.zeros((b, hdim), dtype=x.dtype)
        for step in range(t - 1, -1, -1):
            h_prev, r, z, n, rh = cache[step]
            dh = dh + grad_hs[:, step]
            dz = dh * (h_prev - n)
            dn = dh * (1.0 - z)
            dh_prev = dh * z
            dn_pre = dn * (1.0 - n * n)
            drh = dn_pre @ wh[:, 2 * hdim :].T
            dr = drh * h_prev
            dh_prev = dh_prev + drh * r
            dr_pre = dr * r * (1.0 - r)
            dz_pre = dz * z * (1.0 - z)
            gates = np.concatenate([dr_pre, dz_pre, dn_pre], axis=1)
            d_wx += x[:, step].T @ gates
            d_b += gates.sum(axis=0)
            d_wh[:, : 2 * hdim] += h_prev.T @ gates[:, : 2 * hdim]
            d_wh[:, 2 * hdim :] += rh.T @ dn_pre
            grad_x[:, step] = gates @ self.w_x.value.T
            dh_prev = dh_prev + gates[:, : 2 * hdim] @ wh[:, : 2 * hdim].T
            dh = dh_prev
        self.w_x.grad += d_wx
        self.w_h.grad += d_wh
        self.b.grad += d_b
        return grad_x


class BiGru:
    """Forward + time-reversed GRU, outputs concatenated to B x T x 2H."""

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator, dtype=np.float32):
        self.fwd = GruCell(in_dim, hidden, rng, dtype)
        self.bwd = GruCell(in_dim, hidden, rng, dtype)
        self.hidden = hidden

    def parameters(self, prefix: str) -> dict:
        out = self.fwd.parameters(f"{prefix}.fwd")
        out.update(self.bwd.parameters(f"{prefix}.bwd"))
        return out

    def forward(self, x: np.ndarray) -> np.ndarray:
        hf = self.fwd.forward(x)
        hb = self.bwd.forward(x[:, ::-1])[:, ::-1]
        return np.concatenate([hf, hb], axis=2)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        hdim = self.hidden
        gf = self.fwd.backward(np.ascontiguousarray(grad_out[:, :, :hdim]))
        gb = self.bwd.backward(np.ascontiguousarray(grad_out[:, ::-1, hdim:]))
        return gf + gb[:, ::-1]
