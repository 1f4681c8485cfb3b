"""Finite-difference verification of the analytic backward passes.

Central differences with step 1e-5 in f64, comparing against the grads
produced by model.backward via the relative metric
|a - b| / max(|a|, |b|, 1e-8). A random subsample of at least 200 entries
per parameter tensor keeps the cost bounded on tiny shapes.
"""

from __future__ import annotations

import numpy as np

FD_STEP = 1e-5
MIN_PARAMS_PER_LAYER = 200


def grad_check(
    model,
    x: np.ndarray,
    target: np.ndarray,
    loss_fn,
    step: float = FD_STEP,
    n_per_layer: int = MIN_PARAMS_PER_LAYER,
    rng: np.random.Generator | None = None,
) -> float:
    """Max relative error between analytic and finite-difference gradients.

    loss_fn(pred, target) -> (scalar, grad). The model must be f64.
    """
    rng = rng or np.random.Generator(np.random.PCG64(0))
    x = np.asarray(x, dtype=np.float64)

    model.zero_grad()
    pred = model.forward(x)
    _, grad_pred = loss_fn(pred, target)
    model.backward(grad_pred)

    def loss_at() -> float:
        value, _ = loss_fn(model.forward(x), target)
        return value

    worst = 0.0
    for name, p in model.parameters().items():
        flat = p.value.reshape(-1)
        gflat = p.grad.reshape(-1)
        n = flat.size
        idx = np.arange(n) if n <= n_per_layer else rng.choice(n, n_per_layer, replace=False)
        for i in idx:
            keep = flat[i]
            flat[i] = keep + step
            up = loss_at()
            flat[i] = keep - step
            down = loss_at()
            flat[i] = keep
            fd = (up - down) / (2.0 * step)
            a = gflat[i]
            rel = abs(fd - a) / max(abs(fd), abs(a), 1e-8)
            worst = max(worst, rel)
    return worst
