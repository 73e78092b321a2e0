"""Central finite-difference verification of backward gradients."""

from __future__ import annotations

import numpy as np


def max_relative_error(build_loss, params, h=1e-5, abs_floor=1e-9):
    """Compare analytic gradients of ``build_loss()`` against central differences.

    ``build_loss`` must run a fresh forward pass from the parameters' current
    ``.data`` and return a scalar Tensor.  Entries where both gradients are
    below ``abs_floor`` in disagreement count as exact.  Returns the maximum
    relative error over every entry of every parameter.
    """
    params = list(params)
    for param in params:
        param.zero_grad()
    loss = build_loss()
    loss.backward()
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params]
    for param in params:
        param.zero_grad()

    worst = 0.0
    for param, grad in zip(params, analytic):
        flat = param.data.reshape(-1)
        grad_flat = grad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = build_loss().item()
            flat[i] = orig - h
            down = build_loss().item()
            flat[i] = orig
            numeric = (up - down) / (2.0 * h)
            diff = abs(grad_flat[i] - numeric)
            if diff <= abs_floor:
                continue
            denom = max(abs(grad_flat[i]), abs(numeric))
            worst = max(worst, diff / denom)
    return worst
