"""RMSprop with a per-parameter squared-gradient accumulator.

s <- rho * s + (1 - rho) * g^2
theta <- theta - lr * g / (sqrt(s) + eps)
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RmspropState:
    accumulators: list  # mirrors the parameter structure
    step: int = 0


def init_rmsprop(params):
    return RmspropState(
        [{k: np.zeros_like(v) for k, v in p.items()} for p in params]
    )


def rmsprop_update(params, grads, state, lr=1e-3, rho=0.9, eps=1e-8):
    """Apply one update in place; returns (params, state) for chaining.

    grads may omit buffer entries (e.g. batch-norm running stats); only
    keys present in grads are updated.
    """
    for p, g, s in zip(params, grads, state.accumulators):
        for key, grad in g.items():
            if grad is None:
                continue
            if p[key].shape != np.shape(grad):
                raise ValueError(f"shape mismatch for {key!r}: {p[key].shape} vs {np.shape(grad)}")
            acc = s[key]
            acc *= rho
            acc += (1.0 - rho) * np.square(grad)
            p[key] -= lr * grad / (np.sqrt(acc) + eps)
    state.step += 1
    return params, state
