from dataclasses import dataclass, field

import numpy as np

from core.exceptions.domain import DimensionMismatch


@dataclass
class AdamState:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def adam_init(params: list[np.ndarray], lr: float) -> AdamState:
    # moments are kept in float64 whatever the parameter dtype
    return AdamState(
        lr=lr,
        m=[np.zeros(p.shape, dtype=np.float64) for p in params],
        v=[np.zeros(p.shape, dtype=np.float64) for p in params],
    )


def adam_step(state: AdamState, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
    """Bias-corrected adaptive-moment update, applied to `params` in place."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise DimensionMismatch("adam parameter count", len(state.m), (len(params), len(grads)))

    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step

    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape or p.shape != m.shape:
            raise DimensionMismatch("adam gradient shape", p.shape, g.shape)
        g = g.astype(np.float64, copy=False)
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        update = state.lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps)
        p -= update.astype(p.dtype)
