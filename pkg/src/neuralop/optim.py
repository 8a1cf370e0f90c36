"""Adam with bias correction."""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import WidthMismatchError


@dataclass
class AdamState:
    m: List[np.ndarray]
    v: List[np.ndarray]
    step: int = 0

    @classmethod
    def zeros_like(cls, params: Sequence[np.ndarray]) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params])


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Tuple[List[np.ndarray], AdamState]:
    """One update; returns new parameter arrays and the advanced state."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise WidthMismatchError("Parameters, gradients and optimizer state differ in length")
    step = state.step + 1
    correction1 = 1.0 - beta1**step
    correction2 = 1.0 - beta2**step

    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape or p.shape != m.shape:
            raise WidthMismatchError(f"Shape mismatch {p.shape} vs {g.shape}")
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        new_params.append(p - lr * m_hat / (np.sqrt(v_hat) + eps))
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(m=new_m, v=new_v, step=step)


def learning_rate(base: float, iteration: int, decay_every: int, decay_rate: float) -> float:
    """Step decay: base * decay_rate^(iteration // decay_every)."""
    if decay_every <= 0:
        return base
    return base * decay_rate ** (iteration // decay_every)
