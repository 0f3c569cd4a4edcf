"""Adam optimizer, functional style: step in, new params and state out."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0


def adam_step(
    params: dict,
    grads: dict,
    state: AdamState,
    lr: float = 1e-4,
    betas: tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> tuple[dict, AdamState]:
    """Bias-corrected Adam. t increments once per call; moments are keyed
    by parameter name, so parameter groups never contaminate each other."""
    b1, b2 = betas
    t = state.t + 1
    new_params = {}
    new_m = {}
    new_v = {}
    for name, p in params.items():
        g = grads[name]
        m = state.m.get(name, np.zeros_like(p))
        v = state.v.get(name, np.zeros_like(p))
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        new_params[name] = p - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[name] = m
        new_v[name] = v
    return new_params, AdamState(m=new_m, v=new_v, t=t)
