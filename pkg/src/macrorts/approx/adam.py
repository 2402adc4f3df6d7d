"""Adam with standard bias correction over the flat parameter vector."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import UsageError
from .net import Params


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: Params, beta1: float = 0.9, beta2: float = 0.999,
                   eps: float = 1e-8) -> "AdamState":
        return cls(np.zeros_like(params.flat), np.zeros_like(params.flat),
                   0, beta1, beta2, eps)


def adam_step(params: Params, grads: np.ndarray, state: AdamState,
              lr: float) -> tuple[Params, AdamState]:
    """One bias-corrected update, in place; rejects non-finite gradients."""
    if grads.shape != params.flat.shape:
        raise UsageError("gradient shape does not match parameters")
    if state.m.shape != params.flat.shape:
        raise UsageError("Adam state does not match parameters")
    if not np.isfinite(grads).all():
        bad = int(np.flatnonzero(~np.isfinite(grads))[0])
        raise UsageError(f"non-finite gradient at coordinate {bad}; update rejected")
    state.step += 1
    state.m = state.beta1 * state.m + (1 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1 - state.beta2) * grads * grads
    mhat = state.m / (1 - state.beta1 ** state.step)
    vhat = state.v / (1 - state.beta2 ** state.step)
    params.flat -= lr * mhat / (np.sqrt(vhat) + state.eps)
    return params, state
