# coding=utf-8
"""
Adam with decoupled weight decay.
"""
from typing import Dict, List, Optional, Sequence

import numpy as np

from .tensor import Tensor, ShapeMismatch


class AdamState:
    """ Moment buffers and hyperparameters of an Adam optimizer.

    Args:
        params (Sequence[Tensor]): Parameters the buffers are shaped after.
        lr (float): Learning rate.
        beta1 (float): Decay of the first-moment estimate.
        beta2 (float): Decay of the second-moment estimate.
        eps (float): Denominator floor.
        weight_decay (float): Decoupled decay, applied as lr * wd * param.
    """

    m: List[np.ndarray]
    v: List[np.ndarray]
    step_count: int
    lr: float
    beta1: float
    beta2: float
    eps: float
    weight_decay: float

    def __init__(
        self,
        params: Sequence[Tensor],
        lr: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.98,
        eps: float = 1e-9,
        weight_decay: float = 1e-4,
    ) -> None:
        if lr <= 0:
            raise ValueError(f"Learning rate must be positive. Got {lr}.")
        if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
            raise ValueError(f"Betas must lie in [0, 1). Got {beta1}, {beta2}.")
        self.m = [np.zeros_like(p.value) for p in params]
        self.v = [np.zeros_like(p.value) for p in params]
        self.step_count = 0
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay


def adam_step(
    params: Sequence[Tensor],
    grads: Optional[Sequence[Optional[np.ndarray]]],
    state: AdamState,
) -> None:
    """ Update params in place with one bias-corrected Adam step.

    Args:
        params (Sequence[Tensor]): Parameters, in the order state was built.
        grads (Sequence[np.ndarray]): One gradient per parameter. None (the
            whole argument or an entry) falls back to the parameter's .grad,
            and a missing gradient counts as zero.
        state (AdamState): Moment buffers, advanced by one step.

    Raises:
        ShapeMismatch: If the number or shape of gradients does not match.
    """
    if grads is None:
        grads = [p.grad for p in params]
    if len(grads) != len(params) or len(params) != len(state.m):
        raise ShapeMismatch(
            f"Adam got {len(params)} parameters, {len(grads)} gradients and "
            f"{len(state.m)} moment buffers."
        )
    state.step_count += 1
    t = state.step_count
    correction1 = 1 - state.beta1 ** t
    correction2 = 1 - state.beta2 ** t
    for i, (p, g) in enumerate(zip(params, grads)):
        if g is None:
            g = np.zeros_like(p.value)
        if g.shape != p.shape:
            raise ShapeMismatch(
                f"Gradient of shape {g.shape} for parameter {p.name or i} of "
                f"shape {p.shape}."
            )
        state.m[i] = state.beta1 * state.m[i] + (1 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1 - state.beta2) * g ** 2
        m_hat = state.m[i] / correction1
        v_hat = state.v[i] / correction2
        update = state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        if state.weight_decay:
            update = update + state.lr * state.weight_decay * p.value
        p.value = (p.value - update).astype(p.value.dtype, copy=False)
