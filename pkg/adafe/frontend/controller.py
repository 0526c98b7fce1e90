# coding=utf-8
"""
Neural adaptive feedback controller.

    y1   = relu(BN(x) W1 + b1)
    Q^FM = alpha * tanh(d * y1 + beta) + gamma

W1 is dense, d and beta are per-channel (a diagonal second layer) and
alpha = gamma = (q_max - q_min) / 4, so Q^FM lies in (0, (q_max - q_min) / 2].
"""
from typing import Optional, Union

import numpy as np

from ..autodiff import ParamStore, ShapeMismatch, Tensor, ops
from .config import AFC_INPUTS, FrontendConfig

TRAIN = "train"
INFER = "infer"
BN_EPS = 1e-5


class BatchNormStats:
    """ Running mean and variance of the controller input.

    Args:
        width (int): Number of input features.
        momentum (float): Weight of the old statistics in every update.
    """

    mean: np.ndarray
    var: np.ndarray
    momentum: float
    n_updates: int

    def __init__(self, width: int, momentum: float = 0.99) -> None:
        self.mean = np.zeros(width)
        self.var = np.ones(width)
        self.momentum = momentum
        self.n_updates = 0

    def __repr__(self) -> str:
        return f"BatchNormStats(width={len(self.mean)}, n_updates={self.n_updates})"

    def update(self, batch: np.ndarray) -> None:
        """ Blend in the statistics of a (B, D) batch. """
        self.mean = self.momentum * self.mean + (1 - self.momentum) * batch.mean(axis=0)
        self.var = self.momentum * self.var + (1 - self.momentum) * batch.var(axis=0)
        self.n_updates += 1

    def copy(self) -> "BatchNormStats":
        out = BatchNormStats(len(self.mean), self.momentum)
        out.mean, out.var, out.n_updates = self.mean.copy(), self.var.copy(), self.n_updates
        return out


class ControllerInput:
    """ Controller input for one frame.

    Args:
        values (Tensor or np.ndarray): (B, D) or (D,) input features; D is
            the number of adaptive channels, doubled for 'energy_fm'.
        kind (str): One of 'fm', 'energy', 'energy_fm'.
    """

    values: Tensor
    kind: str

    def __init__(self, values: Union[Tensor, np.ndarray], kind: str) -> None:
        if kind not in AFC_INPUTS:
            raise ValueError(f"Controller input kind must be one of {AFC_INPUTS}. Got {kind}.")
        if not isinstance(values, Tensor):
            values = Tensor(np.asarray(values, dtype=np.float64))
        if not np.all(np.isfinite(values.value)):
            raise ValueError("Controller input must be finite.")
        self.values = values
        self.kind = kind


def init_controller_params(
    cfg: FrontendConfig,
    params: Optional[ParamStore] = None,
    seed: int = 0,
    prefix: str = "afc.",
) -> ParamStore:
    """ Register the controller weights: a Glorot-uniform dense first layer,
    zero biases and unit diagonal scale. """
    if params is None:
        params = ParamStore()
    rng = np.random.default_rng(seed)
    width_in, width = cfg.controller_input_width, cfg.controller_width
    limit = np.sqrt(6 / (width_in + width))
    params.add(prefix + "fc1.weight", rng.uniform(-limit, limit, size=(width_in, width)))
    params.add(prefix + "fc1.bias", np.zeros(width))
    params.add(prefix + "fc2.scale", np.ones(width))
    params.add(prefix + "fc2.bias", np.zeros(width))
    return params


def afc_forward(
    inp: ControllerInput,
    params: ParamStore,
    bn_stats: BatchNormStats,
    cfg: FrontendConfig,
    mode: str = INFER,
    update_stats: bool = False,
    prefix: str = "afc.",
) -> Tensor:
    """ Bounded Q contribution of the feedback controller.

    Args:
        inp (ControllerInput): Input features, kind matching cfg.afc_input.
        params (ParamStore): Holds the prefix + fc1/fc2 weights.
        bn_stats (BatchNormStats): Running statistics used in 'infer' mode.
        cfg (FrontendConfig): Supplies the Q bounds and input kind.
        mode (str): 'train' normalizes with the batch statistics, 'infer'
            with bn_stats.
        update_stats (bool): In 'train' mode, blend the batch statistics
            into bn_stats.

    Returns:
        Tensor: (B, C) or (C,) Q^FM values in (0, 2 alpha].

    Raises:
        ShapeMismatch: If the input width does not match fc1.weight.
        ValueError: If the input kind differs from cfg.afc_input.
    """
    if inp.kind != cfg.afc_input:
        raise ValueError(
            f"Controller expects '{cfg.afc_input}' input. Got '{inp.kind}'."
        )
    weight = params[prefix + "fc1.weight"]
    x = inp.values
    squeeze = x.ndim == 1
    if squeeze:
        x = ops.reshape(x, (1, x.shape[0]))
    if x.ndim != 2 or x.shape[1] != weight.shape[0]:
        raise ShapeMismatch(
            f"Controller input of shape {inp.values.shape} for a first layer "
            f"of shape {weight.shape}."
        )
    if mode == TRAIN:
        if update_stats:
            bn_stats.update(x.value)
        normed = ops.batchnorm(x, eps=BN_EPS)
    elif mode == INFER:
        normed = ops.batchnorm(
            x, bn_stats.mean.astype(x.dtype), bn_stats.var.astype(x.dtype), BN_EPS
        )
    else:
        raise ValueError(f"mode must be '{TRAIN}' or '{INFER}'. Got {mode}.")
    hidden = ops.relu(ops.add(ops.matmul(normed, weight), params[prefix + "fc1.bias"]))
    pre = ops.add(ops.mul(hidden, params[prefix + "fc2.scale"]), params[prefix + "fc2.bias"])
    alpha = cfg.q_fm_scale
    out = ops.add(ops.mul(ops.tanh(pre), alpha), alpha)
    if squeeze:
        out = ops.reshape(out, (out.shape[1],))
    return out


class AdaptiveFeedbackController:
    """ The controller's parameters and running statistics.

    Args:
        cfg (FrontendConfig): Front-end configuration.
        params (ParamStore): Store to register the weights in, or to read
            them from if they are already present.
        seed (int): Seed of the weight initialization.
    """

    cfg: FrontendConfig
    params: ParamStore
    bn_stats: BatchNormStats
    prefix: str

    def __init__(
        self,
        cfg: FrontendConfig,
        params: Optional[ParamStore] = None,
        seed: int = 0,
        prefix: str = "afc.",
    ) -> None:
        if params is None or prefix + "fc1.weight" not in params:
            params = init_controller_params(cfg, params, seed, prefix)
        self.cfg = cfg
        self.params = params
        self.prefix = prefix
        self.bn_stats = BatchNormStats(cfg.controller_input_width, cfg.bn_momentum)

    @property
    def weights(self):
        return self.params.select(self.prefix)

    def __call__(
        self, inp: ControllerInput, mode: str = INFER, update_stats: bool = False
    ) -> Tensor:
        return afc_forward(
            inp, self.params, self.bn_stats, self.cfg, mode, update_stats, self.prefix
        )
