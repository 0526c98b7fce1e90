# coding=utf-8
"""
Back-end classifier over frame-pooled features.
"""
from typing import Optional

import numpy as np

from ..autodiff import ParamStore, ShapeMismatch, Tensor, ops
from ..frontend import BatchNormStats, TRAIN, INFER

BN_EPS = 1e-5


class Classifier:
    """ Normalization, one ReLU hidden layer and a linear output layer.

    Args:
        n_inputs (int): Width of the pooled feature vector.
        n_classes (int): Number of classes K.
        params (ParamStore): Store to create the weights in, or to read them
            from if already present.
        seed (int): Weight initialization seed.
        hidden (int): Hidden layer width.
        bn_momentum (float): Momentum of the running input statistics.
        prefix (str): Name prefix of the weights.
    """

    n_inputs: int
    n_classes: int
    params: ParamStore
    bn_stats: BatchNormStats
    prefix: str

    def __init__(
        self,
        n_inputs: int,
        n_classes: int,
        params: Optional[ParamStore] = None,
        seed: int = 0,
        hidden: int = 128,
        bn_momentum: float = 0.9,
        prefix: str = "clf.",
    ) -> None:
        if n_classes < 2:
            raise ValueError(f"Need at least two classes. Got {n_classes}.")
        if params is None:
            params = ParamStore()
        if prefix + "fc1.weight" not in params:
            rng = np.random.default_rng(seed)
            for name, shape in (("fc1", (n_inputs, hidden)), ("fc2", (hidden, n_classes))):
                limit = np.sqrt(6 / sum(shape))
                params.add(f"{prefix}{name}.weight", rng.uniform(-limit, limit, size=shape))
                params.add(f"{prefix}{name}.bias", np.zeros(shape[1]))
        self.n_inputs = n_inputs
        self.n_classes = n_classes
        self.params = params
        self.prefix = prefix
        self.bn_stats = BatchNormStats(n_inputs, bn_momentum)

    def __repr__(self) -> str:
        return f"Classifier({self.n_inputs} -> {self.n_classes})"

    @property
    def weights(self):
        return self.params.select(self.prefix)

    def __call__(self, x: Tensor, mode: str = INFER, update_stats: bool = False) -> Tensor:
        """ Logits of a (B, n_inputs) batch of pooled features. """
        if not isinstance(x, Tensor):
            x = Tensor(np.asarray(x, dtype=self.params.dtype))
        if x.ndim != 2 or x.shape[1] != self.n_inputs:
            raise ShapeMismatch(
                f"Classifier expects (B, {self.n_inputs}) inputs. Got {x.shape}."
            )
        if mode == TRAIN:
            if update_stats:
                self.bn_stats.update(x.value)
            normed = ops.batchnorm(x, eps=BN_EPS)
        else:
            normed = ops.batchnorm(
                x, self.bn_stats.mean.astype(x.dtype), self.bn_stats.var.astype(x.dtype), BN_EPS
            )
        p = self.prefix
        hidden = ops.relu(ops.add(ops.matmul(normed, self.params[p + "fc1.weight"]), self.params[p + "fc1.bias"]))
        return ops.add(ops.matmul(hidden, self.params[p + "fc2.weight"]), self.params[p + "fc2.bias"])

    def predict(self, x: np.ndarray) -> np.ndarray:
        """ Logits in inference mode, as an array. """
        return self(Tensor(np.asarray(x, dtype=self.params.dtype))).value
