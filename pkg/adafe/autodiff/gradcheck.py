# coding=utf-8
"""
Finite-difference verification of the registered ops.
"""
from typing import Callable, List, Optional, Sequence

import numpy as np
import pandas as pd

from . import ops
from .tensor import GradTape, Tensor, backward, no_grad

DEFAULT_STEP = 1e-5
DEFAULT_TOLERANCE = 1e-6


def numeric_gradient(
    fn: Callable[[List[Tensor]], Tensor],
    values: Sequence[np.ndarray],
    index: int,
    step: float = DEFAULT_STEP,
) -> np.ndarray:
    """ Central differences of a scalar function with respect to one input.

    Args:
        fn (Callable): Maps a list of tensors to a scalar tensor.
        values (Sequence[np.ndarray]): Float64 input values.
        index (int): Which input to perturb.
        step (float): Perturbation size h.

    Returns:
        np.ndarray: (f(x + h e_i) - f(x - h e_i)) / 2h for every element i.
    """
    values = [np.array(v, dtype=np.float64) for v in values]
    target = values[index]
    grad = np.zeros_like(target)
    with no_grad():
        for i in np.ndindex(target.shape):
            original = target[i]
            target[i] = original + step
            up = float(fn([Tensor(v) for v in values]).value)
            target[i] = original - step
            down = float(fn([Tensor(v) for v in values]).value)
            target[i] = original
            grad[i] = (up - down) / (2 * step)
    return grad


def analytic_gradients(
    fn: Callable[[List[Tensor]], Tensor], values: Sequence[np.ndarray]
) -> List[np.ndarray]:
    """ Tape gradients of fn with respect to every input. """
    inputs = [Tensor(np.array(v, dtype=np.float64), requires_grad=True) for v in values]
    with GradTape() as tape:
        loss = fn(inputs)
    grads = backward(tape, loss, inputs)
    return [grads[t] for t in inputs]


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """ max |a - n| / max(max |a|, max |n|), 0 when both are zero. """
    scale = max(np.max(np.abs(analytic), initial=0), np.max(np.abs(numeric), initial=0))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(analytic - numeric)) / scale)


def check_gradients(
    fn: Callable[[List[Tensor]], Tensor],
    values: Sequence[np.ndarray],
    step: float = DEFAULT_STEP,
) -> float:
    """ Worst relative error between tape and finite-difference gradients
    over every input of fn. """
    analytic = analytic_gradients(fn, values)
    return max(
        relative_error(a, numeric_gradient(fn, values, i, step))
        for i, a in enumerate(analytic)
    )


class GradCase:
    """ One op's gradient check: a scalar-valued function and its inputs. """

    op: str
    fn: Callable[[List[Tensor]], Tensor]
    values: List[np.ndarray]
    tolerance: float

    def __init__(self, op, fn, values, tolerance: float = DEFAULT_TOLERANCE) -> None:
        self.op = op
        self.fn = fn
        self.values = values
        self.tolerance = tolerance


def _weighted(out: Tensor, weights: np.ndarray) -> Tensor:
    return ops.sum(ops.mul(out, weights))


def _away_from(x: np.ndarray, points, margin: float) -> np.ndarray:
    for p in points:
        near = np.abs(x - p) < margin
        x = np.where(near, p + np.where(x >= p, margin, -margin), x)
    return x


def op_cases(seed: int = 0) -> List[GradCase]:
    """ One case per registered op, on small random float64 inputs. """
    rng = np.random.default_rng(seed)
    r = lambda *shape: rng.normal(size=shape)
    pos = lambda *shape: rng.uniform(0.5, 2.0, size=shape)
    w34, w3, w35 = r(3, 4), r(3), r(3, 5)
    w33, w_taps, w_conv = r(3, 3), r(2, 3, 21), r(2, 3, 16)
    w_spec, hann = r(2, 3, 9), np.hanning(10)
    labels = np.array([0, 2, 1, 2])
    centers = np.array([1000.0, 2500.0, 4000.0])
    cases = [
        GradCase("add", lambda t: _weighted(ops.add(t[0], t[1]), w34), [r(3, 4), r(1, 4)]),
        GradCase("sub", lambda t: _weighted(ops.sub(t[0], t[1]), w34), [r(3, 4), r(3, 1)]),
        GradCase("mul", lambda t: _weighted(ops.mul(t[0], t[1]), w34), [r(3, 4), r(4)]),
        GradCase("div", lambda t: _weighted(ops.div(t[0], t[1]), w34), [r(3, 4), pos(3, 4)]),
        GradCase("matmul", lambda t: _weighted(ops.matmul(t[0], t[1]), w35), [r(3, 4), r(4, 5)]),
        GradCase(
            "relu",
            lambda t: _weighted(ops.relu(t[0]), w34),
            [_away_from(r(3, 4), [0.0], 0.1)],
        ),
        GradCase("tanh", lambda t: _weighted(ops.tanh(t[0]), w34), [r(3, 4)]),
        GradCase("log", lambda t: _weighted(ops.log(t[0]), w34), [pos(3, 4)]),
        GradCase("sqrt", lambda t: _weighted(ops.sqrt(t[0]), w34), [pos(3, 4)]),
        GradCase("square", lambda t: _weighted(ops.square(t[0]), w34), [r(3, 4)]),
        GradCase("sum", lambda t: _weighted(ops.sum(t[0], axis=1), w3), [r(3, 4)]),
        GradCase("mean", lambda t: _weighted(ops.mean(t[0], axis=1), w3), [r(3, 4)]),
        GradCase(
            "reshape", lambda t: _weighted(ops.reshape(t[0], (3, 4)), w34), [r(2, 6)]
        ),
        GradCase(
            "getitem",
            lambda t: _weighted(ops.getitem(t[0], (slice(None), [0, 2, 2])), w33),
            [r(3, 4)],
        ),
        GradCase(
            "concat",
            lambda t: _weighted(ops.concat([t[0], t[1]], axis=1), w35),
            [r(3, 2), r(3, 3)],
        ),
        GradCase("batchnorm", lambda t: _weighted(ops.batchnorm(t[0]), w34), [r(3, 4)]),
        GradCase(
            "softmax_cross_entropy",
            lambda t: ops.softmax_cross_entropy(t[0], labels),
            [r(4, 3)],
        ),
        GradCase(
            "clamp_straight_through",
            lambda t: _weighted(ops.clamp_straight_through(t[0], -0.5, 0.5), w34),
            [_away_from(r(3, 4), [-0.5, 0.5], 0.1)],
        ),
        GradCase(
            "gabor_taps",
            lambda t: _weighted(ops.gabor_taps(t[0], centers, 21), w_taps),
            [rng.uniform(1.0, 4.0, size=(2, 3))],
        ),
        GradCase(
            "conv_same",
            lambda t: _weighted(ops.conv_same(t[0], t[1]), w_conv),
            [r(2, 1, 16), r(3, 7)],
        ),
        GradCase(
            "rfft_magnitude",
            lambda t: _weighted(ops.rfft_magnitude(t[0], 16, hann), w_spec),
            [r(2, 3, 10)],
        ),
    ]
    missing = set(ops.OPS) - {c.op for c in cases}
    if missing:
        raise RuntimeError(f"No gradient check for ops: {sorted(missing)}.")
    return cases


def run_suite(
    extra_cases: Optional[Sequence[GradCase]] = None, seed: int = 0
) -> pd.DataFrame:
    """ Check every registered op, plus any extra cases.

    Returns:
        pd.DataFrame: One row per case with columns op, max_rel_error,
            tolerance and passed.
    """
    rows = []
    for case in list(op_cases(seed)) + list(extra_cases or []):
        error = check_gradients(case.fn, case.values)
        rows.append(
            {
                "op": case.op,
                "max_rel_error": error,
                "tolerance": case.tolerance,
                "passed": bool(error <= case.tolerance),
            }
        )
    return pd.DataFrame(rows, columns=["op", "max_rel_error", "tolerance", "passed"])
