# coding=utf-8
"""
Tensors and the gradient tape.

Operations on tensors are recorded on the innermost active GradTape, in
execution order, whenever at least one input requires a gradient. backward
walks the recorded nodes in exact reverse order and accumulates gradients
into the leaf tensors.
"""
import threading
import warnings
from contextlib import contextmanager
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np


class ShapeMismatch(ValueError):
    """ Raised when operand shapes are incompatible for an operation. """


class DisconnectedGraphWarning(UserWarning):
    """ Issued when a tensor passed to backward has no path to the loss. """


BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_state = threading.local()


def _tapes() -> List["GradTape"]:
    if not hasattr(_state, "tapes"):
        _state.tapes = []
        _state.grad_enabled = True
        _state.faults = {}
    return _state.tapes


def _faults() -> Dict[str, float]:
    _tapes()
    return _state.faults


def grad_enabled() -> bool:
    _tapes()
    return _state.grad_enabled


@contextmanager
def no_grad():
    """ Suspend recording on every tape of the current thread. """
    _tapes()
    previous = _state.grad_enabled
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


@contextmanager
def inject_fault(op: str, scale: float = 1.5):
    """ Scale the input gradients produced by every node of kind op.

    Used to check that the gradient suite detects a broken derivative.
    """
    faults = _faults()
    faults[op] = scale
    try:
        yield
    finally:
        faults.pop(op, None)


class Tensor:
    """ A dense array that can take part in reverse-mode differentiation.

    Args:
        value (array_like): Values; converted to a float array.
        requires_grad (bool): Whether gradients should flow into this tensor.
        name (str): Optional label used by parameter stores and diagnostics.
    """

    value: np.ndarray
    requires_grad: bool
    grad: Optional[np.ndarray]
    node_id: Optional[int]
    name: Optional[str]

    def __init__(self, value, requires_grad: bool = False, name: Optional[str] = None):
        value = np.asarray(value)
        if not np.issubdtype(value.dtype, np.floating):
            value = value.astype(np.float64)
        self.value = value
        self.requires_grad = requires_grad
        self.grad = None
        self.node_id = None
        self.name = name

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    @property
    def dtype(self):
        return self.value.dtype

    @property
    def size(self) -> int:
        return self.value.size

    def numpy(self) -> np.ndarray:
        return self.value

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        """ A constant tensor sharing this tensor's values. """
        return Tensor(self.value)

    # Operator sugar; the implementations live in ops.
    def __add__(self, other):
        from .ops import add

        return add(self, other)

    def __radd__(self, other):
        from .ops import add

        return add(other, self)

    def __sub__(self, other):
        from .ops import sub

        return sub(self, other)

    def __rsub__(self, other):
        from .ops import sub

        return sub(other, self)

    def __mul__(self, other):
        from .ops import mul

        return mul(self, other)

    def __rmul__(self, other):
        from .ops import mul

        return mul(other, self)

    def __truediv__(self, other):
        from .ops import div

        return div(self, other)

    def __rtruediv__(self, other):
        from .ops import div

        return div(other, self)

    def __neg__(self):
        from .ops import mul

        return mul(self, -1.0)

    def __matmul__(self, other):
        from .ops import matmul

        return matmul(self, other)

    def __getitem__(self, index):
        from .ops import getitem

        return getitem(self, index)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


class Node:
    """ One recorded operation. """

    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn

    def __init__(self, op: str, inputs, output: Tensor, backward: BackwardFn) -> None:
        self.op = op
        self.inputs = tuple(inputs)
        self.output = output
        self.backward = backward

    def __repr__(self) -> str:
        return f"Node({self.op}, inputs={len(self.inputs)})"


class GradTape:
    """ Ordered record of the operations executed while the tape is active.

    Usage:
        with GradTape() as tape:
            loss = ...
        grads = tape.backward(loss)
    """

    nodes: List[Node]

    def __init__(self) -> None:
        self.nodes = []

    def __enter__(self) -> "GradTape":
        _tapes().append(self)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        tapes = _tapes()
        if tapes and tapes[-1] is self:
            tapes.pop()
        else:
            tapes.remove(self)

    def __len__(self) -> int:
        return len(self.nodes)

    def record(self, node: Node) -> None:
        node.output.node_id = len(self.nodes)
        self.nodes.append(node)

    def op_counts(self) -> Dict[str, int]:
        """ Number of recorded nodes per op kind. """
        counts: Dict[str, int] = {}
        for node in self.nodes:
            counts[node.op] = counts.get(node.op, 0) + 1
        return counts

    def backward(
        self, loss: Tensor, params: Optional[Iterable[Tensor]] = None
    ) -> Dict[Tensor, np.ndarray]:
        return backward(self, loss, params)


def record(op: str, inputs: Sequence, value: np.ndarray, backward_fn: BackwardFn) -> Tensor:
    """ Wrap an op's forward value, recording a node on the active tape when
    any input requires a gradient and recording is enabled.
    """
    tapes = _tapes()
    needs_grad = (
        bool(tapes)
        and _state.grad_enabled
        and any(isinstance(t, Tensor) and t.requires_grad for t in inputs)
    )
    out = Tensor(value, requires_grad=needs_grad)
    if needs_grad:
        tapes[-1].record(Node(op, inputs, out, backward_fn))
    return out


def backward(
    tape: GradTape, loss: Tensor, params: Optional[Iterable[Tensor]] = None
) -> Dict[Tensor, np.ndarray]:
    """ Reverse-mode differentiation of a scalar loss.

    Gradients are accumulated (summed) into the .grad attribute of every leaf
    tensor that requires a gradient.

    Args:
        tape (GradTape): Tape the loss was computed on.
        loss (Tensor): Scalar (size 1) tensor.
        params (Iterable[Tensor]): Tensors whose gradient is wanted. Any of
            them without a path to the loss receives a zero gradient and a
            DisconnectedGraphWarning.

    Returns:
        Dict[Tensor, np.ndarray]: Gradient from this call for every leaf
            reached, plus every tensor in params.

    Raises:
        ValueError: If loss is not a scalar.
    """
    if loss.size != 1:
        raise ValueError(f"backward needs a scalar loss. Got shape {loss.shape}.")
    grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.value)}
    produced = set()
    leaves: Dict[int, Tensor] = {}
    faults = _faults()
    for node in reversed(tape.nodes):
        produced.add(id(node.output))
        g = grads.pop(id(node.output), None)
        if g is None:
            continue
        in_grads = node.backward(g)
        scale = faults.get(node.op)
        for inp, ig in zip(node.inputs, in_grads):
            if ig is None or not isinstance(inp, Tensor) or not inp.requires_grad:
                continue
            if scale is not None:
                ig = ig * scale
            if ig.shape != inp.shape:
                raise ShapeMismatch(
                    f"Gradient of {node.op} has shape {ig.shape}, "
                    f"input has {inp.shape}."
                )
            key = id(inp)
            grads[key] = grads[key] + ig if key in grads else ig
            leaves.setdefault(key, inp)

    result: Dict[Tensor, np.ndarray] = {}
    for key, tensor in leaves.items():
        if key in produced or key not in grads:
            continue
        result[tensor] = grads[key]
    if loss.requires_grad and not tape.nodes and id(loss) in grads:
        result[loss] = grads[id(loss)]
    if params is not None:
        disconnected = []
        for p in params:
            if p not in result:
                result[p] = np.zeros_like(p.value)
                disconnected.append(p.name or repr(p))
        if disconnected:
            warnings.warn(
                f"No path from the loss to {', '.join(disconnected)}; "
                f"their gradients are zero.",
                DisconnectedGraphWarning,
            )
    for tensor, g in result.items():
        if tensor.requires_grad:
            tensor.grad = g.copy() if tensor.grad is None else tensor.grad + g
    return result
