# coding=utf-8
"""
Differentiable operations on Tensors.

Every op computes its forward value with numpy, then hands record() a closure
mapping the output gradient to one gradient per input.
"""
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import fft

from ..gabor import DEFAULT_FS, gabor_kernel, gabor_kernel_dq
from ..gabor import conv_same as _conv_same
from .tensor import Tensor, ShapeMismatch, as_tensor, record

Operand = Union[Tensor, np.ndarray, float]
Axis = Optional[Union[int, Tuple[int, ...]]]

OPS: Dict[str, Callable] = {}


def register(name: str):
    """ Add an op to the registry enumerated by the gradient suite. """

    def wrap(fn):
        OPS[name] = fn
        return fn

    return wrap


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """ Sum a broadcast gradient back down to an operand's shape. """
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _pair(a: Operand, b: Operand) -> Tuple[Tensor, Tensor]:
    """ Wrap constants, giving them the floating type of the tensor operand. """
    if not isinstance(a, Tensor) and isinstance(b, Tensor):
        a = Tensor(np.asarray(a, dtype=b.dtype))
    elif not isinstance(b, Tensor) and isinstance(a, Tensor):
        b = Tensor(np.asarray(b, dtype=a.dtype))
    return as_tensor(a), as_tensor(b)


def _broadcast_shape(a: Tensor, b: Tensor, op: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        raise ShapeMismatch(f"{op}: cannot broadcast {a.shape} with {b.shape}.") from e


@register("add")
def add(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape(a, b, "add")
    return record(
        "add",
        (a, b),
        a.value + b.value,
        lambda g: (unbroadcast(g, a.shape), unbroadcast(g, b.shape)),
    )


@register("sub")
def sub(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape(a, b, "sub")
    return record(
        "sub",
        (a, b),
        a.value - b.value,
        lambda g: (unbroadcast(g, a.shape), unbroadcast(-g, b.shape)),
    )


@register("mul")
def mul(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape(a, b, "mul")
    return record(
        "mul",
        (a, b),
        a.value * b.value,
        lambda g: (
            unbroadcast(g * b.value, a.shape),
            unbroadcast(g * a.value, b.shape),
        ),
    )


@register("div")
def div(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape(a, b, "div")
    out = a.value / b.value
    return record(
        "div",
        (a, b),
        out,
        lambda g: (
            unbroadcast(g / b.value, a.shape),
            unbroadcast(-g * out / b.value, b.shape),
        ),
    )


@register("matmul")
def matmul(a: Operand, b: Operand) -> Tensor:
    """ Matrix product over the last two axes with broadcast batch axes. """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeMismatch(f"matmul: incompatible shapes {a.shape} and {b.shape}.")

    def grad_fn(g):
        ga = g @ np.swapaxes(b.value, -1, -2)
        gb = np.swapaxes(a.value, -1, -2) @ g
        return unbroadcast(ga, a.shape), unbroadcast(gb, b.shape)

    return record("matmul", (a, b), a.value @ b.value, grad_fn)


@register("relu")
def relu(x: Operand) -> Tensor:
    x = as_tensor(x)
    mask = x.value > 0
    return record("relu", (x,), np.where(mask, x.value, 0), lambda g: (g * mask,))


@register("tanh")
def tanh(x: Operand) -> Tensor:
    x = as_tensor(x)
    out = np.tanh(x.value)
    return record("tanh", (x,), out, lambda g: (g * (1 - out ** 2),))


@register("log")
def log(x: Operand) -> Tensor:
    x = as_tensor(x)
    return record("log", (x,), np.log(x.value), lambda g: (g / x.value,))


@register("sqrt")
def sqrt(x: Operand) -> Tensor:
    """ Square root; the gradient at 0 is taken as 0. """
    x = as_tensor(x)
    out = np.sqrt(x.value)

    def grad_fn(g):
        safe = np.where(out > 0, out, 1)
        return (np.where(out > 0, g / (2 * safe), 0),)

    return record("sqrt", (x,), out, grad_fn)


@register("square")
def square(x: Operand) -> Tensor:
    x = as_tensor(x)
    return record("square", (x,), x.value ** 2, lambda g: (2 * x.value * g,))


def _expand(g: np.ndarray, shape, axis: Axis, keepdims: bool) -> np.ndarray:
    if axis is not None and not keepdims:
        g = np.expand_dims(g, axis)
    return np.broadcast_to(g, shape)


@register("sum")
def sum(x: Operand, axis: Axis = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    return record(
        "sum",
        (x,),
        np.sum(x.value, axis=axis, keepdims=keepdims),
        lambda g: (np.array(_expand(g, x.shape, axis, keepdims)),),
    )


@register("mean")
def mean(x: Operand, axis: Axis = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    out = np.mean(x.value, axis=axis, keepdims=keepdims)
    count = x.size // max(np.size(out), 1)
    return record(
        "mean",
        (x,),
        out,
        lambda g: (np.array(_expand(g, x.shape, axis, keepdims)) / count,),
    )


@register("reshape")
def reshape(x: Operand, shape: Tuple[int, ...]) -> Tensor:
    x = as_tensor(x)
    try:
        out = x.value.reshape(shape)
    except ValueError as e:
        raise ShapeMismatch(f"reshape: cannot view {x.shape} as {shape}.") from e
    return record("reshape", (x,), out, lambda g: (g.reshape(x.shape),))


@register("getitem")
def getitem(x: Operand, index) -> Tensor:
    x = as_tensor(x)
    parts = index if isinstance(index, tuple) else (index,)
    basic = all(
        p is Ellipsis or p is None or isinstance(p, (slice, int, np.integer))
        for p in parts
    )

    def grad_fn(g):
        out = np.zeros_like(x.value)
        if basic:
            out[index] = g
        else:
            np.add.at(out, index, g)
        return (out,)

    return record("getitem", (x,), x.value[index], grad_fn)


@register("concat")
def concat(tensors: Sequence[Operand], axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.value for t in tensors], axis=axis)
    except ValueError as e:
        raise ShapeMismatch(f"concat: {e}") from e
    splits = np.cumsum([t.shape[axis] for t in tensors])[:-1]
    return record("concat", tensors, out, lambda g: np.split(g, splits, axis=axis))


@register("batchnorm")
def batchnorm(
    x: Operand,
    mean: Optional[np.ndarray] = None,
    var: Optional[np.ndarray] = None,
    eps: float = 1e-5,
) -> Tensor:
    """ Normalize every feature over axis 0.

    With mean and var left as None the statistics of the batch itself are
    used and differentiated through; otherwise the given statistics are
    constants.
    """
    x = as_tensor(x)
    batch_stats = mean is None
    if batch_stats:
        mean = x.value.mean(axis=0)
        var = x.value.var(axis=0)
    elif np.shape(mean) != x.shape[1:] or np.shape(var) != x.shape[1:]:
        raise ShapeMismatch(
            f"batchnorm: statistics of shape {np.shape(mean)} for input {x.shape}."
        )
    inv_std = 1 / np.sqrt(var + eps)
    x_hat = (x.value - mean) * inv_std

    def grad_fn(g):
        if not batch_stats:
            return (g * inv_std,)
        g_mean = g.mean(axis=0)
        gx_mean = (g * x_hat).mean(axis=0)
        return ((g - g_mean - x_hat * gx_mean) * inv_std,)

    return record("batchnorm", (x,), x_hat, grad_fn)


@register("softmax_cross_entropy")
def softmax_cross_entropy(logits: Operand, labels) -> Tensor:
    """ Mean cross-entropy of integer labels under softmax(logits).

    Args:
        logits (Tensor): B x K scores.
        labels (array_like): B class indices.
    """
    logits = as_tensor(logits)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or labels.shape != logits.shape[:1]:
        raise ShapeMismatch(
            f"softmax_cross_entropy: logits {logits.shape}, labels {labels.shape}."
        )
    shifted = logits.value - logits.value.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    rows = np.arange(len(labels))
    loss = -log_probs[rows, labels].mean()

    def grad_fn(g):
        probs = np.exp(log_probs)
        probs[rows, labels] -= 1
        return (g * probs / len(labels),)

    return record("softmax_cross_entropy", (logits,), np.asarray(loss), grad_fn)


@register("clamp_straight_through")
def clamp_straight_through(x: Operand, lo: float, hi: float) -> Tensor:
    """ Clip to [lo, hi]; the gradient passes where lo <= x <= hi and is
    zero where clipping changed the value.
    """
    x = as_tensor(x)
    inside = (x.value >= lo) & (x.value <= hi)
    return record(
        "clamp_straight_through",
        (x,),
        np.clip(x.value, lo, hi),
        lambda g: (g * inside,),
    )


@register("gabor_taps")
def gabor_taps(q: Operand, centers, taps: int, fs: int = DEFAULT_FS) -> Tensor:
    """ Unnormalized Gabor taps for Q-factors q (..., C) at fixed centers
    (C,), shape (..., C, P); differentiable with respect to q.
    """
    q = as_tensor(q)
    centers = np.asarray(centers, dtype=np.float64)
    if q.shape[-1:] != centers.shape:
        raise ShapeMismatch(
            f"gabor_taps: {len(centers)} centers for Q of shape {q.shape}."
        )
    out = gabor_kernel(centers, q.value, taps, fs).astype(q.dtype, copy=False)

    def grad_fn(g):
        dq = gabor_kernel_dq(centers, q.value, taps, fs)
        return ((g * dq).sum(axis=-1).astype(q.dtype, copy=False),)

    return record("gabor_taps", (q,), out, grad_fn)


def _correlate(a: np.ndarray, b: np.ndarray, n: int, length: int) -> np.ndarray:
    """ sum_m a[m] b[m - k] for k = 0..length-1 along the last axis. """
    spec = fft.rfft(a, n) * np.conj(fft.rfft(b, n))
    return fft.irfft(spec, n)[..., :length]


@register("conv_same")
def conv_same(x: Operand, h: Operand) -> Tensor:
    """ Differentiable centered same-length convolution (see
    adafe.gabor.conv_same), broadcasting over leading axes.
    """
    x, h = as_tensor(x), as_tensor(h)
    try:
        np.broadcast_shapes(x.shape[:-1], h.shape[:-1])
    except ValueError as e:
        raise ShapeMismatch(f"conv_same: {x.shape} with {h.shape}.") from e
    n_in, n_taps = x.shape[-1], h.shape[-1]
    out = _conv_same(x.value, h.value)

    def grad_fn(g):
        o = (n_taps - 1) // 2
        n = fft.next_fast_len(n_in + n_taps - 1, real=True)
        full = np.zeros(g.shape[:-1] + (n_in + n_taps - 1,), dtype=g.dtype)
        full[..., o : o + n_in] = g
        gx = _correlate(full, h.value, n, n_in)
        gh = _correlate(full, x.value, n, n_taps)
        return unbroadcast(gx, x.shape), unbroadcast(gh, h.shape)

    return record("conv_same", (x, h), out, grad_fn)


@register("rfft_magnitude")
def rfft_magnitude(x: Operand, n_fft: int, taper: Optional[np.ndarray] = None) -> Tensor:
    """ |rfft(x * taper, n_fft)| along the last axis, shape (..., n_fft // 2 + 1).
    The gradient at a zero bin is taken as 0.
    """
    x = as_tensor(x)
    n_in = x.shape[-1]
    if n_fft < n_in:
        raise ShapeMismatch(f"rfft_magnitude: n_fft {n_fft} is shorter than {n_in} samples.")
    tapered = x.value if taper is None else x.value * taper
    spec = fft.rfft(tapered, n_fft)
    out = np.abs(spec).astype(x.dtype, copy=False)
    # Bins other than DC and Nyquist appear twice in the full spectrum.
    fold = np.full(out.shape[-1], 0.5)
    fold[0] = 1.0
    if n_fft % 2 == 0:
        fold[-1] = 1.0

    def grad_fn(g):
        phase = spec / np.where(out > 0, out, 1)
        gx = n_fft * fft.irfft(g * phase * fold, n_fft)[..., :n_in]
        if taper is not None:
            gx = gx * taper
        return (gx.astype(x.dtype, copy=False),)

    return record("rfft_magnitude", (x,), out, grad_fn)
