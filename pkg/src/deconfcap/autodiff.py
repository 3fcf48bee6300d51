"""Dense float64 tensors with reverse-mode automatic differentiation.

The op set is exactly what the decoder needs; every op checks shapes
strictly (the only implicit broadcast is a 1-D bias added to the rows of a
2-D tensor).  Gradients accumulate in fixed reverse-creation order, which is
a reverse topological order because inputs are always created before their
consumers, so backward passes are bit-reproducible.
"""
from __future__ import annotations

import contextlib
import itertools
from typing import Callable, Iterable, Sequence

import numpy as np


class ShapeError(ValueError):
    """Operands do not fit the op; message names the op and both shapes."""


_ids = itertools.count()
_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable tape recording (evaluation / sampling paths)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_needs", "_parents", "_backward", "_id")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._needs = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None
        self._id = next(_ids)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, needs_grad={self._needs})"

    def backward(self) -> None:
        if self.data.shape != ():
            raise ShapeError(f"backward: output must be scalar, got shape {self.data.shape}")
        nodes: list[Tensor] = []
        seen: set[int] = set()
        stack: list[Tensor] = [self]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            nodes.append(node)
            stack.extend(node._parents)
        nodes.sort(key=lambda t: -t._id)
        _accumulate(self, np.ones(()))
        for node in nodes:
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # operator sugar for the common arithmetic
    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        return mul(self, other)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def __neg__(self) -> "Tensor":
        return scale(self, -1.0)


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def _result(data: np.ndarray, parents: tuple[Tensor, ...], bw: Callable | None) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.requires_grad = False
    out._id = next(_ids)
    if _grad_enabled and any(p._needs for p in parents):
        out._needs = True
        out._parents = parents
        out._backward = bw
    else:
        out._needs = False
        out._parents = ()
        out._backward = None
    return out


def constant(data) -> Tensor:
    return Tensor(data)


def parameter(data) -> Tensor:
    return Tensor(data, requires_grad=True)


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape == b.shape:
        def bw(g):
            if a._needs:
                _accumulate(a, g)
            if b._needs:
                _accumulate(b, g)
        return _result(a.data + b.data, (a, b), bw)
    if len(a.shape) == 2 and len(b.shape) == 1 and a.shape[1] == b.shape[0]:
        # row-wise bias, the one permitted broadcast
        def bw(g):
            if a._needs:
                _accumulate(a, g)
            if b._needs:
                _accumulate(b, g.sum(axis=0))
        return _result(a.data + b.data, (a, b), bw)
    raise ShapeError(f"add: incompatible shapes {a.shape} and {b.shape}")


def sub(a: Tensor, b: Tensor) -> Tensor:
    return add(a, scale(b, -1.0))


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"mul: incompatible shapes {a.shape} and {b.shape}")

    def bw(g):
        if a._needs:
            _accumulate(a, g * b.data)
        if b._needs:
            _accumulate(b, g * a.data)
    return _result(a.data * b.data, (a, b), bw)


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)

    def bw(g):
        if a._needs:
            _accumulate(a, g * c)
    return _result(a.data * c, (a,), bw)


def scale_rows(x: Tensor, s: Tensor) -> Tensor:
    """Multiply row i of a (B, d) tensor by s[i]."""
    if len(x.shape) != 2 or s.shape != (x.shape[0],):
        raise ShapeError(f"scale_rows: incompatible shapes {x.shape} and {s.shape}")

    def bw(g):
        if x._needs:
            _accumulate(x, g * s.data[:, None])
        if s._needs:
            _accumulate(s, (g * x.data).sum(axis=1))
    return _result(x.data * s.data[:, None], (x, s), bw)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    ok = (
        (len(a.shape) == 2 and len(b.shape) == 2 and a.shape[1] == b.shape[0])
        or (len(a.shape) == 1 and len(b.shape) == 2 and a.shape[0] == b.shape[0])
        or (len(a.shape) == 2 and len(b.shape) == 1 and a.shape[1] == b.shape[0])
        or (len(a.shape) == 1 and len(b.shape) == 1 and a.shape == b.shape)
    )
    if not ok:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")

    def bw(g):
        if a._needs:
            if len(a.shape) == 1 and len(b.shape) == 1:
                _accumulate(a, g * b.data)
            elif len(b.shape) == 1:
                _accumulate(a, np.outer(g, b.data) if len(a.shape) == 2 else g @ b.data.T)
            elif len(a.shape) == 1:
                _accumulate(a, b.data @ g)
            else:
                _accumulate(a, g @ b.data.T)
        if b._needs:
            if len(a.shape) == 1 and len(b.shape) == 1:
                _accumulate(b, g * a.data)
            elif len(a.shape) == 1:
                _accumulate(b, np.outer(a.data, g))
            elif len(b.shape) == 1:
                _accumulate(b, a.data.T @ g)
            else:
                _accumulate(b, a.data.T @ g)
    return _result(a.data @ b.data, (a, b), bw)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise ShapeError("concat: need at least one tensor")
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def bw(g):
        for t, lo, hi in zip(tensors, bounds[:-1], bounds[1:]):
            if t._needs:
                _accumulate(t, np.take(g, range(lo, hi), axis=axis))
    return _result(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), bw)


def slice_cols(x: Tensor, start: int, stop: int) -> Tensor:
    if len(x.shape) != 2:
        raise ShapeError(f"slice_cols: expected 2-D tensor, got {x.shape}")

    def bw(g):
        if x._needs:
            if x.grad is None:
                x.grad = np.zeros_like(x.data)
            x.grad[:, start:stop] += g
    return _result(x.data[:, start:stop].copy(), (x,), bw)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    def bw(g):
        if x._needs:
            _accumulate(x, g.reshape(x.shape))
    return _result(x.data.reshape(shape), (x,), bw)


def transpose(x: Tensor) -> Tensor:
    if len(x.shape) != 2:
        raise ShapeError(f"transpose: expected 2-D tensor, got {x.shape}")

    def bw(g):
        if x._needs:
            _accumulate(x, g.T)
    return _result(x.data.T.copy(), (x,), bw)


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)

    def bw(g):
        if x._needs:
            _accumulate(x, g * (1.0 - y * y))
    return _result(y, (x,), bw)


def sigmoid(x: Tensor) -> Tensor:
    y = 0.5 * (1.0 + np.tanh(0.5 * x.data))  # stable logistic

    def bw(g):
        if x._needs:
            _accumulate(x, g * y * (1.0 - y))
    return _result(y, (x,), bw)


def leaky_relu(x: Tensor, slope: float = 0.1) -> Tensor:
    mask = np.where(x.data > 0, 1.0, slope)

    def bw(g):
        if x._needs:
            _accumulate(x, g * mask)
    return _result(x.data * mask, (x,), bw)


def exp(x: Tensor) -> Tensor:
    y = np.exp(x.data)

    def bw(g):
        if x._needs:
            _accumulate(x, g * y)
    return _result(y, (x,), bw)


def log(x: Tensor) -> Tensor:
    def bw(g):
        if x._needs:
            _accumulate(x, g / x.data)
    return _result(np.log(x.data), (x,), bw)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Exp-normalize along ``axis`` with max subtraction; rows sum to 1."""
    if not np.all(np.isfinite(x.data)):
        raise ShapeError("softmax: non-finite logits")
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)

    def bw(g):
        if x._needs:
            _accumulate(x, (g - (g * y).sum(axis=axis, keepdims=True)) * y)
    return _result(y, (x,), bw)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    y = shifted - lse

    def bw(g):
        if x._needs:
            _accumulate(x, g - np.exp(y) * g.sum(axis=axis, keepdims=True))
    return _result(y, (x,), bw)


def mean_pool(x: Tensor, axis: int = 0) -> Tensor:
    """Mean over one axis (used for pooling a feature set)."""
    n = x.shape[axis]

    def bw(g):
        if x._needs:
            _accumulate(x, np.repeat(np.expand_dims(g / n, axis), n, axis=axis))
    return _result(x.data.mean(axis=axis), (x,), bw)


def mean_tensors(tensors: Sequence[Tensor]) -> Tensor:
    out = tensors[0]
    for t in tensors[1:]:
        out = add(out, t)
    return scale(out, 1.0 / len(tensors))


def stack_cols(tensors: Sequence[Tensor]) -> Tensor:
    """Stack (B,) tensors into a (B, M) matrix, one per column."""
    return concat([reshape(t, (t.shape[0], 1)) for t in tensors], axis=1)


def gather_rows(w: Tensor, ids: np.ndarray) -> Tensor:
    """Row lookup w[ids] for an id vector; scatter-add on the way back."""
    ids = np.asarray(ids, dtype=np.int64)
    if len(w.shape) != 2 or ids.ndim != 1:
        raise ShapeError(f"gather_rows: expected (V, d) and (B,), got {w.shape} and {ids.shape}")

    def bw(g):
        if w._needs:
            if w.grad is None:
                w.grad = np.zeros_like(w.data)
            np.add.at(w.grad, ids, g)
    return _result(w.data[ids].copy(), (w,), bw)


def pick(x: Tensor, ids: np.ndarray) -> Tensor:
    """Select x[i, ids[i]] per row, giving a (B,) tensor."""
    ids = np.asarray(ids, dtype=np.int64)
    if len(x.shape) != 2 or ids.shape != (x.shape[0],):
        raise ShapeError(f"pick: expected (B, V) and (B,), got {x.shape} and {ids.shape}")
    rows = np.arange(x.shape[0])

    def bw(g):
        if x._needs:
            if x.grad is None:
                x.grad = np.zeros_like(x.data)
            np.add.at(x.grad, (rows, ids), g)
    return _result(x.data[rows, ids].copy(), (x,), bw)


def rowwise_inner(a: Tensor, b: Tensor) -> Tensor:
    """Per-row inner product of two (B, d) tensors -> (B,)."""
    if a.shape != b.shape or len(a.shape) != 2:
        raise ShapeError(f"rowwise_inner: incompatible shapes {a.shape} and {b.shape}")

    def bw(g):
        if a._needs:
            _accumulate(a, g[:, None] * b.data)
        if b._needs:
            _accumulate(b, g[:, None] * a.data)
    return _result((a.data * b.data).sum(axis=1), (a, b), bw)


def sum_all(x: Tensor) -> Tensor:
    def bw(g):
        if x._needs:
            _accumulate(x, np.broadcast_to(g, x.shape).copy())
    return _result(np.asarray(x.data.sum()), (x,), bw)


def mean_all(x: Tensor) -> Tensor:
    return scale(sum_all(x), 1.0 / x.data.size)


def as_tensors(arrays: Iterable[np.ndarray]) -> list[Tensor]:
    return [Tensor(a) for a in arrays]
