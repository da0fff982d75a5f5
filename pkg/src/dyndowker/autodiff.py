"""A small reverse-mode automatic differentiation engine over numpy arrays.

Only the operations the line-graph network needs are provided. Every op
records its parents and a closure that maps the output gradient to parent
gradients; :meth:`Tensor.backward` replays them in reverse topological order.
"""
from __future__ import annotations

from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp


class Tensor:
    __slots__ = ("value", "grad", "parents", "backward_fn", "requires_grad")

    def __init__(self, value, parents: Tuple["Tensor", ...] = (),
                 backward_fn: Optional[Callable] = None, requires_grad: bool = False):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.parents = parents
        self.backward_fn = backward_fn
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node.parents:
                stack.append((p, False))
        grads = {id(self): np.ones_like(self.value) if grad is None else np.asarray(grad, dtype=np.float64)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.backward_fn is None:
                node.grad = g if node.grad is None else node.grad + g
                continue
            for p, pg in zip(node.parents, node.backward_fn(g)):
                if pg is None or not p.requires_grad:
                    continue
                if id(p) in grads:
                    grads[id(p)] = grads[id(p)] + pg
                else:
                    grads[id(p)] = pg

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(as_tensor(other)))

    def __rsub__(self, other):
        return add(as_tensor(other), neg(self))

    def __neg__(self):
        return neg(self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return index(self, idx)

    def sum(self):
        return total(self)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def parameter(value) -> Tensor:
    return Tensor(np.array(value, dtype=np.float64), requires_grad=True)


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    sa, sb = a.shape, b.shape
    return Tensor(a.value + b.value, (a, b),
                  lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def neg(a: Tensor) -> Tensor:
    return Tensor(-a.value, (a,), lambda g: (-g,))


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    av, bv = a.value, b.value
    return Tensor(av * bv, (a, b),
                  lambda g: (_unbroadcast(g * bv, av.shape), _unbroadcast(g * av, bv.shape)))


def square(a: Tensor) -> Tensor:
    v = a.value
    return Tensor(v * v, (a,), lambda g: (2.0 * v * g,))


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    av, bv = a.value, b.value
    return Tensor(av @ bv, (a, b), lambda g: (g @ bv.T, av.T @ g))


def spmm(m: sp.spmatrix, x: Tensor) -> Tensor:
    """Constant sparse matrix times a tensor."""
    mt = m.T.tocsr()
    return Tensor(np.asarray(m @ x.value), (x,), lambda g: (np.asarray(mt @ g),))


def relu(a: Tensor) -> Tensor:
    mask = a.value > 0
    return Tensor(a.value * mask, (a,), lambda g: (g * mask,))


def sigmoid(a: Tensor) -> Tensor:
    s = 0.5 * (1.0 + np.tanh(0.5 * a.value))
    return Tensor(s, (a,), lambda g: (g * s * (1.0 - s),))


def concat(parts: Sequence[Tensor], axis: int = 1) -> Tensor:
    parts = [as_tensor(p) for p in parts]
    sizes = [p.shape[axis] for p in parts]
    cuts = np.cumsum(sizes)[:-1]
    return Tensor(np.concatenate([p.value for p in parts], axis=axis), tuple(parts),
                  lambda g: tuple(np.split(g, cuts, axis=axis)))


def index(a: Tensor, idx) -> Tensor:
    shape = a.shape

    def back(g):
        out = np.zeros(shape)
        np.add.at(out, idx, g)
        return (out,)

    return Tensor(a.value[idx], (a,), back)


def total(a: Tensor) -> Tensor:
    shape = a.shape
    return Tensor(np.sum(a.value), (a,), lambda g: (np.full(shape, g),))


def max_rows(a: Tensor) -> Tensor:
    """Column-wise max over rows, keeping a leading axis of size one.

    Ties route the gradient to the first maximal row.
    """
    arg = np.argmax(a.value, axis=0)
    cols = np.arange(a.shape[1])
    shape = a.shape

    def back(g):
        out = np.zeros(shape)
        out[arg, cols] = g.reshape(-1)
        return (out,)

    return Tensor(a.value[arg, cols][None, :], (a,), back)


def mean_rows(a: Tensor) -> Tensor:
    n = a.shape[0]
    shape = a.shape
    return Tensor(a.value.mean(axis=0, keepdims=True), (a,),
                  lambda g: (np.broadcast_to(g / n, shape).copy(),))


def sort_pairs(a: Tensor) -> Tensor:
    """Reorder each row of an ``(n, 2)`` tensor so column 0 <= column 1."""
    v = a.value
    swap = v[:, 0] > v[:, 1]
    out = v.copy()
    out[swap] = v[swap][:, ::-1]

    def back(g):
        gi = g.copy()
        gi[swap] = g[swap][:, ::-1]
        return (gi,)

    return Tensor(out, (a,), back)


def log_softmax(a: Tensor) -> Tensor:
    v = a.value
    shifted = v - v.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    out = shifted - lse
    soft = np.exp(out)
    return Tensor(out, (a,), lambda g: (g - soft * g.sum(axis=-1, keepdims=True),))
