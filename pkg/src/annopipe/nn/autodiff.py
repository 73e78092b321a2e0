"""Minimal reverse-mode automatic differentiation over numpy arrays.

Every operation builds a node in an implicit computation trace (a DAG from
input leaves to the loss).  ``Tensor.backward`` linearizes the trace and
visits it in exact reverse topological order, accumulating gradients into
``Tensor.grad``.  Arrays are float64 throughout; determinism follows from
single-threaded numpy plus explicitly seeded generators.
"""

from __future__ import annotations

import numpy as np


class Tensor:
    """A value in the computation trace.

    ``parents`` and ``backward_fn`` record how the value was produced;
    leaves have neither.  ``requires_grad`` marks trainable leaves and
    propagates to everything computed from them.
    """

    __slots__ = ("data", "grad", "parents", "backward_fn", "requires_grad", "name")

    def __init__(self, data, parents=(), backward_fn=None, requires_grad=False, name=""):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.parents = tuple(parents)
        self.backward_fn = backward_fn
        self.requires_grad = requires_grad or any(p.requires_grad for p in self.parents)
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def accumulate(self, g):
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64)
        else:
            self.grad = self.grad + g

    def backward(self):
        """Backpropagate from this scalar through the recorded trace."""
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar loss")
        order = linearize(self)
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node.backward_fn is not None and node.requires_grad and node.grad is not None:
                node.backward_fn(node.grad)

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


class Parameter(Tensor):
    """A named trainable leaf; gradients persist until the optimizer clears them."""

    def __init__(self, data, name):
        super().__init__(data, requires_grad=True, name=name)

    def zero_grad(self):
        self.grad = None


def linearize(root: Tensor) -> list[Tensor]:
    """Topological order of the trace below ``root`` (iterative, graphs get deep)."""
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node.parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    return order


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce ``grad`` back to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data + b.data

    def backward_fn(g):
        a.accumulate(_unbroadcast(g, a.data.shape))
        b.accumulate(_unbroadcast(g, b.data.shape))

    return Tensor(out_data, (a, b), backward_fn)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data - b.data

    def backward_fn(g):
        a.accumulate(_unbroadcast(g, a.data.shape))
        b.accumulate(_unbroadcast(-g, b.data.shape))

    return Tensor(out_data, (a, b), backward_fn)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data * b.data

    def backward_fn(g):
        a.accumulate(_unbroadcast(g * b.data, a.data.shape))
        b.accumulate(_unbroadcast(g * a.data, b.data.shape))

    return Tensor(out_data, (a, b), backward_fn)


def scale(a, s: float) -> Tensor:
    a = as_tensor(a)

    def backward_fn(g):
        a.accumulate(g * s)

    return Tensor(a.data * s, (a,), backward_fn)


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data @ b.data
    a_is_vec = a.data.ndim == 1
    b_is_vec = b.data.ndim == 1

    def backward_fn(g):
        if a_is_vec and b_is_vec:  # dot product, g scalar
            a.accumulate(g * b.data)
            b.accumulate(g * a.data)
        elif a_is_vec:  # (k,) @ (k,n) -> (n,)
            a.accumulate(b.data @ g)
            b.accumulate(np.outer(a.data, g))
        elif b_is_vec:  # (m,k) @ (k,) -> (m,)
            a.accumulate(np.outer(g, b.data))
            b.accumulate(a.data.T @ g)
        else:  # (m,k) @ (k,n)
            a.accumulate(g @ b.data.T)
            b.accumulate(a.data.T @ g)

    return Tensor(out_data, (a, b), backward_fn)


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.tanh(a.data)

    def backward_fn(g):
        a.accumulate(g * (1.0 - out_data * out_data))

    return Tensor(out_data, (a,), backward_fn)


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    # numerically stable via tanh
    out_data = 0.5 * (np.tanh(0.5 * a.data) + 1.0)

    def backward_fn(g):
        a.accumulate(g * out_data * (1.0 - out_data))

    return Tensor(out_data, (a,), backward_fn)


def relu(a) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0

    def backward_fn(g):
        a.accumulate(g * mask)

    return Tensor(a.data * mask, (a,), backward_fn)


def exp(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.exp(a.data)

    def backward_fn(g):
        a.accumulate(g * out_data)

    return Tensor(out_data, (a,), backward_fn)


def log(a) -> Tensor:
    a = as_tensor(a)

    def backward_fn(g):
        a.accumulate(g / a.data)

    return Tensor(np.log(a.data), (a,), backward_fn)


def tsum(a, axis=None, keepdims=False) -> Tensor:
    a = as_tensor(a)
    out_data = a.data.sum(axis=axis, keepdims=keepdims)

    def backward_fn(g):
        if axis is None:
            a.accumulate(np.broadcast_to(g, a.data.shape))
        else:
            g_exp = g if keepdims else np.expand_dims(g, axis)
            a.accumulate(np.broadcast_to(g_exp, a.data.shape))

    return Tensor(out_data, (a,), backward_fn)


def tmean(a) -> Tensor:
    a = as_tensor(a)
    return scale(tsum(a), 1.0 / a.data.size)


def concat(tensors, axis=0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]

    def backward_fn(g):
        offset = 0
        for t, size in zip(tensors, sizes):
            index = [slice(None)] * g.ndim
            index[axis] = slice(offset, offset + size)
            t.accumulate(g[tuple(index)])
            offset += size

    return Tensor(out_data, tuple(tensors), backward_fn)


def narrow(a, axis: int, start: int, length: int) -> Tensor:
    """Contiguous slice along one axis."""
    a = as_tensor(a)
    index = [slice(None)] * a.data.ndim
    index[axis] = slice(start, start + length)
    index = tuple(index)

    def backward_fn(g):
        full = np.zeros_like(a.data)
        full[index] = g
        a.accumulate(full)

    return Tensor(a.data[index], (a,), backward_fn)


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)

    def backward_fn(g):
        a.accumulate(g.reshape(a.data.shape))

    return Tensor(a.data.reshape(shape), (a,), backward_fn)


def take_rows(table, indices) -> Tensor:
    """Row lookup (embedding): table (V, d), indices (n,) -> (n, d)."""
    table = as_tensor(table)
    idx = np.asarray(indices, dtype=np.intp)

    def backward_fn(g):
        full = np.zeros_like(table.data)
        np.add.at(full, idx, g)
        table.accumulate(full)

    return Tensor(table.data[idx], (table,), backward_fn)


def pick(a, indices) -> Tensor:
    """Per-row gather: a (n, k), indices (n,) -> (n,)."""
    a = as_tensor(a)
    idx = np.asarray(indices, dtype=np.intp)
    rows = np.arange(a.data.shape[0])

    def backward_fn(g):
        full = np.zeros_like(a.data)
        full[rows, idx] = g
        a.accumulate(full)

    return Tensor(a.data[rows, idx], (a,), backward_fn)


def logsumexp(a, axis=-1, keepdims=False) -> Tensor:
    a = as_tensor(a)
    m = a.data.max(axis=axis, keepdims=True)
    shifted = np.exp(a.data - m)
    total = shifted.sum(axis=axis, keepdims=True)
    out_data = (np.log(total) + m)
    softmax_data = shifted / total
    if not keepdims:
        out_data = np.squeeze(out_data, axis=axis)

    def backward_fn(g):
        g_exp = g if keepdims else np.expand_dims(g, axis)
        a.accumulate(g_exp * softmax_data)

    return Tensor(out_data, (a,), backward_fn)


def log_softmax(a, axis=-1) -> Tensor:
    return sub(a, logsumexp(a, axis=axis, keepdims=True))


def softmax(a, axis=-1) -> Tensor:
    return exp(log_softmax(a, axis=axis))


def cross_entropy(logits, gold) -> Tensor:
    """Sum of ``logsumexp(row) - row[gold]`` over rows.

    ``logits`` may be (k,) with an int gold index, or (n, k) with n indices.
    """
    logits = as_tensor(logits)
    if logits.data.ndim == 1:
        logits = reshape(logits, (1, logits.data.shape[0]))
        gold = [gold]
    lse = logsumexp(logits, axis=-1)
    picked = pick(logits, gold)
    return tsum(sub(lse, picked))


def dropout(a, rate: float, rng: np.random.Generator, train: bool) -> Tensor:
    """Inverted dropout; identity when not training or rate is 0."""
    if not train or rate <= 0.0:
        return as_tensor(a)
    a = as_tensor(a)
    mask = (rng.random(a.data.shape) >= rate) / (1.0 - rate)

    def backward_fn(g):
        a.accumulate(g * mask)

    return Tensor(a.data * mask, (a,), backward_fn)


def stop_gradient(a) -> Tensor:
    return Tensor(as_tensor(a).data.copy())
