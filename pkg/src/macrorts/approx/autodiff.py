"""Minimal reverse-mode autodiff over numpy arrays.

Covers exactly the operations the policy/value networks and PPO losses need:
matmul, broadcast add, elementwise arithmetic, relu, exp, log, clip,
row-gather, reductions. float64 throughout; gradients are exact.
"""
from __future__ import annotations

import numpy as np


def _to_array(x) -> np.ndarray:
    if isinstance(x, np.ndarray):
        return x.astype(np.float64, copy=False)
    return np.asarray(x, dtype=np.float64)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, parents=(), backward=None):
        self.data = _to_array(data)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.data.shape

    def _accum(self, g: np.ndarray):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    # -- graph construction helpers -------------------------------------

    def __add__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)
        out_data = self.data + other.data

        def backward(g):
            return (_unbroadcast(g, self.data.shape),
                    _unbroadcast(g, other.data.shape))

        return Tensor(out_data, parents=(self, other), backward=backward)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-(other if isinstance(other, Tensor) else Tensor(other)))

    def __rsub__(self, other):
        return Tensor(other) + (-self)

    def __mul__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)
        out_data = self.data * other.data
        a, b = self, other

        def backward(g):
            return (_unbroadcast(g * b.data, a.data.shape),
                    _unbroadcast(g * a.data, b.data.shape))

        return Tensor(out_data, parents=(a, b), backward=backward)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)
        return self * other ** -1.0

    def __pow__(self, k: float):
        out_data = self.data ** k

        def backward(g):
            return (g * k * self.data ** (k - 1),)

        return Tensor(out_data, parents=(self,), backward=backward)

    def matmul(self, other: "Tensor") -> "Tensor":
        a, b = self, other
        out_data = a.data @ b.data

        def backward(g):
            return g @ b.data.T, a.data.T @ g

        return Tensor(out_data, parents=(a, b), backward=backward)

    def relu(self) -> "Tensor":
        mask = self.data > 0
        out_data = self.data * mask

        def backward(g):
            return (g * mask,)

        return Tensor(out_data, parents=(self,), backward=backward)

    def exp(self) -> "Tensor":
        out_data = np.exp(self.data)

        def backward(g):
            return (g * out_data,)

        return Tensor(out_data, parents=(self,), backward=backward)

    def log(self) -> "Tensor":
        out_data = np.log(self.data)

        def backward(g):
            return (g / self.data,)

        return Tensor(out_data, parents=(self,), backward=backward)

    def clip(self, lo: float, hi: float) -> "Tensor":
        mask = (self.data > lo) & (self.data < hi)
        out_data = np.clip(self.data, lo, hi)

        def backward(g):
            return (g * mask,)

        return Tensor(out_data, parents=(self,), backward=backward)

    def minimum(self, other: "Tensor") -> "Tensor":
        a, b = self, other
        take_a = a.data <= b.data
        out_data = np.where(take_a, a.data, b.data)

        def backward(g):
            return g * take_a, g * ~take_a

        return Tensor(out_data, parents=(a, b), backward=backward)

    def cols(self, start: int, stop: int) -> "Tensor":
        """Column slice [:, start:stop]."""
        out_data = self.data[:, start:stop]
        shape = self.data.shape

        def backward(g):
            full = np.zeros(shape)
            full[:, start:stop] = g
            return (full,)

        return Tensor(out_data, parents=(self,), backward=backward)

    def pick(self, idx: np.ndarray) -> "Tensor":
        """Row gather: out[i] = self[i, idx[i]]."""
        rows = np.arange(self.data.shape[0])
        out_data = self.data[rows, idx]

        def backward(g):
            full = np.zeros_like(self.data)
            full[rows, idx] = g
            return (full,)

        return Tensor(out_data, parents=(self,), backward=backward)

    def sum(self, axis=None, keepdims=False) -> "Tensor":
        out_data = self.data.sum(axis=axis, keepdims=keepdims)
        shape = self.data.shape

        def backward(g):
            if axis is None:
                return (np.broadcast_to(g, shape).copy(),)
            gg = g if keepdims else np.expand_dims(g, axis)
            return (np.broadcast_to(gg, shape).copy(),)

        return Tensor(out_data, parents=(self,), backward=backward)

    def mean(self) -> "Tensor":
        n = self.data.size
        return self.sum() * (1.0 / n)

    def log_softmax(self, axis: int = -1) -> "Tensor":
        # stable composite: x - max(x) (constant) - logsumexp
        shift = Tensor(self.data.max(axis=axis, keepdims=True))
        z = self - shift
        return z - z.exp().sum(axis=axis, keepdims=True).log()

    # -- backward pass ----------------------------------------------------

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar output")
        order: list[Tensor] = []
        seen: set[int] = set()

        def topo(t: Tensor):
            if id(t) in seen or not t.requires_grad:
                return
            seen.add(id(t))
            for p in t._parents:
                topo(p)
            order.append(t)

        topo(self)
        self.grad = np.ones_like(self.data)
        for t in reversed(order):
            if t._backward is None or t.grad is None:
                continue
            grads = t._backward(t.grad)
            for parent, g in zip(t._parents, grads):
                if parent.requires_grad and g is not None:
                    parent._accum(g)


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum gradient over axes that were broadcast in the forward op."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, (gs, ss) in enumerate(zip(g.shape, shape)):
        if ss == 1 and gs != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


def parameter(data) -> Tensor:
    return Tensor(data, requires_grad=True)
