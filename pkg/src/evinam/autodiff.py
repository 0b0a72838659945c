"""Reverse-mode automatic differentiation over dense float64 arrays.

The computation graph is implicit.  Every operation whose inputs require
gradients records its parent tensors and a backward closure on the result;
:meth:`Tensor.backward` on a scalar then walks the graph once in reverse
topological order and accumulates gradients into the leaves.  Leaf gradients
accumulate across calls (so backward through a sum of losses equals the sum
of backwards through each loss); interior gradients are reset per call.

Broadcasting is deliberately narrow.  Elementwise operations accept equal
shapes or a scalar on either side, and addition/subtraction additionally
accept a matrix plus a row vector (the affine-bias case).  Anything else
raises :class:`ShapeError` instead of silently broadcasting.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy.special import erf as _erf
from scipy.special import gammaln as _gammaln
from scipy.special import polygamma as _polygamma

from .exceptions import DomainError, ShapeError

__all__ = [
    "Tensor",
    "digamma_values",
    "softplus_values",
    "sigmoid_values",
    "add",
    "subtract",
    "multiply",
    "divide",
    "matmul",
    "absolute",
    "power",
    "log",
    "exp",
    "softplus",
    "log_gamma",
    "digamma",
    "relu",
    "gelu",
    "maximum",
    "tensor_sum",
    "tensor_mean",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# stable scalar kernels (work on plain ndarrays, reused by forward passes)
# ---------------------------------------------------------------------------

def softplus_values(z: np.ndarray) -> np.ndarray:
    """log(1 + e^z) computed as max(z, 0) + log1p(e^-|z|); never overflows."""
    z = np.asarray(z, dtype=np.float64)
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def sigmoid_values(z: np.ndarray) -> np.ndarray:
    """Logistic function, evaluated on the non-growing exponential branch."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def digamma_values(x: np.ndarray) -> np.ndarray:
    """Digamma for strictly positive arguments.

    Uses the recurrence psi(x) = psi(x + 1) - 1/x to push the argument above
    6, then the asymptotic series in 1/x^2.  Absolute error is below 1e-11
    over the positive axis.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size and np.min(x) <= 0.0:
        raise DomainError("digamma requires strictly positive arguments")
    x = x.copy()
    acc = np.zeros_like(x)
    small = x < 6.0
    while np.any(small):
        acc[small] -= 1.0 / x[small]
        x[small] += 1.0
        small = x < 6.0
    inv2 = 1.0 / (x * x)
    series = inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (
        1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))))
    return acc + np.log(x) - 0.5 / x - series


def _gelu_values(z: np.ndarray) -> np.ndarray:
    return 0.5 * z * (1.0 + _erf(z / _SQRT2))


def _gelu_grad(z: np.ndarray) -> np.ndarray:
    cdf = 0.5 * (1.0 + _erf(z / _SQRT2))
    pdf = _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    return cdf + z * pdf


# ---------------------------------------------------------------------------
# tensor node
# ---------------------------------------------------------------------------

class Tensor:
    """A dense float64 array plus an optional slot in the backward graph.

    ``data`` is treated as immutable once the tensor participates in a
    graph; optimizers rebind ``data`` on leaves instead of writing into it.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        self.data = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None

    # -- basic introspection ------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError("item() requires a tensor with exactly one element")
        return float(self.data.reshape(()))

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}{flag})"

    # -- gradient plumbing ----------------------------------------------------

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        """Accumulate d(self)/d(leaf) into every reachable leaf's ``grad``.

        ``self`` must hold exactly one element.  Interior nodes get a fresh
        gradient buffer each call; leaf gradients add up across calls until
        :meth:`zero_grad`.
        """
        if self.data.size != 1:
            raise ShapeError(
                f"backward() needs a scalar loss, got shape {self.data.shape}")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        for node in topo:
            if node._parents:
                node.grad = np.zeros_like(node.data)
            elif node.grad is None:
                node.grad = np.zeros_like(node.data)
        self.grad = self.grad + np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None:
                node._backward(node.grad)

    # -- operator sugar -------------------------------------------------------

    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __radd__(self, other):
        return add(_as_tensor(other), self)

    def __sub__(self, other):
        return subtract(self, _as_tensor(other))

    def __rsub__(self, other):
        return subtract(_as_tensor(other), self)

    def __mul__(self, other):
        return multiply(self, _as_tensor(other))

    def __rmul__(self, other):
        return multiply(_as_tensor(other), self)

    def __truediv__(self, other):
        return divide(self, _as_tensor(other))

    def __rtruediv__(self, other):
        return divide(_as_tensor(other), self)

    def __neg__(self):
        return multiply(self, _as_tensor(-1.0))

    def __pow__(self, exponent):
        return power(self, exponent)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self):
        return tensor_sum(self)

    def mean(self):
        return tensor_mean(self)


def _as_tensor(value) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _make(data: np.ndarray, parents: Sequence[Tensor],
          backward: Callable[[np.ndarray], None]) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _accumulate(node: Tensor, value: np.ndarray) -> None:
    if node.grad is None:
        node.grad = np.zeros_like(node.data)
    node.grad += value


def _reduce_to(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to the operand's shape."""
    if grad.shape == shape:
        return grad
    if int(np.prod(shape)) == 1:
        return np.asarray(grad.sum()).reshape(shape)
    if len(shape) == 1 and grad.ndim == 2 and grad.shape[1] == shape[0]:
        return grad.sum(axis=0)
    raise ShapeError(f"cannot reduce gradient of shape {grad.shape} to {shape}")


def _check_elementwise(a: Tensor, b: Tensor, op: str, allow_bias: bool) -> None:
    if a.shape == b.shape or a.size == 1 or b.size == 1:
        return
    if allow_bias:
        if a.data.ndim == 2 and b.data.ndim == 1 and a.shape[1] == b.shape[0]:
            return
        if b.data.ndim == 2 and a.data.ndim == 1 and b.shape[1] == a.shape[0]:
            return
    raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not conform")


# ---------------------------------------------------------------------------
# arithmetic
# ---------------------------------------------------------------------------

def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise(a, b, "add", allow_bias=True)
    data = a.data + b.data

    def backward(g: np.ndarray) -> None:
        _accumulate(a, _reduce_to(g, a.shape))
        _accumulate(b, _reduce_to(g, b.shape))

    return _make(data, (a, b), backward)


def subtract(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise(a, b, "subtract", allow_bias=True)
    data = a.data - b.data

    def backward(g: np.ndarray) -> None:
        _accumulate(a, _reduce_to(g, a.shape))
        _accumulate(b, -_reduce_to(g, b.shape))

    return _make(data, (a, b), backward)


def multiply(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise(a, b, "multiply", allow_bias=False)
    data = a.data * b.data

    def backward(g: np.ndarray) -> None:
        _accumulate(a, _reduce_to(g * b.data, a.shape))
        _accumulate(b, _reduce_to(g * a.data, b.shape))

    return _make(data, (a, b), backward)


def divide(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise(a, b, "divide", allow_bias=False)
    data = a.data / b.data

    def backward(g: np.ndarray) -> None:
        _accumulate(a, _reduce_to(g / b.data, a.shape))
        _accumulate(b, _reduce_to(-g * a.data / (b.data * b.data), b.shape))

    return _make(data, (a, b), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim not in (1, 2):
        raise ShapeError(
            f"matmul supports [n,k]@[k,m] and [n,k]@[k], got {a.shape} @ {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dimensions {a.shape} @ {b.shape} differ")
    data = a.data @ b.data

    if b.data.ndim == 2:
        def backward(g: np.ndarray) -> None:
            _accumulate(a, g @ b.data.T)
            _accumulate(b, a.data.T @ g)
    else:
        def backward(g: np.ndarray) -> None:
            _accumulate(a, np.outer(g, b.data))
            _accumulate(b, a.data.T @ g)

    return _make(data, (a, b), backward)


def power(a: Tensor, exponent) -> Tensor:
    a = _as_tensor(a)
    if isinstance(exponent, Tensor) or not isinstance(exponent, (int, float)):
        raise ShapeError("power supports constant scalar exponents only")
    p = float(exponent)
    data = a.data ** p

    def backward(g: np.ndarray) -> None:
        _accumulate(a, g * p * a.data ** (p - 1.0))

    return _make(data, (a,), backward)


def absolute(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    data = np.abs(a.data)

    def backward(g: np.ndarray) -> None:
        _accumulate(a, g * np.sign(a.data))

    return _make(data, (a,), backward)


def maximum(a: Tensor, floor: float) -> Tensor:
    """Elementwise max with a constant; gradient is zero at and below it."""
    a = _as_tensor(a)
    c = float(floor)
    data = np.maximum(a.data, c)

    def backward(g: np.ndarray) -> None:
        _accumulate(a, g * (a.data > c))

    return _make(data, (a,), backward)


# ---------------------------------------------------------------------------
# transcendental
# ---------------------------------------------------------------------------

def log(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    if a.size and np.min(a.data) <= 0.0:
        raise DomainError("log requires strictly positive arguments")
    data = np.log(a.data)

    def backward(g: np.ndarray) -> None:
        _accumulate(a, g / a.data)

    return _make(data, (a,), backward)


def exp(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    data = np.exp(a.data)

    def backward(g: np.ndarray) -> None:
        _accumulate(a, g * data)

    return _make(data, (a,), backward)


def softplus(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    data = softplus_values(a.data)

    def backward(g: np.ndarray) -> None:
        _accumulate(a, g * sigmoid_values(a.data))

    return _make(data, (a,), backward)


def log_gamma(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    if a.size and np.min(a.data) <= 0.0:
        raise DomainError("log_gamma requires strictly positive arguments")
    data = _gammaln(a.data)

    def backward(g: np.ndarray) -> None:
        _accumulate(a, g * digamma_values(a.data))

    return _make(data, (a,), backward)


def digamma(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    data = digamma_values(a.data)

    def backward(g: np.ndarray) -> None:
        _accumulate(a, g * _polygamma(1, a.data))

    return _make(data, (a,), backward)


def relu(a: Tensor) -> Tensor:
    return maximum(a, 0.0)


def gelu(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    data = _gelu_values(a.data)

    def backward(g: np.ndarray) -> None:
        _accumulate(a, g * _gelu_grad(a.data))

    return _make(data, (a,), backward)


# ---------------------------------------------------------------------------
# reductions
# ---------------------------------------------------------------------------

def tensor_sum(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    data = np.asarray(a.data.sum())

    def backward(g: np.ndarray) -> None:
        _accumulate(a, np.broadcast_to(g, a.shape).copy() if a.shape else g)

    return _make(data, (a,), backward)


def tensor_mean(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    n = a.size
    if n == 0:
        raise ShapeError("mean of an empty tensor is undefined")
    data = np.asarray(a.data.mean())

    def backward(g: np.ndarray) -> None:
        val = g / n
        _accumulate(a, np.broadcast_to(val, a.shape).copy() if a.shape else val)

    return _make(data, (a,), backward)
