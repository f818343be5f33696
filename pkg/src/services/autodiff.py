"""
Cinta de diferenciación en modo reverso sobre arreglos numpy.

Cada operación crea un Tensor con sus padres y una función que, dado el gradiente de la
salida, devuelve el gradiente de cada padre. `backward()` recorre el grafo en orden
topológico inverso y acumula en `.grad` de las hojas con requires_grad.
"""
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from src.domain.activation import Activation
from src.services.activations import act_d1, act_d2, act_eval

Backward = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tensor:
    __slots__ = ("value", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, value, requires_grad: bool = False,
                 parents: Tuple["Tensor", ...] = (), backward: Optional[Backward] = None):
        self.value = np.asarray(value, dtype=float)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.value.shape

    def backward(self) -> None:
        order: List[Tensor] = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                stack.append((parent, False))
        grads = {id(self): np.ones_like(self.value)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node.grad = g if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        return getitem(self, index)


def constant(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a, b) -> Tensor:
    a, b = constant(a), constant(b)
    return Tensor(a.value + b.value, parents=(a, b),
                  backward=lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b) -> Tensor:
    a, b = constant(a), constant(b)
    return Tensor(a.value - b.value, parents=(a, b),
                  backward=lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a, b) -> Tensor:
    a, b = constant(a), constant(b)
    return Tensor(a.value * b.value, parents=(a, b),
                  backward=lambda g: (_unbroadcast(g * b.value, a.shape), _unbroadcast(g * a.value, b.shape)))


def div(a, b) -> Tensor:
    a, b = constant(a), constant(b)
    out = a.value / b.value
    return Tensor(out, parents=(a, b),
                  backward=lambda g: (_unbroadcast(g / b.value, a.shape), _unbroadcast(-g * out / b.value, b.shape)))


def matmul(a, b) -> Tensor:
    a, b = constant(a), constant(b)

    def backward(g):
        ga = g @ np.swapaxes(b.value, -1, -2) if b.value.ndim > 1 else np.multiply.outer(g, b.value)
        gb = np.swapaxes(a.value, -1, -2) @ g if a.value.ndim > 1 else np.multiply.outer(a.value, g)
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return Tensor(a.value @ b.value, parents=(a, b), backward=backward)


def transpose(a: Tensor) -> Tensor:
    """Intercambia los dos últimos ejes."""
    return Tensor(np.swapaxes(a.value, -1, -2), parents=(a,), backward=lambda g: (np.swapaxes(g, -1, -2),))


def reshape(a: Tensor, shape) -> Tensor:
    return Tensor(a.value.reshape(shape), parents=(a,), backward=lambda g: (g.reshape(a.shape),))


def getitem(a: Tensor, index) -> Tensor:
    def backward(g):
        full = np.zeros_like(a.value)
        full[index] += g
        return (full,)

    return Tensor(a.value[index], parents=(a,), backward=backward)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]
    return Tensor(np.concatenate([t.value for t in tensors], axis=axis), parents=tuple(tensors),
                  backward=lambda g: tuple(np.split(g, splits, axis=axis)))


def broadcast_to(a: Tensor, shape) -> Tensor:
    return Tensor(np.broadcast_to(a.value, shape).copy(), parents=(a,),
                  backward=lambda g: (_unbroadcast(g, a.shape),))


def sum_(a: Tensor, axis=None) -> Tensor:
    def backward(g):
        if axis is None:
            return (np.broadcast_to(g, a.shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), a.shape).copy(),)

    return Tensor(np.sum(a.value, axis=axis), parents=(a,), backward=backward)


def prod_list(tensors: Sequence[Tensor]) -> Tensor:
    out = tensors[0]
    for t in tensors[1:]:
        out = out * t
    return out


def log(a: Tensor) -> Tensor:
    return Tensor(np.log(a.value), parents=(a,), backward=lambda g: (g / a.value,))


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.value)
    return Tensor(out, parents=(a,), backward=lambda g: (g * (1.0 - out * out),))


def softplus(a: Tensor) -> Tensor:
    return Tensor(np.logaddexp(0.0, a.value), parents=(a,), backward=lambda g: (g * expit(a.value),))


def activate(kind: Activation, a: Tensor) -> Tensor:
    """z(a); el gradiente usa la primera derivada tabulada."""
    return Tensor(act_eval(kind, a.value), parents=(a,), backward=lambda g: (g * act_d1(kind, a.value),))


def activate_d1(kind: Activation, a: Tensor) -> Tensor:
    """z'(a); el gradiente usa la segunda derivada tabulada."""
    return Tensor(act_d1(kind, a.value), parents=(a,), backward=lambda g: (g * act_d2(kind, a.value),))
