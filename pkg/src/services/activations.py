"""
Activaciones y sus derivadas primera y segunda, vectorizadas sobre numpy.

Tanh usa las identidades estándar 1 - tanh² y -2·tanh·(1 - tanh²).
La derivada de ReLU en 0 se define como 0.
"""
from math import comb

import numpy as np
from scipy.special import expit

from src.domain.activation import Activation
from src.domain.errors import DomainError


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("Entrada no finita para la activación")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def act_eval(kind: Activation, x):
    a = _as_array(x)
    if kind is Activation.SIGMOID:
        out = expit(a)
    elif kind is Activation.TANH:
        out = np.tanh(a)
    elif kind is Activation.LINEAR:
        out = a.copy()
    elif kind is Activation.RELU:
        out = np.maximum(a, 0.0)
    elif kind is Activation.EXPONENTIAL:
        with np.errstate(over="ignore"):
            out = np.exp(a)
    else:
        raise DomainError(f"Activación no soportada: {kind}")
    return _out(out, x)


def act_d1(kind: Activation, x):
    a = _as_array(x)
    if kind is Activation.SIGMOID:
        s = expit(a)
        out = s * (1.0 - s)
    elif kind is Activation.TANH:
        t = np.tanh(a)
        out = 1.0 - t * t
    elif kind is Activation.LINEAR:
        out = np.ones_like(a)
    elif kind is Activation.RELU:
        out = np.where(a > 0.0, 1.0, 0.0)
    elif kind is Activation.EXPONENTIAL:
        with np.errstate(over="ignore"):
            out = np.exp(a)
    else:
        raise DomainError(f"Activación no soportada: {kind}")
    return _out(out, x)


def act_d2(kind: Activation, x):
    a = _as_array(x)
    if kind is Activation.SIGMOID:
        s = expit(a)
        out = s * (1.0 - s) * (1.0 - 2.0 * s)
    elif kind is Activation.TANH:
        t = np.tanh(a)
        out = -2.0 * t * (1.0 - t * t)
    elif kind in (Activation.LINEAR, Activation.RELU):
        out = np.zeros_like(a)
    elif kind is Activation.EXPONENTIAL:
        with np.errstate(over="ignore"):
            out = np.exp(a)
    else:
        raise DomainError(f"Activación no soportada: {kind}")
    return _out(out, x)


def numeric_derivative(kind: Activation, x, order: int, h: float = 1e-2):
    """Derivada de orden `order` por diferencias centrales de act_eval (esténcil binomial)."""
    a = _as_array(x)
    total = np.zeros_like(a)
    for j in range(order + 1):
        total += (-1) ** j * comb(order, j) * act_eval(kind, a + (order / 2.0 - j) * h)
    return _out(total / h ** order, x)


def derivative_signs_hold(kind: Activation, order: int, xs) -> bool:
    """True si todas las derivadas numéricas de orden 1..order son >= 0 en xs."""
    for k in range(1, order + 1):
        values = numeric_derivative(kind, np.asarray(xs, dtype=float), k)
        if np.any(values < 0.0):
            return False
    return True
