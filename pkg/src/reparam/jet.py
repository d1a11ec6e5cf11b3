"""Second-order forward-mode automatic differentiation.

A :class:`Jet2` carries a value, its gradient with respect to ``k`` active
variables, and the Hessian stored as the packed upper triangle (row-major,
``i <= j``).  Values may be plain floats or numpy arrays; in the latter case
the gradient has shape ``(k, *batch)`` and the packed Hessian
``(k(k+1)/2, *batch)`` so a whole quadrature grid can be pushed through in
one pass.

Passing ``order=1`` to :func:`variables` drops the Hessian; any operation
involving a first-order jet yields a first-order jet.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _triu(k: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(k)


def _sym_outer(a: np.ndarray, b: np.ndarray, k: int) -> np.ndarray:
    """Packed ``a_i b_j + a_j b_i``."""
    iu, ju = _triu(k)
    return a[iu] * b[ju] + a[ju] * b[iu]


def _outer_self(a: np.ndarray, k: int) -> np.ndarray:
    """Packed ``a_i a_j``."""
    iu, ju = _triu(k)
    return a[iu] * a[ju]


class Jet2:
    __slots__ = ("value", "grad", "hess")
    # make numpy scalars/arrays defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, value, grad, hess=None):
        self.value = value
        self.grad = grad
        self.hess = hess

    # -- construction -----------------------------------------------------
    @property
    def k(self) -> int:
        return self.grad.shape[0]

    @property
    def order(self) -> int:
        return 1 if self.hess is None else 2

    @classmethod
    def constant(cls, value, k: int, order: int = 2) -> "Jet2":
        shape = np.shape(value)
        grad = np.zeros((k, *shape))
        hess = np.zeros((k * (k + 1) // 2, *shape)) if order == 2 else None
        return cls(value, grad, hess)

    def hessian(self) -> np.ndarray:
        """Full symmetric Hessian, shape ``(k, k, *batch)``."""
        if self.hess is None:
            raise ValueError("first-order jet carries no Hessian")
        k = self.k
        iu, ju = _triu(k)
        full = np.zeros((k, k, *np.shape(self.value)))
        full[iu, ju] = self.hess
        full[ju, iu] = self.hess
        return full

    def __repr__(self) -> str:
        return f"Jet2(value={self.value!r}, grad={self.grad!r})"

    # -- helpers ----------------------------------------------------------
    def _apply(self, f0, f1, f2) -> "Jet2":
        """Chain rule for a unary map with derivatives ``f1``, ``f2``."""
        grad = f1 * self.grad
        if self.hess is None:
            return Jet2(f0, grad)
        hess = f1 * self.hess + f2 * _outer_self(self.grad, self.k)
        return Jet2(f0, grad, hess)

    # -- arithmetic -------------------------------------------------------
    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, None if self.hess is None else -self.hess)

    def __pos__(self) -> "Jet2":
        return self

    def __add__(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            hess = None
            if self.hess is not None and other.hess is not None:
                hess = self.hess + other.hess
            return Jet2(self.value + other.value, self.grad + other.grad, hess)
        return Jet2(self.value + other, self.grad, self.hess)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet2":
        return self + (-other)

    def __rsub__(self, other) -> "Jet2":
        return (-self) + other

    def __mul__(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            a, b = self, other
            value = a.value * b.value
            grad = a.value * b.grad + b.value * a.grad
            if a.hess is None or b.hess is None:
                return Jet2(value, grad)
            hess = a.value * b.hess + b.value * a.hess + _sym_outer(a.grad, b.grad, a.k)
            return Jet2(value, grad, hess)
        return Jet2(self.value * other, self.grad * other,
                    None if self.hess is None else self.hess * other)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet2":
        inv = 1.0 / self.value
        return self._apply(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return self * other.reciprocal()
        return self * (1.0 / other)

    def __rtruediv__(self, other) -> "Jet2":
        return self.reciprocal() * other

    def __pow__(self, p) -> "Jet2":
        if isinstance(p, Jet2):
            return exp(log(self) * p)
        if p == 2:
            return self * self
        if p == 1:
            return self
        if p == 0:
            return Jet2.constant(np.ones_like(self.value) if np.ndim(self.value) else 1.0,
                                 self.k, self.order)
        if isinstance(p, int) and p > 0:
            # exact for negative bases, unlike the real-exponent branch
            v = self.value
            return self._apply(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))
        v = self.value
        vp2 = v ** (p - 2)
        return self._apply(vp2 * v * v, p * vp2 * v, p * (p - 1) * vp2)

    def __rpow__(self, base) -> "Jet2":
        return exp(self * math.log(base))

    # comparisons act on the value part only
    def __lt__(self, other):
        return self.value < _val(other)

    def __le__(self, other):
        return self.value <= _val(other)

    def __gt__(self, other):
        return self.value > _val(other)

    def __ge__(self, other):
        return self.value >= _val(other)

    def __float__(self) -> float:
        return float(self.value)


def _val(x):
    return x.value if isinstance(x, Jet2) else x


def value_of(x):
    """Strip derivative information."""
    return x.value if isinstance(x, Jet2) else x


def variables(values, order: int = 2, start: int = 0, k: int | None = None) -> list[Jet2]:
    """Seed ``len(values)`` independent variables.

    ``start`` offsets the seed index so that several groups (e.g. ``x`` then
    ``v``) can share one jet space of size ``k``.
    """
    values = list(values)
    if k is None:
        k = start + len(values)
    out = []
    for i, val in enumerate(values):
        shape = np.shape(val)
        grad = np.zeros((k, *shape))
        grad[start + i] = 1.0
        hess = np.zeros((k * (k + 1) // 2, *shape)) if order == 2 else None
        out.append(Jet2(val, grad, hess))
    return out


# -- elementary functions (accept floats, arrays or jets) -----------------

def sqrt(x):
    if isinstance(x, Jet2):
        s = np.sqrt(x.value)
        return x._apply(s, 0.5 / s, -0.25 / (s * x.value))
    return np.sqrt(x)


def exp(x):
    if isinstance(x, Jet2):
        e = np.exp(x.value)
        return x._apply(e, e, e)
    return np.exp(x)


def log(x):
    if isinstance(x, Jet2):
        inv = 1.0 / x.value
        return x._apply(np.log(x.value), inv, -inv * inv)
    return np.log(x)


def sin(x):
    if isinstance(x, Jet2):
        s, c = np.sin(x.value), np.cos(x.value)
        return x._apply(s, c, -s)
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet2):
        s, c = np.sin(x.value), np.cos(x.value)
        return x._apply(c, -s, -c)
    return np.cos(x)


def tanh(x):
    if isinstance(x, Jet2):
        t = np.tanh(x.value)
        d = 1.0 - t * t
        return x._apply(t, d, -2.0 * t * d)
    return np.tanh(x)


def root(x, n: int):
    """Real ``n``-th root of a positive argument."""
    if n == 1:
        return x
    if n == 2:
        return sqrt(x)
    return x ** (1.0 / n)


def derivative(f, x0: float) -> tuple[float, float, float]:
    """(f, f', f'') of a scalar function at ``x0``."""
    (u,) = variables([x0])
    y = f(u)
    if not isinstance(y, Jet2):
        return float(y), 0.0, 0.0
    return float(y.value), float(y.grad[0]), float(y.hess[0])
