"""Forward-mode dual numbers with perturbation tags.

Every call to :func:`new_tag` opens a fresh infinitesimal direction.  Binary
operations split both operands with respect to the largest tag present, so a
derivative taken inside another derivative never confuses the two
perturbations.  The value and tangent slots may themselves hold duals of
smaller tags, which gives exact higher derivatives by nesting.
"""

from __future__ import annotations

import itertools
import math
from numbers import Real

import numpy as np

_tag_counter = itertools.count(1)


def new_tag() -> int:
    return next(_tag_counter)


class Dual:
    __slots__ = ("tag", "val", "eps")
    __array_ufunc__ = None

    def __init__(self, tag: int, val, eps):
        self.tag = tag
        self.val = val
        self.eps = eps

    def __repr__(self) -> str:
        return f"Dual(tag={self.tag}, val={self.val!r}, eps={self.eps!r})"

    def __float__(self) -> float:
        return real_part(self)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if type(other) in _PLAIN:
            return Dual(self.tag, self.val + other, self.eps)
        if type(other) is Dual and other.tag == self.tag:
            return make(self.tag, self.val + other.val, self.eps + other.eps)
        if not _is_number(other):
            return NotImplemented
        t = _top_tag(self, other)
        a0, a1 = split(self, t)
        b0, b1 = split(other, t)
        return make(t, a0 + b0, a1 + b1)

    __radd__ = __add__

    def __sub__(self, other):
        if not _is_number(other):
            return NotImplemented
        t = _top_tag(self, other)
        a0, a1 = split(self, t)
        b0, b1 = split(other, t)
        return make(t, a0 - b0, a1 - b1)

    def __rsub__(self, other):
        if not _is_number(other):
            return NotImplemented
        return make(self.tag, other - self.val, -self.eps)

    def __mul__(self, other):
        if type(other) in _PLAIN:
            return make(self.tag, self.val * other, self.eps * other)
        if type(other) is Dual and other.tag == self.tag:
            return make(self.tag, self.val * other.val, self.val * other.eps + self.eps * other.val)
        if not _is_number(other):
            return NotImplemented
        t = _top_tag(self, other)
        a0, a1 = split(self, t)
        b0, b1 = split(other, t)
        return make(t, a0 * b0, a0 * b1 + a1 * b0)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not _is_number(other):
            return NotImplemented
        t = _top_tag(self, other)
        a0, a1 = split(self, t)
        b0, b1 = split(other, t)
        v = a0 / b0
        return make(t, v, (a1 - v * b1) / b0)

    def __rtruediv__(self, other):
        if not _is_number(other):
            return NotImplemented
        v = other / self.val
        return make(self.tag, v, -v * self.eps / self.val)

    def __neg__(self):
        return Dual(self.tag, -self.val, -self.eps)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if real_part(self) < 0 else self

    def __pow__(self, other):
        if isinstance(other, Dual):
            return exp(other * log(self))
        if not _is_number(other):
            return NotImplemented
        if other == 0:
            return 1.0
        return make(self.tag, self.val**other, other * self.val ** (other - 1) * self.eps)

    def __rpow__(self, other):
        if not _is_number(other):
            return NotImplemented
        return exp(self * math.log(other))

    # comparisons act on the real part ---------------------------------------
    def __lt__(self, other):
        return real_part(self) < real_part(other)

    def __le__(self, other):
        return real_part(self) <= real_part(other)

    def __gt__(self, other):
        return real_part(self) > real_part(other)

    def __ge__(self, other):
        return real_part(self) >= real_part(other)

    # hooks used by numpy object-array ufunc loops
    def sin(self):
        return sin(self)

    def cos(self):
        return cos(self)

    def exp(self):
        return exp(self)

    def log(self):
        return log(self)

    def sqrt(self):
        return sqrt(self)


# exact types that take the scalar fast paths in the arithmetic above
_PLAIN = frozenset({float, int, np.float64})


def _is_number(x) -> bool:
    return type(x) in _PLAIN or type(x) is Dual or isinstance(x, (Dual, Real, np.floating, np.integer))


def _top_tag(a, b) -> int:
    ta = a.tag if isinstance(a, Dual) else 0
    tb = b.tag if isinstance(b, Dual) else 0
    return ta if ta > tb else tb


def split(x, tag: int):
    """Return ``(value, tangent)`` of ``x`` with respect to ``tag``."""
    if isinstance(x, Dual) and x.tag == tag:
        return x.val, x.eps
    return x, 0.0


def make(tag: int, val, eps):
    if not isinstance(eps, Dual) and eps == 0:
        return val
    return Dual(tag, val, eps)


def real_part(x) -> float:
    while isinstance(x, Dual):
        x = x.val
    return float(x)


def tangent(y, tag: int):
    """Tangent of a scalar or array ``y`` along perturbation ``tag``."""
    if isinstance(y, np.ndarray):
        if y.dtype != object:
            return np.zeros(y.shape)
        return pack([tangent(v, tag) for v in y.flat]).reshape(y.shape)
    return y.eps if isinstance(y, Dual) and y.tag == tag else 0.0


def primal(y, tag: int):
    if isinstance(y, np.ndarray):
        if y.dtype != object:
            return y
        return pack([primal(v, tag) for v in y.flat]).reshape(y.shape)
    return y.val if isinstance(y, Dual) and y.tag == tag else y


def pack(values) -> np.ndarray:
    """Build a float array when possible, otherwise an object array."""
    values = list(values)
    if any(isinstance(v, Dual) for v in values):
        out = np.empty(len(values), dtype=object)
        out[:] = values
        return out
    return np.array(values, dtype=float)


def scale(arr, factor) -> np.ndarray:
    """``arr * factor`` that also works when ``factor`` is a Dual."""
    arr = np.asarray(arr)
    if not isinstance(factor, Dual):
        return arr * factor
    out = np.empty(arr.shape, dtype=object)
    out.flat[:] = [a * factor for a in arr.flat]
    return out


def max_tag(arr) -> int:
    if isinstance(arr, np.ndarray):
        if arr.dtype != object:
            return 0
        return max((v.tag for v in arr.flat if isinstance(v, Dual)), default=0)
    return arr.tag if isinstance(arr, Dual) else 0


def real_array(arr) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.dtype != object:
        return arr.astype(float)
    return np.array([real_part(v) for v in arr.flat], dtype=float).reshape(arr.shape)


def combine(tag: int, val, eps):
    """Elementwise ``make`` over two equally shaped arrays."""
    val = np.asarray(val)
    eps = np.asarray(eps)
    return pack([make(tag, v, e) for v, e in zip(val.flat, eps.flat)]).reshape(val.shape)


# elementary functions ---------------------------------------------------------


def _lift(fn):
    def wrapped(x):
        if isinstance(x, np.ndarray) and x.dtype == object:
            return pack([fn(v) for v in x.flat]).reshape(x.shape)
        return fn(x)

    wrapped.__name__ = fn.__name__
    wrapped.__doc__ = fn.__doc__
    return wrapped


@_lift
def sin(x):
    if isinstance(x, Dual):
        return make(x.tag, sin(x.val), cos(x.val) * x.eps)
    return np.sin(x)


@_lift
def cos(x):
    if isinstance(x, Dual):
        return make(x.tag, cos(x.val), -sin(x.val) * x.eps)
    return np.cos(x)


@_lift
def exp(x):
    if isinstance(x, Dual):
        v = exp(x.val)
        return make(x.tag, v, v * x.eps)
    return np.exp(x)


@_lift
def log(x):
    if isinstance(x, Dual):
        return make(x.tag, log(x.val), x.eps / x.val)
    return np.log(x)


@_lift
def sqrt(x):
    if isinstance(x, Dual):
        v = sqrt(x.val)
        return make(x.tag, v, x.eps / (2.0 * v))
    return np.sqrt(x)


@_lift
def arcsin(x):
    if isinstance(x, Dual):
        return make(x.tag, arcsin(x.val), x.eps / sqrt(1.0 - x.val * x.val))
    return np.arcsin(x)


def arctan2(y, x):
    if isinstance(y, Dual) or isinstance(x, Dual):
        t = _top_tag(y, x)
        y0, y1 = split(y, t)
        x0, x1 = split(x, t)
        return make(t, arctan2(y0, x0), (x0 * y1 - y0 * x1) / (x0 * x0 + y0 * y0))
    return np.arctan2(y, x)
