"""Vectorized forward-mode dual numbers.

A :class:`Dual` carries a value array of shape ``(...)`` and a tangent array of
shape ``(..., m)``, i.e. ``m`` directional derivatives propagated at once.
The elementary functions below accept plain floats/arrays as well, so model
code can be written once and evaluated either way.
"""

from __future__ import annotations

import numpy as np


class Dual:
    __slots__ = ("val", "der")
    __array_priority__ = 1000

    def __init__(self, val, der):
        self.val = np.asarray(val, dtype=float)
        self.der = np.asarray(der, dtype=float)

    @classmethod
    def seed(cls, values, n_dirs=None, offset=0):
        """Independent variables from the last axis of ``values``.

        Returns a list of Duals, one per column of ``values``, whose tangent
        directions are unit vectors ``offset + i`` in an ``n_dirs`` space.
        """
        values = np.asarray(values, dtype=float)
        n = values.shape[-1]
        n_dirs = n if n_dirs is None else n_dirs
        out = []
        for i in range(n):
            der = np.zeros(values.shape[:-1] + (n_dirs,))
            der[..., offset + i] = 1.0
            out.append(cls(values[..., i], der))
        return out

    def _coerce(self, other):
        if isinstance(other, Dual):
            return other
        other = np.asarray(other, dtype=float)
        return Dual(other, np.zeros(other.shape + (self.der.shape[-1],)))

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.der + other.der)
        return Dual(self.val + other, self.der)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.der - other.der)
        return Dual(self.val - other, self.der)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.der)

    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.val * other.val,
                self.der * other.val[..., None] + other.der * self.val[..., None],
            )
        other = np.asarray(other, dtype=float)
        return Dual(self.val * other, self.der * other[..., None])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.val
            val = self.val * inv
            der = (self.der - other.der * val[..., None]) * inv[..., None]
            return Dual(val, der)
        other = np.asarray(other, dtype=float)
        return Dual(self.val / other, self.der / other[..., None])

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, p):
        if isinstance(p, Dual):
            raise TypeError("dual exponent not supported")
        return Dual(self.val**p, self.der * (p * self.val ** (p - 1))[..., None])

    def __repr__(self):
        return f"Dual(val={self.val!r}, der={self.der!r})"


def _chain(x, f, df):
    if isinstance(x, Dual):
        return Dual(f(x.val), x.der * df(x.val)[..., None])
    return f(x)


def sin(x):
    return _chain(x, np.sin, np.cos)


def cos(x):
    return _chain(x, np.cos, lambda a: -np.sin(a))


def exp(x):
    return _chain(x, np.exp, np.exp)


def log(x):
    return _chain(x, np.log, lambda a: 1.0 / a)


def sqrt(x):
    return _chain(x, np.sqrt, lambda a: 0.5 / np.sqrt(a))


def absolute(x):
    # derivative sign(0) = 0, correct for |s|*s terms at the kink
    return _chain(x, np.abs, np.sign)


def value(x):
    return x.val if isinstance(x, Dual) else np.asarray(x, dtype=float)


def tangent(x, n_dirs):
    if isinstance(x, Dual):
        return x.der
    x = np.asarray(x, dtype=float)
    return np.zeros(x.shape + (n_dirs,))
