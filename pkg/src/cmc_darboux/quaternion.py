"""Quaternion arithmetic and the complex-pair representation.

Quaternions are stored as real arrays of shape ``(..., 4)`` holding the
coefficients of ``1, i, j, k``.  The scalar :class:`Quaternion` class wraps a
single value for the public API; the array functions do the heavy lifting.

Pair convention
---------------
Every quaternion is written uniquely as ``q = a0 + j a1`` with ``a0, a1`` in
``C = span{1, i}``.  Since ``j i = -k`` we get, for ``q = w + x i + y j + z k``::

    a0 = w + x i,    a1 = y - z i

Right multiplication by a complex scalar acts diagonally on ``(a0, a1)``, so
the pair is a vector in C^2 with complex structure "right multiplication by
i", and left multiplication by a quaternion is a complex 2x2 matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroQuaternion

ZERO_EPS = 1e-300


# --------------------------------------------------------------------------
# array kernels


def qmul(p, q):
    """Hamilton product of quaternion arrays (broadcasting)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def qconj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm2(q):
    q = np.asarray(q, dtype=float)
    return np.sum(q * q, axis=-1)


def qnorm(q):
    return np.sqrt(qnorm2(q))


def qinv(q, eps=ZERO_EPS):
    """Inverse ``conj(q)/|q|^2``; raises :class:`ZeroQuaternion` on zero entries."""
    n2 = qnorm2(q)
    if np.any(np.sqrt(n2) < eps):
        raise ZeroQuaternion("cannot invert a zero quaternion")
    return qconj(q) / n2[..., None]


def qreal(c):
    """Embed real scalars as quaternions."""
    c = np.asarray(c, dtype=float)
    out = np.zeros(c.shape + (4,))
    out[..., 0] = c
    return out


def qcomplex(z):
    """Embed complex scalars ``u + v i`` as quaternions."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape + (4,))
    out[..., 0] = z.real
    out[..., 1] = z.imag
    return out


def imag3(q):
    """Imaginary part as an ``(..., 3)`` vector."""
    return np.asarray(q, dtype=float)[..., 1:]


def from_imag3(v):
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (4,))
    out[..., 1:] = v
    return out


def to_pair(q):
    """Quaternion array ``(..., 4)`` -> complex pair array ``(..., 2)``."""
    q = np.asarray(q, dtype=float)
    out = np.empty(q.shape[:-1] + (2,), dtype=complex)
    out[..., 0] = q[..., 0] + 1j * q[..., 1]
    out[..., 1] = q[..., 2] - 1j * q[..., 3]
    return out


def from_pair(p):
    """Complex pair array ``(..., 2)`` -> quaternion array ``(..., 4)``."""
    p = np.asarray(p, dtype=complex)
    return np.stack([p[..., 0].real, p[..., 0].imag, p[..., 1].real, -p[..., 1].imag], axis=-1)


def left_mul_matrix(q):
    """Complex matrices ``M`` with ``to_pair(q * a) == M @ to_pair(a)``.

    For ``q = q0 + j q1``: ``M = [[q0, -conj(q1)], [q1, conj(q0)]]``.
    """
    p = to_pair(q)
    q0, q1 = p[..., 0], p[..., 1]
    m = np.empty(p.shape[:-1] + (2, 2), dtype=complex)
    m[..., 0, 0] = q0
    m[..., 0, 1] = -np.conj(q1)
    m[..., 1, 0] = q1
    m[..., 1, 1] = np.conj(q0)
    return m


def right_mul_complex(p, z):
    """Right multiplication of a pair by complex scalars: diagonal action."""
    return np.asarray(p, dtype=complex) * np.asarray(z, dtype=complex)[..., None]


def right_j(p):
    """Right multiplication by ``j``: ``(a0 + j a1) j = -conj(a1) + j conj(a0)``."""
    p = np.asarray(p, dtype=complex)
    return np.stack([-np.conj(p[..., 1]), np.conj(p[..., 0])], axis=-1)


# --------------------------------------------------------------------------
# scalar value types


@dataclass(frozen=True)
class Quaternion:
    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @classmethod
    def from_complex(cls, z: complex) -> "Quaternion":
        z = complex(z)
        return cls(z.real, z.imag, 0.0, 0.0)

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def _coerce(self, other) -> "Quaternion":
        if isinstance(other, Quaternion):
            return other
        if isinstance(other, complex):
            return Quaternion.from_complex(other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Quaternion(float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Quaternion.from_array(self.to_array() + other.to_array())

    __radd__ = __add__

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Quaternion.from_array(qmul(self.to_array(), other.to_array()))

    def __rmul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion.from_array(self.to_array() / other)
        return self * self._coerce(other).inverse()

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return float(np.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2))

    def inverse(self) -> "Quaternion":
        return Quaternion.from_array(qinv(self.to_array()))

    @property
    def real(self) -> float:
        return self.w

    @property
    def imag(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def isclose(self, other, tol: float = 1e-12) -> bool:
        return float(np.max(np.abs(self.to_array() - self._coerce(other).to_array()))) <= tol


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class ComplexPair:
    """The value ``a0 + j a1`` with complex ``a0, a1``."""

    a0: complex
    a1: complex

    def to_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1], dtype=complex)

    @classmethod
    def from_array(cls, a) -> "ComplexPair":
        return cls(complex(a[0]), complex(a[1]))

    def to_quaternion(self) -> Quaternion:
        return Quaternion.from_array(from_pair(self.to_array()))

    def right_mul(self, z: complex) -> "ComplexPair":
        return ComplexPair(self.a0 * z, self.a1 * z)

    def right_j(self) -> "ComplexPair":
        return ComplexPair.from_array(right_j(self.to_array()))


def mul(p: Quaternion, q: Quaternion) -> Quaternion:
    return p * q


def inverse(q: Quaternion) -> Quaternion:
    return q.inverse()


def pair_of(q: Quaternion) -> ComplexPair:
    return ComplexPair.from_array(to_pair(q.to_array()))


def quaternion_of(p: ComplexPair) -> Quaternion:
    return p.to_quaternion()
