"""The spectral parameter mu and the scalars derived from it.

``a = (mu + 1/mu)/2`` and ``b = i (1/mu - mu)/2``.  The operator form of ``b``
is ``(1/mu - mu)/2`` times right multiplication by ``i``; on the complex pair
representation right multiplication by ``i`` is multiplication by the scalar
``i``, so storing the complex number above is the same thing.  With this
reading ``a**2 + b**2 == 1``.

``c`` is the principal square root of ``a - 1``.  Every formula that depends
on ``c`` (the cylinder multipliers and eigenvector slopes) inherits this
branch, which fixes what "plus" and "minus" mean.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .errors import MuZero

UNIT_TOL = 1e-10
REAL_TOL = 1e-10
ONE_TOL = 1e-12


@dataclass(frozen=True)
class SpectralParam:
    mu: complex
    a: complex = field(init=False)
    b: complex = field(init=False)
    c: complex = field(init=False)

    def __post_init__(self):
        mu = complex(self.mu)
        if mu == 0:
            raise MuZero("spectral parameter must be nonzero")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "a", (mu + 1 / mu) / 2)
        object.__setattr__(self, "b", 1j * (1 / mu - mu) / 2)
        object.__setattr__(self, "c", cmath.sqrt(self.a - 1))

    @property
    def is_unit_circle(self) -> bool:
        return abs(abs(self.mu) - 1) < UNIT_TOL

    @property
    def is_real(self) -> bool:
        return abs(self.mu.imag) < REAL_TOL

    @property
    def is_one(self) -> bool:
        return abs(self.mu - 1) < ONE_TOL

    @property
    def zeta(self) -> complex:
        """A square root of mu (principal branch)."""
        return cmath.sqrt(self.mu)

    def reality_partner(self) -> "SpectralParam":
        """The parameter ``1/conj(mu)`` related by right multiplication with j."""
        return SpectralParam(1 / self.mu.conjugate())

    def inverse(self) -> "SpectralParam":
        return SpectralParam(1 / self.mu)


def make_param(mu) -> SpectralParam:
    if isinstance(mu, SpectralParam):
        return mu
    return SpectralParam(complex(mu))


def polar(r: float, theta: float) -> SpectralParam:
    return SpectralParam(cmath.rect(r, theta))


@dataclass(frozen=True)
class ResonancePoint:
    k: int
    mu_k: float

    @property
    def param(self) -> SpectralParam:
        return SpectralParam(self.mu_k)


def resonance_mu(k: int) -> float:
    """``2k^2 - 1 - 2k sqrt(k^2 - 1)``, evaluated without cancellation."""
    if k == 0:
        raise ValueError("k must be nonzero")
    kk = abs(k)
    big = 2 * kk * kk - 1 + 2 * kk * math.sqrt(kk * kk - 1)
    return 1 / big if k > 0 else big


def resonance_points(k_max: int) -> list[ResonancePoint]:
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    return [ResonancePoint(k, resonance_mu(k)) for k in range(2, k_max + 1)]
