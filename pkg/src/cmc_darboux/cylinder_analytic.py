"""Closed-form parallel sections, monodromy and rigid-motion transforms of the
standard cylinder ``f = (-i x + j e^{iy})/2``.

The general parallel section is::

    alpha = (e^{-iy/2}, p+ e^{iy/2}) m+ e^{w} + (e^{-iy/2}, p- e^{iy/2}) m- e^{-w}

with ``w = wx x + wy y``, ``wx = sqrt2 (a-1)/(4c)``, ``wy = -sqrt2 b/(4c)``
and ``p+- = -(b +- sqrt2 i c)/(a-1)``.  All ``+-`` labels follow the
principal branch of ``c`` chosen in :mod:`spectral`.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import MuOne, OutOfRegime
from .quaternion import qcomplex, qmul
from .spectral import SpectralParam, make_param

SQRT2 = math.sqrt(2.0)


def _checked(param) -> SpectralParam:
    param = make_param(param)
    if param.is_one:
        raise MuOne("mu = 1 has no nontrivial cylinder sections")
    return param


@dataclass(frozen=True)
class CylinderSolution:
    param: SpectralParam
    wx: complex
    wy: complex
    p_plus: complex
    p_minus: complex
    m_plus: complex = 1.0
    m_minus: complex = 0.0

    def __call__(self, x, y):
        """Section values as pair arrays of shape ``(..., 2)``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        w = self.wx * x + self.wy * y
        lo = np.exp(-0.5j * y)
        hi = np.exp(0.5j * y)
        ep = self.m_plus * np.exp(w) if self.m_plus != 0 else 0.0 * w
        em = self.m_minus * np.exp(-w) if self.m_minus != 0 else 0.0 * w
        return np.stack([lo * (ep + em), hi * (self.p_plus * ep + self.p_minus * em)], axis=-1)

    @property
    def product_identity(self) -> complex:
        """``(b^2 + 2(a-1))/(a-1)^2``, which must equal ``p+ p-``."""
        a, b = self.param.a, self.param.b
        return (b * b + 2 * (a - 1)) / (a - 1) ** 2


def solution(param, m_plus=1.0, m_minus=0.0) -> CylinderSolution:
    param = _checked(param)
    a, b, c = param.a, param.b, param.c
    wx = SQRT2 * (a - 1) / (4 * c)
    wy = -SQRT2 * b / (4 * c)
    p_plus = -(b + SQRT2 * 1j * c) / (a - 1)
    p_minus = -(b - SQRT2 * 1j * c) / (a - 1)
    return CylinderSolution(param, wx, wy, p_plus, p_minus, complex(m_plus), complex(m_minus))


def analytic_section(param, which: str = "plus", m_plus=None, m_minus=None) -> CylinderSolution:
    """Closed-form section; ``which`` is ``plus``, ``minus`` or ``mix``."""
    if which == "plus":
        mp, mm = 1.0, 0.0
    elif which == "minus":
        mp, mm = 0.0, 1.0
    elif which == "mix":
        mp = 1.0 if m_plus is None else m_plus
        mm = 1.0 if m_minus is None else m_minus
    else:
        raise ValueError(f"unknown section kind {which!r}")
    return solution(param, mp, mm)


def _basis(sol: CylinderSolution, x, y):
    """Matrix whose columns are the plus and minus sections at ``(x, y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = sol.wx * x + sol.wy * y
    lo, hi = np.exp(-0.5j * y), np.exp(0.5j * y)
    ep, em = np.exp(w), np.exp(-w)
    E = np.empty(np.broadcast(x, y).shape + (2, 2), dtype=complex)
    E[..., 0, 0] = lo * ep
    E[..., 0, 1] = lo * em
    E[..., 1, 0] = sol.p_plus * hi * ep
    E[..., 1, 1] = sol.p_minus * hi * em
    return E


def fundamental_matrix(param, x, y, x0=0.0, y0=0.0):
    """Propagator of the parallel transport equation from ``(x0, y0)`` to ``(x, y)``."""
    sol = solution(param)
    E = _basis(sol, x, y)
    E0 = _basis(sol, x0, y0)
    return E @ np.linalg.inv(E0)


def ode_residual(param, x, y, sol: CylinderSolution | None = None):
    """Residual of a closed-form section in the cylinder's constant-coefficient system."""
    param = _checked(param)
    sol = sol or solution(param)
    a, b = param.a, param.b
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    alpha = sol(x, y)
    e_m, e_p = np.exp(-1j * y), np.exp(1j * y)
    Ox = 0.25j * np.array([[b + 0 * y, e_m * (a - 1)], [e_p * (a - 1), -b + 0 * y]])
    Oy = 0.25j * np.array([[a - 1 + 0 * y, -e_m * b], [-e_p * b, 1 - a + 0 * y]])
    Ox = np.moveaxis(Ox, (0, 1), (-2, -1))
    Oy = np.moveaxis(Oy, (0, 1), (-2, -1))
    # derivatives of the closed form
    w_sec = sol.wx
    lo, hi = np.exp(-0.5j * y), np.exp(0.5j * y)
    w = sol.wx * x + sol.wy * y
    ep = sol.m_plus * np.exp(w)
    em = sol.m_minus * np.exp(-w)
    dx = np.stack([lo * w_sec * (ep - em), hi * w_sec * (sol.p_plus * ep - sol.p_minus * em)], axis=-1)
    dy = np.stack(
        [
            lo * (-0.5j * (ep + em) + sol.wy * (ep - em)),
            hi * (0.5j * (sol.p_plus * ep + sol.p_minus * em) + sol.wy * (sol.p_plus * ep - sol.p_minus * em)),
        ],
        axis=-1,
    )
    rx = dx - np.einsum("...ij,...j->...i", Ox, alpha)
    ry = dy - np.einsum("...ij,...j->...i", Oy, alpha)
    scale = np.maximum(np.abs(alpha).max(axis=-1), 1e-300)
    return np.maximum(np.abs(rx).max(axis=-1), np.abs(ry).max(axis=-1)) / scale


def analytic_monodromy(param):
    """``h+- = -exp(-+ sqrt2 b pi / (2c))``."""
    param = _checked(param)
    e = SQRT2 * param.b * math.pi / (2 * param.c)
    return -cmath.exp(-e), -cmath.exp(e)


@dataclass(frozen=True)
class RigidMotionData:
    T0_plus: complex
    T0_minus: complex
    T1_plus: complex
    T1_minus: complex
    r_plus: float
    r_minus: float
    regime: str

    def T0(self, which):
        return self.T0_plus if which == "plus" else self.T0_minus

    def T1(self, which):
        return self.T1_plus if which == "plus" else self.T1_minus


def _motion_coefficients(param, p):
    a, b = param.a, param.b
    n2 = abs(p) ** 2
    s, d = 1 + n2, 1 - n2
    r = abs(a - 1) ** 2 + abs(b) ** 2 - 4 * ((a - 1) * b.conjugate()).imag * p.imag / s
    T0 = (2 / r) * (b.real - 2 * p.conjugate() ** 2 * 1j * a.imag / s - d / s * 1j * b.imag)
    T1 = (2 / r) * (a.real - 1 + d / s * 1j * a.imag - 2 * p / s * 1j * b.imag)
    return complex(T0), complex(T1), complex(r)


def analytic_rigid_motion(param, which: str = "plus", *, strict: bool = True) -> RigidMotionData:
    """Translation and rotation parts of the closed transforms.

    The general display is evaluated verbatim.  ``regime`` records which
    case of the real/unitary split applies.
    """
    param = _checked(param)
    if param.is_unit_circle:
        regime = "unitary"
    elif param.is_real:
        regime = "translation" if param.a.real > 1 else "rotation"
    else:
        if strict:
            raise OutOfRegime("closed rigid motions are tabulated for real or unitary mu only")
        regime = "general"
    sol = solution(param)
    T0p, T1p, rp = _motion_coefficients(param, sol.p_plus)
    T0m, T1m, rm = _motion_coefficients(param, sol.p_minus)
    return RigidMotionData(T0p, T0m, T1p, T1m, rp.real, rm.real, regime)


def simplified_rigid_motion(param, which: str = "plus") -> tuple[complex, complex]:
    """``(T0, T1)`` from the case split of the real regime."""
    param = _checked(param)
    if not param.is_real:
        raise OutOfRegime("the case split applies to real mu")
    a, b, c = param.a, param.b, param.c
    sign = 1 if which == "plus" else -1
    if a.real > 1:
        return -sign * SQRT2 * 1j / c, 0j
    return 0j, 2 / (a - 1) - sign * SQRT2 * c * 1j * b / (a - 1) ** 2


def rigid_motion_surface(T0: complex, T1: complex, x, y):
    """``f + T0 + j e^{iy} T1`` sampled at ``(x, y)`` as quaternion arrays."""
    from .surfaces import cylinder_sampler

    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    f = cylinder_sampler(x, y)["f"]
    jz = np.zeros(x.shape + (4,))
    jz[..., 2] = 1.0
    rot = qmul(jz, qcomplex(np.exp(1j * y) * T1))
    return f + qcomplex(np.full(x.shape, T0)) + rot
