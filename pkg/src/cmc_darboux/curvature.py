"""Finite-difference mean curvature of gridded surfaces in R^3.

Sign convention: the unit sphere with inward normal has ``H = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMetric

# central stencils (offset, weight)
_D1 = {2: [(-1, -0.5), (1, 0.5)], 4: [(-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12)]}
_D2 = {2: [(-1, 1.0), (0, -2.0), (1, 1.0)], 4: [(-2, -1 / 12), (-1, 16 / 12), (0, -30 / 12), (1, 16 / 12), (2, -1 / 12)]}


def _apply(arr, stencil, axis, h, power, periodic):
    out = np.zeros_like(arr)
    for off, w in stencil:
        out = out + w * np.roll(arr, -off, axis=axis)
    out = out / h**power
    if not periodic:
        width = max(abs(o) for o, _ in stencil)
        idx = [slice(None)] * arr.ndim
        idx[axis] = slice(0, width)
        out[tuple(idx)] = np.nan
        idx[axis] = slice(arr.shape[axis] - width, None)
        out[tuple(idx)] = np.nan
    return out


@dataclass
class CurvatureReport:
    H: np.ndarray
    interior: np.ndarray  # boolean mask of vertices with a full stencil

    @property
    def values(self) -> np.ndarray:
        return self.H[self.interior]

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    def max_deviation(self, target: float = 1.0) -> float:
        return float(np.max(np.abs(self.values - target)))

    def summary(self, target: float = 1.0) -> dict:
        v = self.values
        return {"mean": float(v.mean()), "min": float(v.min()), "max": float(v.max()),
                "max_deviation": self.max_deviation(target)}


def mean_curvature(points, hx: float, hy: float, periodic=(False, True), normal=None, order: int = 2) -> CurvatureReport:
    """Mean curvature of a grid ``points`` of shape ``(nx, ny, 3)`` (or imaginary quaternions).

    ``normal`` fixes the orientation; it is only used for its sign relative to
    the finite-difference normal.  Without it the normal is ``fx x fy``.
    """
    P = np.asarray(points, dtype=float)
    if P.shape[-1] == 4:
        P = P[..., 1:]
    if order not in _D1:
        raise ValueError("order must be 2 or 4")
    px, py = periodic
    fx = _apply(P, _D1[order], 0, hx, 1, px)
    fy = _apply(P, _D1[order], 1, hy, 1, py)
    fxx = _apply(P, _D2[order], 0, hx, 2, px)
    fyy = _apply(P, _D2[order], 1, hy, 2, py)
    fxy = _apply(fy, _D1[order], 0, hx, 1, px)
    n = np.cross(fx, fy)
    nn = np.linalg.norm(n, axis=-1)
    interior = np.isfinite(nn) & np.isfinite(fxy).all(axis=-1)
    if np.any(nn[interior] < 1e-14):
        raise DegenerateMetric("finite-difference metric is degenerate")
    n = n / np.where(nn > 0, nn, 1.0)[..., None]
    if normal is not None:
        ref = np.asarray(normal, dtype=float)
        if ref.shape[-1] == 4:
            ref = ref[..., 1:]
        flip = np.sign(np.sum(n * ref, axis=-1))
        n = n * np.where(flip == 0, 1.0, flip)[..., None]
    E = np.sum(fx * fx, axis=-1)
    F = np.sum(fx * fy, axis=-1)
    G = np.sum(fy * fy, axis=-1)
    L = np.sum(fxx * n, axis=-1)
    M = np.sum(fxy * n, axis=-1)
    Nn = np.sum(fyy * n, axis=-1)
    det = E * G - F * F
    if np.any(det[interior] <= 0):
        raise DegenerateMetric("first fundamental form is not positive definite")
    H = (E * Nn - 2 * F * M + G * L) / (2 * det)
    return CurvatureReport(H, interior)


def sphere_grid(n_theta: int = 64, n_phi: int = 128, radius: float = 1.0):
    """Unit-sphere sample grid avoiding the poles; returns points, hx, hy and the inward normal."""
    theta = np.linspace(0.3, np.pi - 0.3, n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    T, P = np.meshgrid(theta, phi, indexing="ij")
    pts = radius * np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1)
    return pts, theta[1] - theta[0], phi[1] - phi[0], -pts / radius
