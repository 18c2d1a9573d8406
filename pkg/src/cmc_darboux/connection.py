"""The flat family of connections as 2x2 complex matrix-valued 1-forms.

In pair coordinates a parallel section ``alpha`` satisfies
``d alpha / dx = Ox alpha`` and ``d alpha / dy = Oy alpha`` with::

    O_dir = -1/2 M(df(d/dir)) ((a - 1) M(N) + b)

where ``M`` is the left multiplication matrix and ``a, b`` are complex
scalars acting by right multiplication (i.e. as scalars on pairs).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .integrate import rk4_step
from .quaternion import left_mul_matrix, right_j
from .spectral import SpectralParam, make_param
from .surfaces import ConformalPatch

_EYE = np.eye(2, dtype=complex)


def omega_from_geometry(N, df, a, b):
    """Connection matrix along one direction from pointwise ``N`` and ``df``.

    ``a`` and ``b`` may be scalars or arrays broadcasting against ``N[..., 0]``.
    """
    a = np.asarray(a, dtype=complex)[..., None, None]
    b = np.asarray(b, dtype=complex)[..., None, None]
    inner = (a - 1) * left_mul_matrix(N) + b * _EYE
    return -0.5 * left_mul_matrix(df) @ inner


@dataclass
class ConnectionForm:
    patch: ConformalPatch
    param: SpectralParam
    Ox: np.ndarray = field(init=False, repr=False)
    Oy: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p, q = self.param.a, self.param.b
        self.Ox = omega_from_geometry(self.patch.N, self.patch.dfx, p, q)
        self.Oy = omega_from_geometry(self.patch.N, self.patch.dfy, p, q)

    @property
    def mu(self) -> complex:
        return self.param.mu

    def omega(self, x, y):
        """``(Ox, Oy)`` at arbitrary points."""
        d = self.patch.sample(x, y)
        a, b = self.param.a, self.param.b
        return omega_from_geometry(d["N"], d["dfx"], a, b), omega_from_geometry(d["N"], d["dfy"], a, b)

    def along(self, x, y, dx, dy):
        """Connection matrix contracted with the direction ``(dx, dy)``."""
        ox, oy = self.omega(x, y)
        return np.asarray(dx)[..., None, None] * ox + np.asarray(dy)[..., None, None] * oy


def build(patch: ConformalPatch, param) -> ConnectionForm:
    return ConnectionForm(patch, make_param(param))


def _edge_propagator(form, x0, y0, dx, dy):
    """RK4 propagator of a single straight step from ``(x0, y0)`` by ``(dx, dy)``."""

    def rhs(t, Y):
        return form.along(x0 + t * dx, y0 + t * dy, dx, dy) @ Y

    eye = np.broadcast_to(_EYE, np.shape(x0) + (2, 2)).copy()
    return rk4_step(rhs, 0.0, eye, 1.0)


def plaquette_flatness(form: ConnectionForm, h=None) -> float:
    """Max deviation from identity of the holonomy around the grid cells.

    Each cell edge is traversed with one RK4 step, so the residual measures
    the transport discretization error on a flat connection.  ``h`` overrides
    the cell size (defaults to the grid spacing in each direction).
    """
    patch = form.patch
    hx, hy = (patch.hx, patch.hy) if h is None else (h, h)
    xs = patch.x[:-1] if h is None else np.arange(patch.x[0], patch.x[-1] - hx + 1e-12, hx)
    ys = patch.y if h is None else np.arange(patch.y[0], patch.y[0] + 2 * np.pi - 1e-12, hy)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    X, Y = X.ravel(), Y.ravel()
    zero = np.zeros_like(X)
    # counterclockwise: +x, +y, -x, -y
    P1 = _edge_propagator(form, X, Y, hx + zero, zero)
    P2 = _edge_propagator(form, X + hx, Y, zero, hy + zero)
    P3 = _edge_propagator(form, X + hx, Y + hy, -hx + zero, zero)
    P4 = _edge_propagator(form, X, Y + hy, zero, -hy + zero)
    loop = P4 @ P3 @ P2 @ P1
    return float(np.max(np.abs(loop - _EYE)))


def _transport_segment(form, start, end, initial, rtol=1e-12):
    from .integrate import integrate

    (x0, y0), (x1, y1) = start, end
    dx, dy = x1 - x0, y1 - y0

    def rhs(t, A):
        return form.along(x0 + t * dx, y0 + t * dy, dx, dy) @ A

    v = np.asarray(initial, dtype=complex)[None, :, None]
    return integrate(rhs, [0.0, 1.0], v, rtol=rtol, atol=1e-14)[-1, 0, :, 0]


def reality_check(patch: ConformalPatch, mu, n_samples: int = 8, seed: int = 0) -> float:
    """Deviation from the reality symmetry between ``mu`` and ``1/conj(mu)``.

    Two checks are combined: the pointwise identity ``O'(v j) = (O v) j`` on
    sampled vertices and directions, and the same identity for transport
    along a path through the patch.
    """
    param = make_param(mu)
    form = build(patch, param)
    partner = build(patch, param.reality_partner())
    rng = np.random.default_rng(seed)
    ix = rng.integers(0, patch.nx, n_samples)
    iy = rng.integers(0, patch.ny, n_samples)
    v = rng.normal(size=(n_samples, 2)) + 1j * rng.normal(size=(n_samples, 2))
    worst = 0.0
    for O, Op in ((form.Ox, partner.Ox), (form.Oy, partner.Oy)):
        lhs = np.einsum("nij,nj->ni", Op[ix, iy], right_j(v))
        rhs = right_j(np.einsum("nij,nj->ni", O[ix, iy], v))
        scale = max(1.0, float(np.max(np.abs(rhs))))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))) / scale)
    # transport along an L-shaped path
    xm = float(patch.x[0] + 0.5 * patch.X)
    path = [(float(patch.x[0]), 0.0), (xm, 0.0), (xm, 2.0)]
    for vec in v[:2]:
        a, b = vec, right_j(vec)
        for s, e in zip(path[:-1], path[1:]):
            a = _transport_segment(form, s, e, a)
            b = _transport_segment(partner, s, e, b)
        target = right_j(a)
        worst = max(worst, float(np.max(np.abs(b - target)) / max(1.0, np.max(np.abs(target)))))
    return worst
