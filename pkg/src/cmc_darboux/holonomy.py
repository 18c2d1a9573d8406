"""Parallel transport, holonomy around the periodic direction, eigen-data."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .connection import ConnectionForm, omega_from_geometry
from .errors import NonDiagonalizable
from .integrate import integrate
from .spectral import SpectralParam, make_param
from .surfaces import ConformalPatch

TWO_PI = 2 * math.pi
DEGENERACY_TOL = 1e-8
FULL_EIGENSPACE_TOL = 1e-6
DEFAULT_TOL = 1e-10


@dataclass
class SectionState:
    x: float
    y: float
    value: np.ndarray  # pair (2,)


def transport(form: ConnectionForm, path: Sequence[tuple], initial, tol: float = DEFAULT_TOL) -> SectionState:
    """Transport ``initial`` along the polyline ``path``."""
    value = np.asarray(initial, dtype=complex)
    if not np.any(value):
        raise ValueError("initial value must be nonzero")
    for (x0, y0), (x1, y1) in zip(path[:-1], path[1:]):
        dx, dy = x1 - x0, y1 - y0

        def rhs(t, A, x0=x0, y0=y0, dx=dx, dy=dy):
            return form.along(x0 + t * dx, y0 + t * dy, dx, dy) @ A

        value = integrate(rhs, [0.0, 1.0], value[None, :, None], rtol=tol, atol=tol * 1e-3)[-1, 0, :, 0]
    x_end, y_end = path[-1]
    return SectionState(float(x_end), float(y_end), value)


def transport_y_batch(patch: ConformalPatch, a, b, x, y_nodes, tol: float = DEFAULT_TOL, initial=None):
    """Fundamental solutions along ``y`` for a batch of lanes.

    Lane ``l`` uses spectral scalars ``(a[l], b[l])`` at abscissa ``x[l]``.
    Returns an array ``(len(y_nodes), lanes, 2, 2)``.
    """
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lanes = max(len(a), len(x))
    a = np.broadcast_to(a, (lanes,))
    b = np.broadcast_to(b, (lanes,))
    x = np.broadcast_to(x, (lanes,))

    def rhs(t, Y):
        d = patch.sample(x, np.full(lanes, t))
        return omega_from_geometry(d["N"], d["dfy"], a, b) @ Y

    if initial is None:
        initial = np.broadcast_to(np.eye(2, dtype=complex), (lanes, 2, 2))
    return integrate(rhs, y_nodes, initial, rtol=tol, atol=tol * 1e-3)


def transport_x_batch(patch: ConformalPatch, a, b, y, x_nodes, tol: float = DEFAULT_TOL, initial=None):
    """Fundamental solutions along ``x`` at fixed ``y`` (one lane per entry)."""
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    lanes = max(len(a), len(y))
    a = np.broadcast_to(a, (lanes,))
    b = np.broadcast_to(b, (lanes,))
    y = np.broadcast_to(y, (lanes,))

    def rhs(t, Y):
        d = patch.sample(np.full(lanes, t), y)
        return omega_from_geometry(d["N"], d["dfx"], a, b) @ Y

    if initial is None:
        initial = np.broadcast_to(np.eye(2, dtype=complex), (lanes, 2, 2))
    return integrate(rhs, x_nodes, initial, rtol=tol, atol=tol * 1e-3)


def _normalize(v):
    v = np.asarray(v, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    return v / v[k]


def _ratio(v) -> complex:
    v = _normalize(v)
    if v[0] == 0:
        return complex(math.inf, 0.0)
    return complex(v[1] / v[0])


@dataclass
class HolonomyData:
    mu: complex
    x0: float
    H: np.ndarray
    h_plus: complex
    h_minus: complex
    v_plus: Optional[np.ndarray]
    v_minus: Optional[np.ndarray]
    degenerate: bool
    diagonalizable: bool
    full_eigenspace: bool = False
    y0: float = 0.0

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.H))

    @property
    def rho_plus(self) -> complex:
        return _ratio(self.v_plus) if self.v_plus is not None else complex("nan")

    @property
    def rho_minus(self) -> complex:
        return _ratio(self.v_minus) if self.v_minus is not None else complex("nan")

    @property
    def eigenvalues(self) -> tuple:
        return self.h_plus, self.h_minus

    @property
    def coincidence(self) -> float:
        """``|det(v+, v-)|`` for unit eigenvectors: zero iff the eigenlines agree."""
        if self.v_plus is None or self.v_minus is None:
            return float("nan")
        u = self.v_plus / np.linalg.norm(self.v_plus)
        w = self.v_minus / np.linalg.norm(self.v_minus)
        return float(abs(u[0] * w[1] - u[1] * w[0]))

    def eigenvector(self, which: str) -> np.ndarray:
        v = self.v_plus if which == "plus" else self.v_minus
        if v is None:
            raise NonDiagonalizable("no eigenvector available")
        return v

    def row(self) -> dict:
        return {
            "mu_re": self.mu.real, "mu_im": self.mu.imag,
            "h_plus_re": self.h_plus.real, "h_plus_im": self.h_plus.imag,
            "h_minus_re": self.h_minus.real, "h_minus_im": self.h_minus.imag,
            "rho_plus_re": self.rho_plus.real, "rho_plus_im": self.rho_plus.imag,
            "rho_minus_re": self.rho_minus.real, "rho_minus_im": self.rho_minus.imag,
            "coincidence": self.coincidence,
            "degenerate": int(self.degenerate), "diagonalizable": int(self.diagonalizable),
        }


def _order(h1, h2):
    """Deterministic labelling: larger modulus first, then larger argument."""
    key = lambda h: (round(abs(h), 12), math.atan2(h.imag, h.real))  # noqa: E731
    return (h1, h2) if key(h1) >= key(h2) else (h2, h1)


def analyse(H, mu=0j, x0=0.0, y0=0.0, reference: Optional[tuple] = None, unimodular: bool = True) -> HolonomyData:
    """Eigen-decompose a holonomy matrix.

    ``reference`` optionally supplies ``(h+, h-)`` to label the eigenvalues
    by proximity instead of the default ordering.  Pass ``unimodular=False``
    for matrices that are not holonomies (e.g. derivatives in ``mu``).
    """
    H = np.asarray(H, dtype=complex)
    tr = H[0, 0] + H[1, 1]
    # equals tr^2 - 4 det but without cancellation for near-scalar H
    disc = np.sqrt((H[0, 0] - H[1, 1]) ** 2 + 4 * H[0, 1] * H[1, 0] + 0j)
    h1, h2 = (tr + disc) / 2, (tr - disc) / 2
    # the connection is trace-free, so det H = 1 exactly; the smaller root is
    # the reciprocal of the larger one (the numeric det cancels badly when
    # the entries of H are large)
    if unimodular:
        if abs(h1) >= abs(h2) and h1 != 0:
            h2 = 1 / h1
        elif h2 != 0:
            h1 = 1 / h2
    h1, h2 = complex(h1), complex(h2)
    if reference is not None:
        rp, rm = reference
        if abs(h1 - rp) + abs(h2 - rm) > abs(h2 - rp) + abs(h1 - rm):
            h1, h2 = h2, h1
        hp, hm = h1, h2
    else:
        hp, hm = _order(h1, h2)
    degenerate = abs(hp - hm) < DEGENERACY_TOL * max(1.0, abs(hp))
    if degenerate:
        h = 0.5 * (hp + hm)
        full = float(np.max(np.abs(H - h * np.eye(2)))) < FULL_EIGENSPACE_TOL * max(1.0, abs(h))
        return HolonomyData(complex(mu), x0, H, hp, hm, None, None, True, full, full, y0)
    vp = _eigvec(H, hp)
    vm = _eigvec(H, hm)
    return HolonomyData(complex(mu), x0, H, hp, hm, vp, vm, False, True, False, y0)


def _eigvec(H, h):
    """Kernel vector of ``H - h`` from the better-conditioned row."""
    A = H - h * np.eye(2)
    r0, r1 = A[0], A[1]
    row = r0 if np.abs(r0).max() >= np.abs(r1).max() else r1
    if np.abs(row).max() == 0:
        return np.array([1.0 + 0j, 0.0])
    v = np.array([-row[1], row[0]], dtype=complex)
    return _normalize(v)


def holonomy_y(form: ConnectionForm, x0: Optional[float] = None, tol: float = DEFAULT_TOL, y0: float = 0.0) -> HolonomyData:
    """Holonomy of the loop ``y -> y + 2 pi`` at fixed ``x0``."""
    patch = form.patch
    if not patch.y_periodic:
        raise ValueError("holonomy needs a y-periodic patch")
    if x0 is None:
        x0 = float(patch.x[0])
    param = form.param
    Y = transport_y_batch(patch, param.a, param.b, x0, [y0, y0 + TWO_PI], tol)
    return analyse(Y[-1, 0], param.mu, x0, y0)


def holonomy_many(patch: ConformalPatch, mus, x0: Optional[float] = None, tol: float = DEFAULT_TOL,
                  chunk: int = 64) -> list[HolonomyData]:
    """Holonomies for many spectral values, integrated as lanes of one system."""
    if x0 is None:
        x0 = float(patch.x[0])
    params = [make_param(m) for m in mus]
    out = []
    for start in range(0, len(params), chunk):
        block = params[start:start + chunk]
        a = np.array([p.a for p in block])
        b = np.array([p.b for p in block])
        Y = transport_y_batch(patch, a, b, np.full(len(block), x0), [0.0, TWO_PI], tol)[-1]
        out.extend(analyse(Y[i], block[i].mu, x0) for i in range(len(block)))
    return out


def eigen_ratios(H) -> tuple:
    """Eigenvector ratios ``alpha1/alpha0``; ``("full_eigenspace",)`` for scalar H."""
    data = H if isinstance(H, HolonomyData) else analyse(H)
    if data.degenerate:
        if data.full_eigenspace:
            return ("full_eigenspace",)
        raise NonDiagonalizable("holonomy is a Jordan block")
    return data.rho_plus, data.rho_minus


CSV_COLUMNS = [
    "mu_re", "mu_im", "h_plus_re", "h_plus_im", "h_minus_re", "h_minus_im",
    "rho_plus_re", "rho_plus_im", "rho_minus_re", "rho_minus_im",
    "coincidence", "degenerate", "diagonalizable",
]


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def holonomy_csv(rows: Sequence[HolonomyData], extra: Optional[Sequence[dict]] = None) -> str:
    buf = io.StringIO()
    columns = list(CSV_COLUMNS)
    if extra:
        columns += [k for k in extra[0] if k not in columns]
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for i, h in enumerate(rows):
        rec = h.row()
        if extra:
            rec.update(extra[i])
        writer.writerow([_fmt(rec[c]) if not isinstance(rec[c], str) else rec[c] for c in columns])
    return buf.getvalue()
