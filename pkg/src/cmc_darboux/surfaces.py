"""Sampled conformal CMC (H = 1) immersions.

A :class:`ConformalPatch` stores ``f, N, df(d/dx), df(d/dy), dN(d/dx),
dN(d/dy)`` on a rectangular grid.  The orientation convention is pinned by
the standard cylinder: ``df(d/dy) = N df(d/dx) = -df(d/dx) N``.  Equivalently
the Hodge star acts by ``(*w)(d/dx) = w(d/dy)`` and ``(*w)(d/dy) = -w(d/dx)``.

Providers with a closed form (cylinder, Delaunay) also attach an exact
``sampler`` so that integrators can evaluate the geometry between grid
vertices.  Patches without one fall back to cubic spline interpolation.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import RectBivariateSpline

from .errors import IntegrationFailure, InvalidNeck, SchemaViolation
from .quaternion import qmul, qnorm

FIELDS = ("f", "N", "dfx", "dfy", "dNx", "dNy")
FILE_FIELDS = ("f", "N", "dfx", "dfy")
FORMAT_NAME = "cmc-patch"
TWO_PI = 2 * math.pi

ANALYTIC_TOL = 1e-10
NUMERIC_TOL = 1e-6


@dataclass
class ConformalPatch:
    x: np.ndarray
    y: np.ndarray
    f: np.ndarray
    N: np.ndarray
    dfx: np.ndarray
    dfy: np.ndarray
    dNx: np.ndarray
    dNy: np.ndarray
    y_periodic: bool = True
    H_target: float = 1.0
    metadata: dict = field(default_factory=dict)
    sampler: Optional[Callable] = field(default=None, repr=False)
    # (param, x, y) -> fundamental matrix of the parallel transport equation
    fundamental: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        shape = (len(self.x), len(self.y), 4)
        for name in FIELDS:
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise SchemaViolation(f"field {name} has shape {arr.shape}, expected {shape}")
            setattr(self, name, arr)
        self._interp = None

    @property
    def nx(self) -> int:
        return len(self.x)

    @property
    def ny(self) -> int:
        return len(self.y)

    @property
    def X(self) -> float:
        return float(self.x[-1] - self.x[0])

    @property
    def hx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def hy(self) -> float:
        return float(self.y[1] - self.y[0])

    @property
    def conformal_factor(self) -> np.ndarray:
        return qnorm(self.dfx)

    @property
    def is_analytic(self) -> bool:
        return self.sampler is not None

    def grid_fields(self) -> dict:
        return {name: getattr(self, name) for name in FIELDS}

    def sample(self, x, y) -> dict:
        """Geometry at arbitrary points (exact when a sampler is attached)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.sampler is not None:
            return self.sampler(x, y)
        if self._interp is None:
            self._interp = _GridInterpolant(self)
        return self._interp(x, y)


def uniform_y(ny: int) -> np.ndarray:
    return TWO_PI * np.arange(ny) / ny


def _check_grid(nx, ny):
    if nx < 2 or ny < 2:
        raise ValueError("grid needs at least 2 samples per direction")
    if ny % 2:
        raise ValueError("ny must be even so that y = 0 and y = pi are grid lines")


def patch_from_sampler(sampler, x, y, *, y_periodic=True, metadata=None, fundamental=None):
    xx, yy = np.meshgrid(x, y, indexing="ij")
    data = sampler(xx, yy)
    return ConformalPatch(
        x=x, y=y, **{k: data[k] for k in FIELDS}, y_periodic=y_periodic,
        metadata=dict(metadata or {}), sampler=sampler, fundamental=fundamental,
    )


# --------------------------------------------------------------------------
# cylinder


def cylinder_sampler(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    cy, sy = np.cos(y), np.sin(y)
    zero = np.zeros_like(x)
    half = np.full_like(x, 0.5)
    return {
        "f": np.stack([zero, -x / 2, cy / 2, -sy / 2], axis=-1),
        "N": np.stack([zero, zero, -cy, sy], axis=-1),
        "dfx": np.stack([zero, -half, zero, zero], axis=-1),
        "dfy": np.stack([zero, zero, -sy / 2, -cy / 2], axis=-1),
        "dNx": np.zeros(x.shape + (4,)),
        "dNy": np.stack([zero, zero, sy, cy], axis=-1),
    }


def cylinder(nx: int = 64, ny: int = 256, X: float = TWO_PI, x0: float = 0.0) -> ConformalPatch:
    """The standard cylinder ``f = (-i x + j e^{iy})/2`` of radius 1/2 about the i-axis."""
    _check_grid(nx, ny)
    from .cylinder_analytic import fundamental_matrix

    x = np.linspace(x0, x0 + X, nx)
    return patch_from_sampler(
        cylinder_sampler, x, uniform_y(ny),
        metadata={"provider": "cylinder", "X": X, "x0": x0, "scale": 1.0},
        fundamental=fundamental_matrix,
    )


# --------------------------------------------------------------------------
# Delaunay surfaces


class DelaunayProfile:
    """Profile ``(h(x), rho(x))`` of a conformally parametrized Delaunay surface.

    The surface is ``f = -i h(x) + j e^{iy} rho(x)``.  Conformality reads
    ``h'^2 + rho'^2 = rho^2`` and H = 1 gives ``h' = tau + rho^2`` together
    with ``rho'' = rho (1 - 2 tau - 2 rho^2)``.  ``tau`` is the flux constant:
    ``tau = 1/4`` is the cylinder, ``0 < tau < 1/4`` unduloids, ``tau < 0``
    nodoids.  ``x = 0`` is a neck.
    """

    def __init__(self, kind: str, neck: float, x_lo: float, x_hi: float):
        if kind == "unduloid":
            if not 0 < neck <= 0.5:
                raise InvalidNeck(f"unduloid neck radius must lie in (0, 1/2], got {neck}")
            tau = neck - neck * neck
        elif kind == "nodoid":
            if not neck > 0:
                raise InvalidNeck(f"nodoid neck radius must be positive, got {neck}")
            tau = -neck - neck * neck
        else:
            raise ValueError(f"unknown Delaunay kind {kind!r}")
        self.kind, self.neck, self.tau = kind, float(neck), float(tau)
        self._pieces = []
        y0 = [neck, 0.0, 0.0]
        for end in (x_hi, x_lo):
            if end == 0.0:
                continue
            sol = solve_ivp(
                self._rhs, (0.0, end), y0, method="DOP853", rtol=1e-13, atol=1e-14, dense_output=True
            )
            if not sol.success:
                raise IntegrationFailure(f"profile integration failed: {sol.message}")
            self._pieces.append((min(0.0, end), max(0.0, end), sol.sol))

    def _rhs(self, _, s):
        rho, drho, _h = s
        return [drho, rho * (1 - 2 * self.tau - 2 * rho * rho), self.tau + rho * rho]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty((3,) + x.shape)
        done = np.zeros(x.shape, dtype=bool)
        for lo, hi, sol in self._pieces:
            sel = (x >= lo - 1e-12) & (x <= hi + 1e-12) & ~done
            if np.any(sel):
                out[:, sel] = sol(x[sel])
                done |= sel
        if not np.all(done):
            raise ValueError("profile evaluated outside its integration range")
        rho, drho, h = out
        return rho, drho, h

    def first_integral_drift(self, x) -> float:
        rho, drho, _ = self(x)
        return float(np.max(np.abs(drho**2 - rho**2 + (self.tau + rho**2) ** 2)))


def delaunay_sampler(profile: DelaunayProfile):
    tau = profile.tau

    def sampler(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        rho, drho, h = profile(x)
        dh = tau + rho * rho
        ddrho = rho * (1 - 2 * tau - 2 * rho * rho)
        ddh = 2 * rho * drho
        cy, sy = np.cos(y), np.sin(y)
        zero = np.zeros_like(x)
        n1 = -drho / rho
        n2 = -dh / rho
        dn1 = -(ddrho * rho - drho * drho) / rho**2
        dn2 = -(ddh * rho - dh * drho) / rho**2
        return {
            "f": np.stack([zero, -h, rho * cy, -rho * sy], axis=-1),
            "N": np.stack([zero, n1, n2 * cy, -n2 * sy], axis=-1),
            "dfx": np.stack([zero, -dh, drho * cy, -drho * sy], axis=-1),
            "dfy": np.stack([zero, zero, -rho * sy, -rho * cy], axis=-1),
            "dNx": np.stack([zero, dn1, dn2 * cy, -dn2 * sy], axis=-1),
            "dNy": np.stack([zero, zero, -n2 * sy, -n2 * cy], axis=-1),
        }

    return sampler


def delaunay(kind: str, neck: float, nx: int = 64, ny: int = 256, X: float = TWO_PI, x0: float = 0.0) -> ConformalPatch:
    """Unduloid or nodoid with neck radius ``neck``, revolving about the i-axis."""
    _check_grid(nx, ny)
    profile = DelaunayProfile(kind, neck, x0, x0 + X)
    x = np.linspace(x0, x0 + X, nx)
    meta = {"provider": kind, "neck": float(neck), "tau": profile.tau, "X": X, "x0": x0, "scale": 1.0}
    patch = patch_from_sampler(delaunay_sampler(profile), x, uniform_y(ny), metadata=meta)
    patch.metadata["profile_drift"] = profile.first_integral_drift(x)
    return patch


# --------------------------------------------------------------------------
# derived surfaces


def parallel_surface(patch: ConformalPatch) -> ConformalPatch:
    """``g = f + N`` with Gauss map ``-N``; ``dg = df + dN``."""

    def convert(d):
        return {
            "f": d["f"] + d["N"], "N": -d["N"],
            "dfx": d["dfx"] + d["dNx"], "dfy": d["dfy"] + d["dNy"],
            "dNx": -d["dNx"], "dNy": -d["dNy"],
        }

    sampler = None
    if patch.sampler is not None:
        source = patch.sampler

        def sampler(x, y):
            return convert(source(x, y))

    meta = dict(patch.metadata, parallel_of_source=True)
    return ConformalPatch(
        x=patch.x.copy(), y=patch.y.copy(), **convert(patch.grid_fields()),
        y_periodic=patch.y_periodic, metadata=meta, sampler=sampler,
    )


def wedge(omega_x, omega_y, eta_x, eta_y):
    """Quaternion-valued ``(omega ^ eta)(d/dx, d/dy)``."""
    return qmul(omega_x, eta_y) - qmul(omega_y, eta_x)


# --------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    residuals: dict
    tolerance: float
    fd_consistency: float
    fd_note: str = "central differences of f against stored df; second order, not gated"

    @property
    def ok(self) -> bool:
        return all(v <= self.tolerance for v in self.residuals.values())

    @property
    def failures(self) -> list:
        return [k for k, v in self.residuals.items() if v > self.tolerance]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "tolerance": self.tolerance, "residuals": dict(self.residuals),
                "fd_consistency": self.fd_consistency}


def type_10_part(omega_x, omega_y, N):
    """``(w)' = (w - N*w)/2`` as its values on d/dx and d/dy."""
    return 0.5 * (omega_x - qmul(N, omega_y)), 0.5 * (omega_y + qmul(N, omega_x))


def fd_consistency(patch: ConformalPatch) -> float:
    f = patch.f
    dx = (f[2:, :] - f[:-2, :]) / (2 * patch.hx)
    rx = qnorm(dx - patch.dfx[1:-1, :])
    if patch.y_periodic:
        dy = (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) / (2 * patch.hy)
        ry = qnorm(dy - patch.dfy)
    else:
        dy = (f[:, 2:] - f[:, :-2]) / (2 * patch.hy)
        ry = qnorm(dy - patch.dfy[:, 1:-1])
    scale = float(np.max(qnorm(patch.dfx)))
    return float(max(rx.max(), ry.max()) / scale)


def validate(patch: ConformalPatch, tolerance: Optional[float] = None) -> ValidationReport:
    if tolerance is None:
        tolerance = ANALYTIC_TOL if patch.metadata.get("provider") == "cylinder" else NUMERIC_TOL
    N, dfx, dfy = patch.N, patch.dfx, patch.dfy
    lam = qnorm(dfx)
    lam2 = lam * lam
    unit = np.maximum(np.abs(qnorm(N) - 1), np.abs(N[..., 0]))
    conf = np.maximum(np.abs(lam - qnorm(dfy)), np.abs(np.sum(dfx * dfy, axis=-1))) / lam2
    star_left = qnorm(dfy - qmul(N, dfx)) / lam
    star_right = qnorm(dfy + qmul(dfx, N)) / lam
    dn10x, dn10y = type_10_part(patch.dNx, patch.dNy, N)
    mean_curv = np.maximum(qnorm(dn10x + patch.H_target * dfx), qnorm(dn10y + patch.H_target * dfy)) / lam
    residuals = {
        "unit_normal": float(unit.max()),
        "conformality": float(conf.max()),
        "star_left": float(star_left.max()),
        "star_right": float(star_right.max()),
        "mean_curvature": float(mean_curv.max()),
    }
    return ValidationReport(residuals, tolerance, fd_consistency(patch))


# --------------------------------------------------------------------------
# interpolation for grid-only patches


class _GridInterpolant:
    def __init__(self, patch: ConformalPatch):
        self.periodic = patch.y_periodic
        x, y = patch.x, patch.y
        if self.periodic:
            pad = 4
            y_ext = np.concatenate([y[-pad:] - TWO_PI, y, y[:pad] + TWO_PI])
        else:
            y_ext = y
        kx = min(3, len(x) - 1)
        self.splines = {}
        for name in FIELDS:
            arr = getattr(patch, name)
            if self.periodic:
                arr = np.concatenate([arr[:, -pad:], arr, arr[:, :pad]], axis=1)
            self.splines[name] = [RectBivariateSpline(x, y_ext, arr[..., c], kx=kx, ky=3) for c in range(4)]

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        if self.periodic:
            y = np.mod(y, TWO_PI)
        out = {}
        for name, comps in self.splines.items():
            out[name] = np.stack([s.ev(x, y) for s in comps], axis=-1)
        return out


def derivatives_from_grid(x, y, values, y_periodic=True):
    """Spline derivatives of a gridded quaternion field along x and y."""
    from scipy.interpolate import CubicSpline

    dx = CubicSpline(x, values, axis=0)(x, 1)
    if y_periodic:
        y_ext = np.append(y, y[0] + TWO_PI)
        v_ext = np.concatenate([values, values[:, :1]], axis=1)
        dy = CubicSpline(y_ext, v_ext, axis=1, bc_type="periodic")(y, 1)
    else:
        dy = CubicSpline(y, values, axis=1)(y, 1)
    return dx, dy


# --------------------------------------------------------------------------
# file format


def export_patch(patch: ConformalPatch, path) -> None:
    header = {
        "format": FORMAT_NAME,
        "version": 1,
        "nx": patch.nx,
        "ny": patch.ny,
        "x_range": [float(patch.x[0]), float(patch.x[-1])],
        "y_range": [0.0, TWO_PI],
        "y_periodic": bool(patch.y_periodic),
        "fields": list(FILE_FIELDS),
        "provenance": {k: v for k, v in patch.metadata.items() if _jsonable(v)},
    }
    rows = np.concatenate([getattr(patch, name) for name in FILE_FIELDS], axis=-1).reshape(-1, 16)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for row in rows:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def _jsonable(v) -> bool:
    try:
        json.dumps(v)
    except TypeError:
        return False
    return True


def import_patch(path, normal_tol: float = NUMERIC_TOL) -> ConformalPatch:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise exc
    lines = text.splitlines()
    if not lines:
        raise SchemaViolation("empty patch file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"bad header: {exc}") from exc
    for key in ("format", "nx", "ny", "x_range", "y_periodic"):
        if key not in header:
            raise SchemaViolation(f"header missing {key!r}")
    if header["format"] != FORMAT_NAME:
        raise SchemaViolation(f"unknown format {header['format']!r}")
    nx, ny = int(header["nx"]), int(header["ny"])
    periodic = bool(header["y_periodic"])
    if nx < 2 or ny < 2:
        raise SchemaViolation("grid too small")
    if periodic and ny % 2:
        raise SchemaViolation("a y-periodic patch needs an even ny")
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != nx * ny:
        raise SchemaViolation(f"expected {nx * ny} records, found {len(body)}")
    try:
        data = np.array([[float(t) for t in ln.split()] for ln in body])
    except ValueError as exc:
        raise SchemaViolation(f"non-numeric record: {exc}") from exc
    if data.shape != (nx * ny, 16):
        raise SchemaViolation("each record must hold 16 values")
    if not np.all(np.isfinite(data)):
        raise SchemaViolation("non-finite value in patch")
    data = data.reshape(nx, ny, 16)
    fields = {name: data[..., 4 * i:4 * i + 4] for i, name in enumerate(FILE_FIELDS)}
    N = fields["N"]
    if np.max(np.abs(qnorm(N) - 1)) > normal_tol or np.max(np.abs(N[..., 0])) > normal_tol:
        raise SchemaViolation("normal field is not unit imaginary")
    x0, x1 = header["x_range"]
    x = np.linspace(x0, x1, nx)
    y = uniform_y(ny) if periodic else np.linspace(*header.get("y_range", [0.0, TWO_PI]), ny)
    dNx, dNy = derivatives_from_grid(x, y, N, periodic)
    meta = dict(header.get("provenance", {}), imported_from=str(path))
    return ConformalPatch(x=x, y=y, **fields, dNx=dNx, dNy=dNy, y_periodic=periodic, metadata=meta)
