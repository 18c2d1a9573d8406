"""mu-Darboux transforms ``f_hat = f + T`` from parallel sections.

Pointwise, with ``X = N alpha (a-1) + alpha b`` (complex scalars acting on
the right), the transform is ``T = 2 alpha X^{-1}``.  ``T`` does not change
when ``alpha`` is multiplied on the right by a complex number, so only the
complex line of ``alpha`` matters.  Derivatives of ``T`` are computed in
closed form from ``d alpha = Omega alpha``; nothing is finite differenced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .connection import ConnectionForm, build, omega_from_geometry
from .curvature import CurvatureReport, mean_curvature
from .errors import (
    ConformalityLoss, MuOne, NearSingularT, NonDiagonalizable, NotClosed, NotImmersed,
)
from .holonomy import (
    DEFAULT_TOL, HolonomyData, analyse, transport_x_batch, transport_y_batch,
)
from .quaternion import from_pair, qcomplex, qinv, qmul, qnorm
from .spectral import SpectralParam, make_param
from .surfaces import ConformalPatch, validate, wedge

TWO_PI = 2 * math.pi
SINGULAR_TOL = 1e-12
CLOSED_TOL = 1e-6
ITERATE_TOL = 1e-4


# --------------------------------------------------------------------------
# pointwise algebra


def transform_fields(alpha, geom: dict, param: SpectralParam, dalpha_x=None, dalpha_y=None) -> dict:
    """``T``, its derivatives and the new normal from section values.

    ``alpha`` is a pair array ``(..., 2)``; ``geom`` holds ``N, dNx, dNy`` (and
    ``dfx, dfy`` when the derivatives of ``alpha`` are not supplied).
    """
    a, b = param.a, param.b
    A1 = qcomplex(a - 1)
    B = qcomplex(b)
    N = geom["N"]
    if dalpha_x is None:
        dalpha_x = np.einsum("...ij,...j->...i", omega_from_geometry(N, geom["dfx"], a, b), alpha)
    if dalpha_y is None:
        dalpha_y = np.einsum("...ij,...j->...i", omega_from_geometry(N, geom["dfy"], a, b), alpha)
    al = from_pair(alpha)
    X = qmul(N, qmul(al, A1)) + qmul(al, B)
    ratio = qnorm(X) / np.maximum(qnorm(al), 1e-300)
    if np.any(ratio < SINGULAR_TOL):
        raise NearSingularT("the inverted quantity is numerically zero")
    Xi = qinv(X)
    T = 2 * qmul(al, Xi)
    Ti = qinv(T)
    out = {"T": T}
    NTi = qmul(N, Ti)
    TNTi = qmul(T, NTi)
    out["N_hat"] = -TNTi
    for name, dal, dN in (("x", dalpha_x, geom["dNx"]), ("y", dalpha_y, geom["dNy"])):
        da = from_pair(dal)
        dX = qmul(dN, qmul(al, A1)) + qmul(N, qmul(da, A1)) + qmul(da, B)
        dT = 2 * qmul(da, Xi) - 2 * qmul(qmul(al, Xi), qmul(dX, Xi))
        out["dT" + name] = dT
        out["dN_hat" + name] = (
            -qmul(dT, NTi) - qmul(T, qmul(dN, Ti)) + qmul(TNTi, qmul(dT, Ti))
        )
    return out


def wedge_residual(dfx, dfy, dfsx, dfsy, T) -> float:
    """Normalized ``eta ^ df`` with ``eta = T^{-1} df_sharp T^{-1}``.

    Both orderings of the wedge are evaluated and the larger is reported.
    The normalization ``|df||df_sharp|/|T|^2`` makes the value scale free.
    """
    Ti = qinv(T)
    ex = qmul(Ti, qmul(dfsx, Ti))
    ey = qmul(Ti, qmul(dfsy, Ti))
    scale = qnorm(dfx) * qnorm(dfsx) / qnorm(T) ** 2
    w1 = qnorm(wedge(ex, ey, dfx, dfy))
    w2 = qnorm(wedge(dfx, dfy, ex, ey))
    return float(np.max(np.maximum(w1, w2) / scale))


# --------------------------------------------------------------------------
# result type


@dataclass
class TransformResult:
    source: ConformalPatch
    param: SpectralParam
    alpha: np.ndarray
    T: np.ndarray
    dTx: np.ndarray
    dTy: np.ndarray
    N_hat: np.ndarray
    dN_hatx: np.ndarray
    dN_haty: np.ndarray
    closedness: Optional[float] = None
    which: str = "initial"
    section_sampler: Optional[Callable] = field(default=None, repr=False)
    notes: dict = field(default_factory=dict)
    _curvature: Optional[CurvatureReport] = field(default=None, repr=False)

    @property
    def mu(self) -> complex:
        return self.param.mu

    @property
    def f_hat(self) -> np.ndarray:
        return self.source.f + self.T

    @property
    def dfx_hat(self) -> np.ndarray:
        return self.source.dfx + self.dTx

    @property
    def dfy_hat(self) -> np.ndarray:
        return self.source.dfy + self.dTy

    @property
    def real_part(self) -> np.ndarray:
        return self.f_hat[..., 0]

    @property
    def real_mean(self) -> float:
        return float(np.mean(self.real_part))

    @property
    def real_spread(self) -> float:
        r = self.real_part
        return float(r.max() - r.min())

    @property
    def im_f_hat(self) -> np.ndarray:
        g = self.f_hat.copy()
        g[..., 0] = 0.0
        return g

    @property
    def normal_sign(self) -> int:
        """Orientation making ``d f_hat(d/dy) = s N_hat d f_hat(d/dx)``."""
        lhs = self.dfy_hat
        plus = np.max(qnorm(lhs - qmul(self.N_hat, self.dfx_hat)))
        minus = np.max(qnorm(lhs + qmul(self.N_hat, self.dfx_hat)))
        return 1 if plus <= minus else -1

    def mean_curvature(self, order: int = 2) -> CurvatureReport:
        if self._curvature is None or order != 2:
            rep = mean_curvature(
                self.im_f_hat, self.source.hx, self.source.hy,
                periodic=(False, self.source.y_periodic and self.is_closed), normal=self.N_hat, order=order,
            )
            if order != 2:
                return rep
            self._curvature = rep
        return self._curvature

    def exact_mean_curvature(self) -> np.ndarray:
        """Pointwise mean curvature from the closed-form derivatives of ``f_hat`` and ``N_hat``."""
        s = self.normal_sign
        ip = lambda p, q: np.sum(p * q, axis=-1)  # noqa: E731
        num = ip(self.dN_hatx, self.dfx_hat) + ip(self.dN_haty, self.dfy_hat)
        den = ip(self.dfx_hat, self.dfx_hat) + ip(self.dfy_hat, self.dfy_hat)
        return -s * num / den

    @property
    def is_closed(self) -> bool:
        return self.closedness is not None and self.closedness <= CLOSED_TOL

    def wedge_residual(self) -> float:
        return wedge_residual(self.source.dfx, self.source.dfy, self.dfx_hat, self.dfy_hat, self.T)

    def normal_residual(self) -> float:
        return float(np.max(np.maximum(np.abs(qnorm(self.N_hat) - 1), np.abs(self.N_hat[..., 0]))))

    def summary(self) -> dict:
        curv = self.mean_curvature()
        return {
            "mu": [self.mu.real, self.mu.imag],
            "which": self.which,
            "real_part_mean": self.real_mean,
            "real_part_spread": self.real_spread,
            "normal_residual": self.normal_residual(),
            "normal_sign": self.normal_sign,
            "mean_curvature": curv.summary(),
            "exact_mean_curvature_deviation": float(np.max(np.abs(self.exact_mean_curvature() - 1))),
            "wedge_residual": self.wedge_residual(),
            "closedness": self.closedness,
            "closed": self.is_closed,
            **{k: v for k, v in self.notes.items() if isinstance(v, (int, float, str, bool, list))},
        }


def _assemble(form: ConnectionForm, alpha, closedness=None, which="initial", section_sampler=None, notes=None):
    patch = form.patch
    geom = patch.grid_fields()
    dax = np.einsum("...ij,...j->...i", form.Ox, alpha)
    day = np.einsum("...ij,...j->...i", form.Oy, alpha)
    out = transform_fields(alpha, geom, form.param, dax, day)
    return TransformResult(
        patch, form.param, alpha, out["T"], out["dTx"], out["dTy"], out["N_hat"],
        out["dN_hatx"], out["dN_haty"], closedness, which, section_sampler, dict(notes or {}),
    )


# --------------------------------------------------------------------------
# sweeps


def _y_nodes(patch: ConformalPatch, j0: int):
    """Integration nodes along y from ``y[j0]`` covering every grid line.

    Returns ``(nodes, index)`` for the forward sweep; on periodic patches the
    final node is ``y[j0] + 2 pi`` and maps to index ``-1`` (the seam copy).
    """
    ny = patch.ny
    y0 = patch.y[j0]
    if patch.y_periodic:
        nodes = y0 + patch.hy * np.arange(ny + 1)
        index = [(j0 + k) % ny for k in range(ny)] + [-1]
        return nodes, index
    return patch.y[j0:], list(range(j0, ny))


def _row_sweep(form: ConnectionForm, j0: int, tol: float):
    """Fundamental matrices along y for every row ``x_i`` starting at ``y[j0]``.

    Returns ``(Phi, seam)`` with ``Phi[i, j]`` mapping values at ``(x_i, y[j0])``
    to ``(x_i, y[j])`` and ``seam[i]`` the map to ``y[j0] + 2 pi`` (or None).
    """
    patch = form.patch
    p = form.param
    nodes, index = _y_nodes(patch, j0)
    Y = transport_y_batch(patch, p.a, p.b, patch.x, nodes, tol)
    Phi = np.empty((patch.nx, patch.ny, 2, 2), dtype=complex)
    seam = None
    for k, j in enumerate(index):
        if j == -1:
            seam = Y[k]
        else:
            Phi[:, j] = Y[k]
    if not patch.y_periodic and j0 > 0:
        back = transport_y_batch(patch, p.a, p.b, patch.x, patch.y[j0::-1], tol)
        for k, j in enumerate(range(j0, -1, -1)):
            Phi[:, j] = back[k]
    return Phi, seam


def _column_sweep(form: ConnectionForm, i0: int, j0: int, initial, tol: float):
    """Transport ``initial`` along ``y = y[j0]`` to every ``x_i``."""
    patch = form.patch
    p = form.param
    y0 = patch.y[j0]
    col = np.empty((patch.nx, 2), dtype=complex)
    col[i0] = initial
    init = np.asarray(initial, dtype=complex)[None, :, None]
    if i0 < patch.nx - 1:
        fw = transport_x_batch(patch, p.a, p.b, y0, patch.x[i0:], tol, initial=init)
        col[i0:] = fw[:, 0, :, 0]
    if i0 > 0:
        bw = transport_x_batch(patch, p.a, p.b, y0, patch.x[i0::-1], tol, initial=init)
        col[i0::-1] = bw[:, 0, :, 0]
    return col


def _closedness(form, col, seam, alpha, j0, factor=None):
    """Mismatch of ``T`` between ``y0`` and ``y0 + 2 pi``."""
    if seam is None:
        return None
    patch = form.patch
    end = np.einsum("nij,nj->ni", seam, col)
    geom0 = {k: v[:, j0] for k, v in patch.grid_fields().items()}
    T0 = transform_fields(alpha[:, j0], geom0, form.param)["T"]
    T1 = transform_fields(end, geom0, form.param)["T"]
    return float(np.max(qnorm(T1 - T0)))


def _check_mu(form):
    if form.param.is_one:
        raise MuOne("mu = 1: the transform is the point at infinity")


def _grid_index(patch, basepoint):
    if basepoint is None:
        return 0, 0
    i0, j0 = basepoint
    return int(i0), int(j0)


def mu_darboux(form: ConnectionForm, initial, basepoint=None, tol: float = DEFAULT_TOL,
               order: str = "xy") -> TransformResult:
    """Transform from the parallel section with value ``initial`` at ``basepoint``.

    ``basepoint`` is a pair of grid indices ``(i0, j0)``.  With ``order="xy"``
    the section is carried along the column ``y = y[j0]`` first and then
    along every row; ``order="yx"`` does the opposite (a flatness cross-check).
    """
    _check_mu(form)
    initial = np.asarray(initial, dtype=complex)
    if not np.any(initial):
        raise ValueError("initial value must be nonzero")
    patch = form.patch
    i0, j0 = _grid_index(patch, basepoint)
    if order == "yx":
        return _mu_darboux_yx(form, initial, i0, j0, tol)
    col = _column_sweep(form, i0, j0, initial, tol)
    Phi, seam = _row_sweep(form, j0, tol)
    alpha = np.einsum("nmij,nj->nmi", Phi, col)
    closed = _closedness(form, col, seam, alpha, j0)
    sampler = _section_sampler(form, initial, patch.x[i0], patch.y[j0])
    return _assemble(form, alpha, closed, "initial", sampler, notes={"basepoint": [i0, j0]})


def _mu_darboux_yx(form, initial, i0, j0, tol):
    patch = form.patch
    p = form.param
    nodes, index = _y_nodes(patch, j0)
    Y = transport_y_batch(patch, p.a, p.b, patch.x[i0], nodes, tol, initial=initial[None, :, None])
    row = np.empty((patch.ny, 2), dtype=complex)
    for k, j in enumerate(index):
        if j != -1:
            row[j] = Y[k, 0, :, 0]
    alpha = np.empty((patch.nx, patch.ny, 2), dtype=complex)
    init = row[:, :, None]
    ys = patch.y
    if i0 < patch.nx - 1:
        fw = transport_x_batch(patch, p.a, p.b, ys, patch.x[i0:], tol, initial=init)
        alpha[i0:] = np.moveaxis(fw[..., 0], 0, 0)
    if i0 > 0:
        bw = transport_x_batch(patch, p.a, p.b, ys, patch.x[i0::-1], tol, initial=init)
        alpha[i0::-1] = bw[..., 0]
    alpha[i0] = row
    return _assemble(form, alpha, None, "initial", notes={"basepoint": [i0, j0], "order": "yx"})


# --------------------------------------------------------------------------
# closed transforms


def _resonance_basis(form: ConnectionForm, x0: float, tol: float, delta: float = 1e-4):
    """Eigenvectors of ``dH/dmu`` at a point where ``H`` is scalar.

    They span the same two lines as the analytic continuation of the two
    eigen-branches through the resonance.
    """
    patch = form.patch
    mu = form.param.mu
    params = [make_param(mu * (1 + delta)), make_param(mu * (1 - delta))]
    a = np.array([q.a for q in params])
    b = np.array([q.b for q in params])
    Y = transport_y_batch(patch, a, b, np.full(2, x0), [0.0, TWO_PI], tol)[-1]
    D = (Y[0] - Y[1]) / (2 * delta * mu)
    data = analyse(D, mu, x0, unimodular=False)
    if data.degenerate:
        raise NonDiagonalizable("derivative of the holonomy is degenerate at the resonance")
    return data.v_plus, data.v_minus


def closed_mu_darboux(form: ConnectionForm, which: str = "plus", m=(1.0, 1.0), tol: float = DEFAULT_TOL,
                      closed_tol: float = CLOSED_TOL, basepoint=None) -> TransformResult:
    """Closed transform from a holonomy eigen-section.

    ``which`` is ``plus``, ``minus`` or ``mix``; ``mix`` needs a scalar
    holonomy (resonance) and combines the two branches with weights ``m``.
    For ``plus``/``minus`` every row uses the eigenvector of its own
    holonomy, which avoids amplifying the other branch along ``x``.
    """
    _check_mu(form)
    patch = form.patch
    if not patch.y_periodic:
        raise ValueError("closed transforms need a y-periodic patch")
    i0, j0 = basepoint if basepoint is not None else (patch.nx // 2 if which == "mix" else 0, 0)
    Phi, seam = _row_sweep(form, j0, tol)
    base = analyse(seam[i0], form.param.mu, patch.x[i0], patch.y[j0])
    notes = {"h_plus": [base.h_plus.real, base.h_plus.imag], "h_minus": [base.h_minus.real, base.h_minus.imag],
             "basepoint": [i0, j0], "full_eigenspace": bool(base.full_eigenspace)}
    if which in ("plus", "minus") and not base.degenerate:
        target = base.h_plus if which == "plus" else base.h_minus
        other = base.h_minus if which == "plus" else base.h_plus
        col = np.empty((patch.nx, 2), dtype=complex)
        for i in range(patch.nx):
            row = analyse(seam[i], form.param.mu, patch.x[i], reference=(target, other))
            if row.degenerate:
                raise NonDiagonalizable(f"holonomy degenerate on row {i}")
            col[i] = row.v_plus
        alpha = np.einsum("nmij,nj->nmi", Phi, col)
        closed = _closedness(form, col, seam, alpha, j0)
        initial = col[i0]
    else:
        if base.degenerate and not base.full_eigenspace:
            raise NonDiagonalizable("holonomy is a Jordan block at this mu")
        if base.full_eigenspace:
            vp, vm = _resonance_basis(form, patch.x[i0], tol)
        else:
            if which == "mix":
                raise ValueError("mix needs a resonance point (scalar holonomy)")
            vp, vm = base.v_plus, base.v_minus
        mp, mm = m
        if which == "plus":
            mp, mm = 1.0, 0.0
        elif which == "minus":
            mp, mm = 0.0, 1.0
        initial = mp * vp + mm * vm
        col = _column_sweep(form, i0, j0, initial, tol)
        alpha = np.einsum("nmij,nj->nmi", Phi, col)
        closed = _closedness(form, col, seam, alpha, j0)
    sampler = _section_sampler(form, initial, patch.x[i0], patch.y[j0])
    res = _assemble(form, alpha, closed, which, sampler, notes)
    if closed is None or closed > closed_tol:
        raise NotClosed(f"closedness residual {closed:.3e} exceeds {closed_tol:.1e}", res)
    return res


def _section_sampler(form: ConnectionForm, initial, x0, y0):
    """Exact evaluator of the section when the patch has a closed-form propagator."""
    fund = form.patch.fundamental
    if fund is None:
        return None
    param = form.param
    v = np.asarray(initial, dtype=complex)

    def sampler(x, y):
        P = fund(param, x, y, x0, y0)
        return np.einsum("...ij,j->...i", P, v)

    return sampler


# --------------------------------------------------------------------------
# iteration


def iterate(result: TransformResult, tol: float = ITERATE_TOL) -> ConformalPatch:
    """The transformed surface as a new patch, ready for another transform.

    The transform is conformal in the source coordinates, so no
    reparametrization is needed; the conformality and mean curvature
    relations are checked and must hold to ``tol``.
    """
    if not result.is_closed:
        raise ConformalityLoss("only closed transforms can be iterated")
    lam = qnorm(result.dfx_hat)
    if np.min(lam) < 1e-10:
        raise NotImmersed("transform is not immersed")
    sign = result.normal_sign
    shift = result.real_mean

    def convert(f_hat, N_hat, dfx, dfy, dNx, dNy):
        f = f_hat.copy()
        f[..., 0] -= shift
        return {"f": f, "N": sign * N_hat, "dfx": dfx, "dfy": dfy, "dNx": sign * dNx, "dNy": sign * dNy}

    data = convert(result.f_hat, result.N_hat, result.dfx_hat, result.dfy_hat, result.dN_hatx, result.dN_haty)
    sampler = None
    if result.section_sampler is not None and result.source.sampler is not None:
        src, sec, param = result.source.sampler, result.section_sampler, result.param

        def sampler(x, y):
            x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
            g = src(x, y)
            out = transform_fields(sec(x, y), g, param)
            return convert(g["f"] + out["T"], out["N_hat"], g["dfx"] + out["dTx"], g["dfy"] + out["dTy"],
                           out["dN_hatx"], out["dN_haty"])

    base = result.source
    meta = {"provider": "iterated", "mu": [result.mu.real, result.mu.imag], "which": result.which,
            "source": base.metadata.get("provider"), "normal_sign": sign}
    patch = ConformalPatch(x=base.x.copy(), y=base.y.copy(), **data, y_periodic=base.y_periodic,
                           metadata=meta, sampler=sampler)
    report = validate(patch, tolerance=tol)
    if not report.ok:
        raise ConformalityLoss(f"iterated patch fails validation: {report.failures}")
    patch.metadata["validation"] = report.residuals
    return patch


# --------------------------------------------------------------------------
# limits at the ends of the spectral plane


@dataclass
class LimitReport:
    mus: list
    distances: list
    ratio_errors: list
    monotone: bool

    def to_dict(self) -> dict:
        return {"mu": [[m.real, m.imag] for m in self.mus], "distance": self.distances,
                "ratio_error": self.ratio_errors, "monotone": self.monotone}


def source_distance(result: TransformResult) -> float:
    """``max |Im f_hat - f|`` after removing the constant real part."""
    d = result.im_f_hat - result.source.f
    d[..., 0] = 0.0
    return float(np.max(qnorm(d)))


def limit_to_source(patch: ConformalPatch, mus=(1e2, 1e3, 1e4), which: str = "plus", tol: float = 1e-10) -> LimitReport:
    """Distances of closed transforms to the source along a ray of spectral values."""
    dist, ratio_err = [], []
    mus = [complex(m) for m in mus]
    for mu in mus:
        form = build(patch, mu)
        res = closed_mu_darboux(form, which, tol=tol)
        dist.append(source_distance(res))
        ratio_err.append(analyse_eigenline(res))
    order = np.argsort([abs(math.log(abs(m))) for m in mus])
    ds = [dist[k] for k in order]
    monotone = all(ds[k + 1] < ds[k] for k in range(len(ds) - 1))
    return LimitReport(mus, dist, ratio_err, monotone)


def analyse_eigenline(res: TransformResult) -> float:
    """Largest chordal distance between the section's line and the limit line.

    Towards ``mu -> infinity`` the limit line has ratio ``i e^{iy}``; towards
    ``mu -> 0`` it is the image of that line under right multiplication by j.
    """
    from .quaternion import right_j

    y = res.source.y[None, :]
    limit = np.stack([np.ones_like(y * 1j), 1j * np.exp(1j * y)], axis=-1)
    limit = np.broadcast_to(limit, res.alpha.shape)
    if abs(res.mu) < 1:
        limit = right_j(limit)
    u = res.alpha / np.linalg.norm(res.alpha, axis=-1, keepdims=True)
    v = limit / np.linalg.norm(limit, axis=-1, keepdims=True)
    det = np.abs(u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0])
    return float(np.max(det))
