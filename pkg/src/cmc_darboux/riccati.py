"""Classical Darboux transforms of CMC surfaces via the Riccati equation.

``dT = r T dg T - df`` with ``dg = df + dN`` (the parallel surface
``g = f + N``).  The quantity ``(T - N)^2`` is a first integral and equals
``1/r - 1`` for the transforms considered here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .connection import build
from .darboux import TransformResult, mu_darboux, wedge_residual
from .errors import BlowUp, InvalidR
from .integrate import integrate
from .quaternion import from_pair, qinv, qmul, qnorm, to_pair
from .spectral import SpectralParam, make_param
from .surfaces import ConformalPatch

BLOWUP = 1e8


@dataclass(frozen=True)
class RiccatiSpec:
    r: float
    p0: tuple  # grid indices (i0, j0)
    T0: np.ndarray
    sign: int = 1
    v: tuple = (0.0, 0.0, 1.0)

    @property
    def invariant(self) -> float:
        return 1 / self.r - 1


def init_T(patch: ConformalPatch, p0=(0, 0), r: float = -1.0, sign: int = 1, v=(0.0, 0.0, 1.0)) -> RiccatiSpec:
    """Initial value on the constraint ``(T0 - N)^2 = 1/r - 1``.

    For ``0 < r < 1`` the difference ``T0 - N`` is real (``sign`` picks the
    root); otherwise it is imaginary along the unit direction ``v``.
    """
    r = float(r)
    if r == 0 or r == 1 or not math.isfinite(r):
        raise InvalidR(f"r must be real and not 0 or 1, got {r}")
    i0, j0 = p0
    N0 = patch.N[i0, j0]
    T0 = N0.copy()
    if 0 < r < 1:
        if sign not in (1, -1):
            raise InvalidR("sign must be +1 or -1")
        T0[0] += sign * math.sqrt(1 / r - 1)
    else:
        v = np.asarray(v, dtype=float)
        nv = np.linalg.norm(v)
        if nv == 0:
            raise InvalidR("direction must be nonzero")
        T0[1:] += math.sqrt(1 - 1 / r) * v / nv
    return RiccatiSpec(r, (int(i0), int(j0)), T0, int(sign), tuple(float(t) for t in v))


def mu_for_r(r: float, sign: int = 1, branch: int = -1) -> complex:
    """Spectral value whose transforms match Riccati solutions with parameter ``r``.

    ``a_hat = 1 - 2r``.  Outside ``[0, 1]`` the value is ``a_hat + branch *
    sqrt(a_hat^2 - 1)`` (real); inside it lies on the unit circle with
    ``cot(theta/2) = sign * sqrt(1/r - 1)``.
    """
    ah = 1 - 2 * r
    if 0 < r < 1:
        return complex(ah, 2 * sign * math.sqrt(r * (1 - r)))
    return complex(ah + branch * math.sqrt(ah * ah - 1))


def _rhs_factory(patch, r, direction, fixed, lanes):
    def rhs(t, T):
        if direction == "x":
            d = patch.sample(np.full(lanes, t), fixed)
            df, dN = d["dfx"], d["dNx"]
        else:
            d = patch.sample(fixed, np.full(lanes, t))
            df, dN = d["dfy"], d["dNy"]
        if np.max(np.abs(T)) > BLOWUP:
            raise BlowUp(f"|T| exceeded {BLOWUP:g}")
        return r * qmul(T, qmul(df + dN, T)) - df

    return rhs


def integrate_riccati(patch: ConformalPatch, spec: RiccatiSpec, tol: float = 1e-11) -> TransformResult:
    """Solve the Riccati equation over the grid (column through ``p0`` first, then rows)."""
    r = spec.r
    i0, j0 = spec.p0
    nx, ny = patch.nx, patch.ny
    y0 = patch.y[j0]
    col = np.empty((nx, 4))
    col[i0] = spec.T0
    if i0 < nx - 1:
        col[i0:] = integrate(_rhs_factory(patch, r, "x", np.array([y0]), 1), patch.x[i0:], spec.T0[None], rtol=tol, atol=tol)[:, 0]
    if i0 > 0:
        col[i0::-1] = integrate(_rhs_factory(patch, r, "x", np.array([y0]), 1), patch.x[i0::-1], spec.T0[None], rtol=tol, atol=tol)[:, 0]
    T = np.empty((nx, ny, 4))
    seam = None
    if patch.y_periodic:
        nodes = y0 + patch.hy * np.arange(ny + 1)
        Y = integrate(_rhs_factory(patch, r, "y", patch.x, nx), nodes, col, rtol=tol, atol=tol)
        for k in range(ny):
            T[:, (j0 + k) % ny] = Y[k]
        seam = Y[ny]
    else:
        T[:, j0:] = np.moveaxis(integrate(_rhs_factory(patch, r, "y", patch.x, nx), patch.y[j0:], col, rtol=tol, atol=tol), 0, 1)
        if j0 > 0:
            back = integrate(_rhs_factory(patch, r, "y", patch.x, nx), patch.y[j0::-1], col, rtol=tol, atol=tol)
            T[:, j0::-1] = np.moveaxis(back, 0, 1)
    if np.max(np.abs(T)) > BLOWUP:
        raise BlowUp(f"|T| exceeded {BLOWUP:g}")
    return _result_from_T(patch, spec, T, seam)


def _result_from_T(patch, spec, T, seam):
    r = spec.r
    dgx = patch.dfx + patch.dNx
    dgy = patch.dfy + patch.dNy
    dTx = r * qmul(T, qmul(dgx, T)) - patch.dfx
    dTy = r * qmul(T, qmul(dgy, T)) - patch.dfy
    Ti = qinv(T)
    N = patch.N
    NTi = qmul(N, Ti)
    TNTi = qmul(T, NTi)
    N_hat = -TNTi
    dNh = []
    for dT, dN in ((dTx, patch.dNx), (dTy, patch.dNy)):
        dNh.append(-qmul(dT, NTi) - qmul(T, qmul(dN, Ti)) + qmul(TNTi, qmul(dT, Ti)))
    closed = None
    if seam is not None:
        closed = float(np.max(qnorm(seam - T[:, spec.p0[1]])))
    param = make_param(mu_for_r(r, spec.sign))
    res = TransformResult(patch, param, np.zeros(T.shape[:2] + (2,), dtype=complex), T, dTx, dTy, N_hat,
                          dNh[0], dNh[1], closed, "riccati", None, {"r": r})
    res.notes["constraint_residual"] = constraint_residual(patch, T, r)
    return res


def constraint_residual(patch: ConformalPatch, T, r: float) -> float:
    """``max |(T - N)^2 - (1/r - 1)|`` over the grid."""
    D = T - patch.N
    sq = qmul(D, D)
    sq[..., 0] -= 1 / r - 1
    return float(np.max(qnorm(sq)))


def section_from_T(T0, N0, param: SpectralParam) -> np.ndarray:
    """Pair value of a parallel section reproducing ``T0`` for real ``mu``.

    For real ``mu``, ``2 T^{-1} - N (a - 1) = alpha b alpha^{-1}`` and
    ``b = i beta``; so ``u = alpha i alpha^{-1}`` is known and ``alpha = 1 - u i``
    solves it (``alpha = j`` when ``u = -i``).
    """
    if not param.is_real:
        raise ValueError("section_from_T expects a real spectral value")
    a = param.a.real
    beta = param.b.imag
    B = 2 * qinv(np.asarray(T0, dtype=float)) - (a - 1) * np.asarray(N0, dtype=float)
    u = B / beta
    i_q = np.array([0.0, 1.0, 0.0, 0.0])
    alpha = np.array([1.0, 0.0, 0.0, 0.0]) - qmul(u, i_q)
    if qnorm(alpha) < 1e-8:
        alpha = np.array([0.0, 0.0, 1.0, 0.0])
    return to_pair(alpha)


def match_mu_darboux(patch: ConformalPatch, riccati: TransformResult, spec: RiccatiSpec, tol: float = 1e-11):
    """Best agreement between the Riccati transform and the matching mu-transforms.

    Both members of the reciprocal pair of spectral values are tried.
    Returns ``(distance, mu)``.
    """
    best = (math.inf, None)
    i0, j0 = spec.p0
    for branch in (-1, 1):
        mu = mu_for_r(spec.r, spec.sign, branch)
        param = make_param(mu)
        form = build(patch, param)
        if param.is_unit_circle:
            initial = np.array([1.0, 0.0], dtype=complex)
        else:
            initial = section_from_T(spec.T0, patch.N[i0, j0], param)
        res = mu_darboux(form, initial, basepoint=(i0, j0), tol=tol)
        d = float(np.max(qnorm(res.T - riccati.T)))
        if d < best[0]:
            best = (d, mu)
    return best


def cmc_classical_panel(patch: ConformalPatch, r_values=(-1.0, 2.0, 0.5), v=(0.0, 0.0, 1.0), tol: float = 1e-11) -> list:
    """Integrate, measure mean curvature and classicality, and match each ``r``."""
    rows = []
    for r in r_values:
        row = {"r": float(r)}
        try:
            spec = init_T(patch, (0, 0), r, 1, v)
            res = integrate_riccati(patch, spec, tol)
            row["constraint_residual"] = res.notes["constraint_residual"]
            row["mean_curvature_deviation"] = res.mean_curvature().max_deviation()
            row["wedge_residual"] = wedge_residual(patch.dfx, patch.dfy, res.dfx_hat, res.dfy_hat, res.T)
            dist, mu = match_mu_darboux(patch, res, spec, tol)
            row["match_distance"] = dist
            row["mu"] = [mu.real, mu.imag]
            row["ok"] = True
        except Exception as exc:  # aggregate, do not abort the panel
            row["ok"] = False
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows
