"""Holonomy eigen-data over the spectral plane.

Resonances are located as zeros of the trace-free part ``K`` of the
holonomy: near a simple resonance ``K(mu) ~ (mu - mu_k) K'``, so
``F(mu) = Re <K(mu), K(mu_ref)>`` changes sign and can be bracketed.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import BranchJump
from .holonomy import DEFAULT_TOL, HolonomyData, analyse, holonomy_csv, holonomy_many, transport_y_batch
from .spectral import make_param
from .surfaces import ConformalPatch

TWO_PI = 2 * math.pi
MU_ONE_EXCLUSION = 0.05


def traceless(H):
    H = np.asarray(H, dtype=complex)
    return H - 0.5 * np.trace(H, axis1=-2, axis2=-1)[..., None, None] * np.eye(2)


def _holonomy_matrix(patch, mu, x0, tol):
    p = make_param(mu)
    return transport_y_batch(patch, p.a, p.b, x0, [0.0, TWO_PI], tol)[-1, 0]


def branch_vectors(patch: ConformalPatch, mu, x0=None, tol: float = DEFAULT_TOL, delta: float = 1e-4):
    """Eigenvectors continuing the two branches, also at scalar holonomy."""
    x0 = float(patch.x[0]) if x0 is None else x0
    data = analyse(_holonomy_matrix(patch, mu, x0, tol), mu, x0)
    if not data.degenerate:
        return data.v_plus, data.v_minus
    mu = complex(mu)
    D = (_holonomy_matrix(patch, mu * (1 + delta), x0, tol) - _holonomy_matrix(patch, mu * (1 - delta), x0, tol))
    d = analyse(D / (2 * delta * mu), mu, x0, unimodular=False)
    return d.v_plus, d.v_minus


def coincidence(vp, vm) -> float:
    u = vp / np.linalg.norm(vp)
    w = vm / np.linalg.norm(vm)
    return float(abs(u[0] * w[1] - u[1] * w[0]))


@dataclass
class Resonance:
    mu: float
    h: complex
    coincidence: float
    bracket: tuple

    def to_dict(self) -> dict:
        return {"mu": self.mu, "h": [self.h.real, self.h.imag], "coincidence": self.coincidence,
                "bracket": list(self.bracket)}


@dataclass
class AsymptoticFit:
    end: str
    coefficients: np.ndarray  # shape (2, 3): branch x (leading, constant, next)
    residual: float

    @property
    def leading(self) -> np.ndarray:
        return self.coefficients[:, 0]

    def to_dict(self) -> dict:
        c = self.coefficients
        return {"end": self.end, "residual": self.residual,
                "coefficients": [[[z.real, z.imag] for z in row] for row in c]}


@dataclass
class SpectralScanReport:
    samples: list
    holonomy: list
    resonances: list = field(default_factory=list)
    fits: list = field(default_factory=list)
    reality_residual: Optional[float] = None

    def csv(self) -> str:
        return holonomy_csv(self.holonomy)

    def to_dict(self) -> dict:
        return {
            "samples": len(self.samples),
            "resonances": [r.to_dict() for r in self.resonances],
            "fits": [f.to_dict() for f in self.fits],
            "reality_residual": self.reality_residual,
            "max_det_error": max(abs(h.det - 1) for h in self.holonomy) if self.holonomy else None,
        }

    def json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def scan(patch: ConformalPatch, mu_samples: Sequence, tol: float = DEFAULT_TOL, x0=None,
         exclude_one: float = MU_ONE_EXCLUSION) -> SpectralScanReport:
    """Holonomy at every sample (samples within ``exclude_one`` of 1 are dropped)."""
    mus = [complex(m) for m in mu_samples if abs(complex(m) - 1) >= exclude_one]
    data = holonomy_many(patch, mus, x0, tol)
    return SpectralScanReport(mus, data)


def real_segment(lo: float, hi: float, n: int, geometric: bool = True) -> np.ndarray:
    return np.geomspace(lo, hi, n) if geometric else np.linspace(lo, hi, n)


def ring(radius: float = 1.0, n: int = 32, skip_zero: bool = True) -> np.ndarray:
    k = np.arange(1, n + 1) if skip_zero else np.arange(n)
    return radius * np.exp(2j * np.pi * k / (n + (1 if skip_zero else 0)))


def find_resonances(patch: ConformalPatch, report: SpectralScanReport, tol: float = 1e-12, x0=None,
                    xtol: float = 1e-14) -> list:
    """Refine resonance candidates among the real samples of a scan."""
    x0 = float(patch.x[0]) if x0 is None else x0
    real = sorted((h.mu.real, h) for h in report.holonomy if abs(h.mu.imag) < 1e-14)
    if len(real) < 3:
        return []
    mus = np.array([m for m, _ in real])
    K = np.array([traceless(h.H) for _, h in real])
    size = np.linalg.norm(K.reshape(len(K), -1), axis=1)
    found = []
    for i in range(1, len(mus) - 1):
        if not (size[i] <= size[i - 1] and size[i] <= size[i + 1]):
            continue
        lo, hi = mus[i - 1], mus[i + 1]
        ref = traceless(_holonomy_matrix(patch, lo, x0, tol))

        def F(m):
            return float(np.real(np.sum(traceless(_holonomy_matrix(patch, m, x0, tol)) * np.conj(ref))))

        flo, fhi = F(lo), F(hi)
        if flo * fhi > 0:
            continue
        root = brentq(F, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
        H = _holonomy_matrix(patch, root, x0, tol)
        data = analyse(H, root, x0)
        if not data.degenerate:
            continue
        vp, vm = branch_vectors(patch, root, x0, tol)
        found.append(Resonance(float(root), 0.5 * (data.h_plus + data.h_minus), coincidence(vp, vm), (lo, hi)))
    report.resonances = found
    return found


def _unwrap(logs, previous):
    """Shift ``logs`` by multiples of 2 pi i to be closest to ``previous``."""
    k = np.round((previous.imag - logs.imag) / TWO_PI)
    return logs + 2j * np.pi * k


def _track(patch, zetas, x0, tol):
    """Log-holonomy of both branches along a path of zeta samples."""
    data = holonomy_many(patch, [z * z for z in zetas], x0, tol)
    out = np.empty((2, len(zetas)), dtype=complex)
    first = data[0]
    out[:, 0] = [cmath.log(first.h_plus), cmath.log(first.h_minus)]
    for n in range(1, len(zetas)):
        h = data[n]
        cand = np.array([cmath.log(h.h_plus), cmath.log(h.h_minus)])
        # predict by linear extrapolation; eigenvalues alone cannot pair the
        # branches where they collide (resonances lie on the real ray)
        pred = out[:, n - 1] if n == 1 else 2 * out[:, n - 1] - out[:, n - 2]
        direct = _unwrap(cand, pred)
        swapped = _unwrap(cand[::-1], pred)
        step = direct if np.sum(np.abs(direct - pred)) <= np.sum(np.abs(swapped - pred)) else swapped
        if np.any(np.abs(step - out[:, n - 1]) > math.pi / 2):
            raise BranchJump(f"log-holonomy jumps between samples {n - 1} and {n}")
        out[:, n] = step
    return out


def fit_asymptotics(patch: ConformalPatch, zeta_samples, end: str = "infinity", tol: float = 1e-12, x0=None) -> AsymptoticFit:
    """Least-squares fit of ``log h`` for both branches.

    At ``end="infinity"`` the basis is ``(zeta, 1, 1/zeta)``; at ``end="zero"``
    it is ``(1/zeta, 1, zeta)``.  Samples are taken in the given order and
    must be close enough for unwrapping.
    """
    z = np.asarray(zeta_samples, dtype=complex)
    logs = _track(patch, z, x0, tol)
    if end == "infinity":
        A = np.stack([z, np.ones_like(z), 1 / z], axis=1)
    elif end == "zero":
        A = np.stack([1 / z, np.ones_like(z), z], axis=1)
    else:
        raise ValueError("end must be 'infinity' or 'zero'")
    coef = np.empty((2, 3), dtype=complex)
    resid = 0.0
    for k in range(2):
        sol, *_ = np.linalg.lstsq(A, logs[k], rcond=None)
        coef[k] = sol
        resid = max(resid, float(np.max(np.abs(A @ sol - logs[k]))))
    return AsymptoticFit(end, coef, resid)


def set_distance(p, q) -> float:
    p1, p2 = p
    q1, q2 = q
    return min(max(abs(p1 - q1), abs(p2 - q2)), max(abs(p1 - q2), abs(p2 - q1)))


def reality_involution_check(report: SpectralScanReport, match_tol: float = 1e-12) -> float:
    """Worst mismatch between eigenvalues at ``1/conj(mu)`` and conjugated eigenvalues at ``mu``."""
    worst = 0.0
    by_mu = report.holonomy
    for h in by_mu:
        partner = 1 / h.mu.conjugate()
        for g in by_mu:
            if abs(g.mu - partner) <= match_tol * max(1.0, abs(partner)):
                scale = max(1.0, abs(h.h_plus), abs(h.h_minus))
                d = set_distance(g.eigenvalues, (h.h_plus.conjugate(), h.h_minus.conjugate())) / scale
                worst = max(worst, d)
                break
    report.reality_residual = worst
    return worst


def closed_under_reality(mus) -> list:
    """The sample set together with all reality partners, without duplicates."""
    out = []
    for m in mus:
        for v in (complex(m), 1 / complex(m).conjugate()):
            if not any(abs(v - w) <= 1e-14 * max(1.0, abs(v)) for w in out):
                out.append(v)
    return out


PLOT_SCRIPT = '''"""Plot multipliers and eigenline coincidence from a spectral scan CSV."""
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv_name}"
rows = list(csv.DictReader(open(path, newline="")))
mu = [complex(float(r["mu_re"]), float(r["mu_im"])) for r in rows]
hp = [complex(float(r["h_plus_re"]), float(r["h_plus_im"])) for r in rows]
hm = [complex(float(r["h_minus_re"]), float(r["h_minus_im"])) for r in rows]
co = [float(r["coincidence"]) for r in rows]

fig, ax = plt.subplots(1, 3, figsize=(14, 4))
ax[0].scatter([m.real for m in mu], [m.imag for m in mu], c=co, s=12)
ax[0].set_title("samples (colour: eigenline coincidence)")
ax[1].plot([h.real for h in hp], [h.imag for h in hp], ".", label="h+")
ax[1].plot([h.real for h in hm], [h.imag for h in hm], ".", label="h-")
ax[1].set_aspect("equal")
ax[1].legend()
ax[1].set_title("multipliers")
ax[2].semilogy([abs(m) for m in mu], [abs(a - b) + 1e-17 for a, b in zip(hp, hm)], ".")
ax[2].set_xscale("log")
ax[2].set_title("|h+ - h-| against |mu|")
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=120)
'''


def plot_script(csv_name: str = "scan.csv") -> str:
    return PLOT_SCRIPT.replace("{csv_name}", csv_name)
