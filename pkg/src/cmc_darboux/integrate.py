"""Explicit Runge-Kutta integrators for batched linear and Riccati systems.

The adaptive driver is the Dormand-Prince 5(4) pair.  The state carries a
leading *lane* axis: every lane is an independent trajectory sharing the step
sequence, and error control is relative per lane so lanes of very different
magnitude do not starve each other.  Steps are clipped to land exactly on
the requested output nodes, so no interpolation is involved in the output.
"""
from __future__ import annotations

import numpy as np

from .errors import StepUnderflow

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between the 5th and embedded 4th order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


def _lane_max(a):
    a = np.abs(a)
    return a.reshape(a.shape[0], -1).max(axis=1)


def _dp_step(rhs, t, y, h, k0):
    ks = [k0]
    for s in range(1, 7):
        incr = sum(coef * kk for coef, kk in zip(_A[s], ks) if coef != 0.0)
        ks.append(rhs(t + _C[s] * h, y + h * incr))
    y_new = y + h * sum(bb * kk for bb, kk in zip(_B, ks) if bb != 0.0)
    err = h * sum(ee * kk for ee, kk in zip(_E, ks) if ee != 0.0)
    return y_new, err, ks[6]


def integrate(rhs, nodes, y0, rtol=1e-10, atol=1e-12, h0=None, max_steps=2_000_000, h_max=None):
    """Solve ``y' = rhs(t, y)`` and return ``y`` at every entry of ``nodes``.

    ``nodes`` must be strictly monotone; ``nodes[0]`` is the initial time.
    ``y0`` has shape ``(lanes, ...)``.  The result has shape
    ``(len(nodes), lanes, ...)``.
    """
    nodes = np.asarray(nodes, dtype=float)
    y = np.array(y0, dtype=complex if np.iscomplexobj(y0) else float)
    out = np.empty((len(nodes),) + y.shape, dtype=y.dtype)
    out[0] = y
    if len(nodes) == 1:
        return out
    direction = np.sign(nodes[-1] - nodes[0])
    span = abs(nodes[-1] - nodes[0])
    if np.any(np.diff(nodes) * direction <= 0):
        raise ValueError("nodes must be strictly monotone")
    if h_max is None:
        h_max = span
    t = nodes[0]
    f = rhs(t, y)
    if h0 is None:
        d0 = max(float(np.max(_lane_max(y) / (atol + rtol * _lane_max(y)))), 1e-5)
        d1 = max(float(np.max(_lane_max(f) / (atol + rtol * _lane_max(y)))), 1e-5)
        h0 = min(0.01 * d0 / d1, span)
    h = abs(h0)
    h_min = 1e-14 * max(span, 1.0)
    steps = 0
    for n in range(1, len(nodes)):
        target = nodes[n]
        while (target - t) * direction > 0:
            remaining = abs(target - t)
            step = min(h, remaining, h_max)
            last = step == remaining
            y_new, err, f_new = _dp_step(rhs, t, y, direction * step, f)
            scale = atol + rtol * np.maximum(_lane_max(y), _lane_max(y_new))
            enorm = float(np.max(_lane_max(err) / scale))
            if not np.isfinite(enorm):
                enorm = np.inf
            steps += 1
            if steps > max_steps:
                raise StepUnderflow(f"exceeded {max_steps} steps")
            if enorm <= 1.0:
                t = target if last else t + direction * step
                y, f = y_new, f_new
                fac = 5.0 if enorm == 0 else min(5.0, max(0.2, 0.9 * enorm ** -0.2))
                # do not let a short node-landing step shrink the working step
                h = max(h, step * fac) if last else step * fac
            else:
                h = step * max(0.2, 0.9 * enorm ** -0.2)
                if h < h_min:
                    raise StepUnderflow(f"step size {h:.3e} below minimum at t={t:.6g}")
        out[n] = y
    return out


def rk4_step(rhs, t, y, h):
    """One classical fourth-order Runge-Kutta step."""
    k1 = rhs(t, y)
    k2 = rhs(t + h / 2, y + h / 2 * k1)
    k3 = rhs(t + h / 2, y + h / 2 * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
