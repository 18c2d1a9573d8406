"""Acceptance criteria 1-14.

Each test prints one ``CRITERION n: PASS|FAIL`` line (collected and shown in
the pytest terminal summary) and then asserts at the stated tolerances.
Running this file as a script prints the same lines without pytest.
"""
import cmath
import json
import math
import time

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cmc_darboux import cli, surfaces
from cmc_darboux.connection import build, plaquette_flatness
from cmc_darboux.curvature import mean_curvature
from cmc_darboux.cylinder_analytic import (
    analytic_monodromy, analytic_rigid_motion, rigid_motion_surface, simplified_rigid_motion,
)
from cmc_darboux.darboux import analyse_eigenline, closed_mu_darboux, iterate, mu_darboux, source_distance
from cmc_darboux.holonomy import holonomy_many, holonomy_y
from cmc_darboux.quaternion import from_pair, left_mul_matrix, qmul, to_pair
from cmc_darboux.riccati import init_T, integrate_riccati, match_mu_darboux
from cmc_darboux.scan import (
    closed_under_reality, fit_asymptotics, find_resonances, real_segment, reality_involution_check, scan,
    set_distance,
)
from cmc_darboux.spectral import make_param, resonance_mu

RESULTS = {}


def record(n, checks):
    """``checks`` is a list of ``(label, ok, detail)``; prints and stores one line."""
    ok = all(c[1] for c in checks)
    detail = "; ".join(f"{label} {'ok' if good else 'FAILED'} ({info})" for label, good, info in checks)
    line = f"CRITERION {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    return ok


def assert_all(checks):
    bad = [f"{label}: {info}" for label, good, info in checks if not good]
    assert not bad, "; ".join(bad)


def realpart_oracle(mu):
    """Constant real part of a closed transform, from the algebraic closed form.

    Derived independently of the pipeline: with T = 2 alpha X^{-1} and an
    eigen-section, Re T = Im a / Im((a - 1) conj(b)).
    """
    p = make_param(mu)
    return p.a.imag / ((p.a - 1) * p.b.conjugate()).imag


def fd_cmc(res, order=2):
    return res.mean_curvature(order).max_deviation()


def radius_extrema(res):
    F = res.im_f_hat
    r = np.hypot(F[..., 2], F[..., 3])
    i = int(np.argmax(r.max(1) - r.min(1)))
    d = np.diff(np.r_[r[i], r[i][0]])
    s = np.sign(d)
    return int(np.sum(s != np.roll(s, 1)))


@pytest.fixture(scope="module")
def cyl64():
    return surfaces.cylinder(64, 256)


@pytest.fixture(scope="module")
def cyl_small():
    return surfaces.cylinder(16, 64)


# --------------------------------------------------------------------------


def panel_mus():
    mods = np.geomspace(0.05, 20, 20)
    mus = [m * cmath.exp(1j * (0.3 + 1.7 * k)) for k, m in enumerate(mods)]
    return [m for m in mus if abs(m - 1) >= 0.05]


def test_criterion_01_holonomy_oracle(cyl64):
    mus = panel_mus()
    t0 = time.perf_counter()
    data = holonomy_many(cyl64, mus, tol=1e-12)
    elapsed = time.perf_counter() - t0
    err = 0.0
    for h in data:
        hp, hm = analytic_monodromy(h.mu)
        err = max(err, set_distance(h.eigenvalues, (hp, hm)) / max(abs(hp), abs(hm)))
    checks = [
        ("panel size", len(mus) == 20, f"{len(mus)} points"),
        ("relative error <= 1e-9", err <= 1e-9, f"{err:.2e}"),
        ("runtime <= 10 s", elapsed <= 10, f"{elapsed:.2f} s"),
    ]
    record(1, checks)
    assert_all(checks)


def test_criterion_02_resonance_recovery(cyl64):
    # the segment reaches below mu_4 ~ 0.0161 so that mu_2, mu_3 and mu_4 are all bracketed
    rep = scan(cyl64, real_segment(0.01, 0.9, 80), tol=1e-12)
    found = find_resonances(cyl64, rep)
    checks = []
    for k in (2, 3):
        target = resonance_mu(k)
        hits = [r for r in found if abs(r.mu - target) <= 1e-8]
        checks.append((f"mu_{k} recovered", bool(hits), f"{min((abs(r.mu - target) for r in found), default=math.inf):.1e}"))
        data = holonomy_y(build(cyl64, target), tol=1e-12)
        dev = max(abs(data.h_plus + 1), abs(data.h_minus + 1))
        checks.append((f"h+ = h- = -1 at mu_{k}", dev <= 1e-8,
                       f"h = {data.h_plus.real:+.12f}, closed form {analytic_monodromy(target)[0].real:+.1f}"))
    record(2, checks)
    assert_all(checks)


def test_criterion_03_unitary(cyl_small):
    p = cyl_small
    checks = []
    for theta in (math.pi / 2, math.pi, 3 * math.pi / 2):
        form = build(p, cmath.exp(1j * theta))
        expected = p.f + p.N
        expected[..., 0] += 1 / math.tan(theta / 2)
        results = [closed_mu_darboux(form, "plus"), closed_mu_darboux(form, "minus")]
        for v in ([1.0, 0.0], [0.3 + 1j, -0.7], [0.0, 1.0]):
            results.append(mu_darboux(form, np.array(v, dtype=complex)))
        err = max(float(np.max(np.abs(r.f_hat - expected))) for r in results)
        checks.append((f"theta={theta / math.pi:.1f}pi, 5 sections", err <= 1e-8, f"{err:.1e}"))
    record(3, checks)
    assert_all(checks)


def test_criterion_04_real_regime(cyl64):
    p = cyl64
    X, Y = np.meshgrid(p.x, p.y, indexing="ij")
    checks = []
    res = {w: closed_mu_darboux(build(p, 0.25), w) for w in ("plus", "minus")}
    shift = {"plus": -4 / 3, "minus": 4 / 3}
    err_t = 0.0
    for w, r in res.items():
        target = p.f.copy()
        target[..., 1] += shift[w]
        err_t = max(err_t, float(np.max(np.abs(r.f_hat - target))))
    re0 = max(float(np.max(np.abs(r.real_part))) for r in res.values())
    checks.append(("mu=1/4 f_hat = f -+ 4i/3", err_t <= 1e-8, f"{err_t:.1e}"))
    checks.append(("mu=1/4 Re f_hat = 0", re0 <= 1e-8, f"{re0:.1e}"))
    num = [closed_mu_darboux(build(p, -0.5), w).f_hat for w in ("plus", "minus")]
    simple = [rigid_motion_surface(*simplified_rigid_motion(-0.5, w), X, Y) for w in ("plus", "minus")]
    gen = analytic_rigid_motion(-0.5)
    general = [rigid_motion_surface(gen.T0(w), gen.T1(w), X, Y) for w in ("plus", "minus")]
    err_r = max(float(np.max(np.abs(num[i] - simple[i]))) for i in range(2))
    err_g = min(
        max(float(np.max(np.abs(num[0] - general[0]))), float(np.max(np.abs(num[1] - general[1])))),
        max(float(np.max(np.abs(num[0] - general[1]))), float(np.max(np.abs(num[1] - general[0])))),
    )
    checks.append(("mu=-1/2 rotation matches case split", err_r <= 1e-8, f"{err_r:.1e}"))
    checks.append(("mu=-1/2 matches general display (as a pair)", err_g <= 1e-8, f"{err_g:.1e}"))
    checks.append(("mu=-1/2 has no translation", abs(gen.T0("plus")) + abs(gen.T0("minus")) < 1e-12, "T0 = 0"))
    record(4, checks)
    assert_all(checks)


def test_criterion_05_constant_real_part(cyl64):
    res = closed_mu_darboux(build(cyl64, 2j), "plus")
    frozen = 0.8  # confirmed by realpart_oracle below before freezing
    oracle = realpart_oracle(2j)
    cross = closed_mu_darboux(build(cyl64, 0.5 + 0.5j), "plus")
    checks = [
        ("Re f_hat constant", res.real_spread <= 1e-6, f"spread {res.real_spread:.1e}"),
        ("oracle agrees with frozen value", abs(oracle - frozen) <= 1e-12, f"oracle {oracle:.15f}"),
        ("Re f_hat equals frozen 4/5", abs(res.real_mean - frozen) <= 1e-6, f"{res.real_mean:.12f}"),
        ("oracle cross-check at 0.5+0.5i", abs(cross.real_mean - realpart_oracle(0.5 + 0.5j)) <= 1e-6,
         f"{cross.real_mean:.9f} vs {realpart_oracle(0.5 + 0.5j):.9f}"),
    ]
    record(5, checks)
    assert_all(checks)


def test_criterion_06_cmc_preservation(cyl64):
    coarse = surfaces.cylinder(32, 128)
    fine = surfaces.cylinder(128, 512)
    checks = []
    cases = [("1/4", 0.25, "plus"), ("-1/2", -0.5, "plus"), ("2i", 2j, "plus"), ("mu2-mix", resonance_mu(2), "mix")]
    for name, mu, which in cases:
        r64 = closed_mu_darboux(build(cyl64, mu), which)
        e64 = fd_cmc(r64)
        exact = float(np.max(np.abs(r64.exact_mean_curvature() - 1)))
        other = fine if which == "mix" else coarse
        e_other = fd_cmc(closed_mu_darboux(build(other, mu), which))
        ratio = e_other / e64 if which != "mix" else e64 / e_other
        checks.append((f"mu={name} |H-1| <= 1e-3 on 64x256", e64 <= 1e-3, f"{e64:.2e}, exact-derivative H {exact:.1e}"))
        checks.append((f"mu={name} doubling ratio ~4", 3.0 <= ratio <= 5.0, f"{ratio:.2f}"))
    record(6, checks)
    assert_all(checks)


def test_criterion_07_classicality(cyl_small):
    checks = []
    for mu in (0.25, 4.0, -0.5, cmath.exp(1j * math.pi / 3)):
        w = closed_mu_darboux(build(cyl_small, mu), "plus").wedge_residual()
        checks.append((f"mu={mu:.3g} classical", w <= 1e-8, f"{w:.1e}"))
    for mu in (2j, 0.5 + 0.5j, 1 + 1j):
        w = closed_mu_darboux(build(cyl_small, mu), "plus").wedge_residual()
        checks.append((f"mu={mu:.3g} not classical", w >= 1e-2, f"{w:.2e}"))
    record(7, checks)
    assert_all(checks)


def test_criterion_08_riccati(cyl64):
    spec = init_T(cyl64, r=-1.0)
    res = integrate_riccati(cyl64, spec)
    dist, mu = match_mu_darboux(cyl64, res, spec)
    half = integrate_riccati(cyl64, init_T(cyl64, r=0.5))
    target = cyl64.f + cyl64.N
    target[..., 0] += 1
    err_half = float(np.max(np.abs(half.f_hat - target)))
    mu_ok = min(abs(mu - (3 - 2 * math.sqrt(2))), abs(mu - (3 + 2 * math.sqrt(2)))) < 1e-12
    checks = [
        ("r=-1 matches mu = 3 -+ 2 sqrt 2", dist <= 1e-6 and mu_ok, f"{dist:.1e} at mu={mu.real:.6f}"),
        ("(T-N)^2 = -2 conserved", res.notes["constraint_residual"] <= 1e-8, f"{res.notes['constraint_residual']:.1e}"),
        ("r=1/2 gives f + N + 1", err_half <= 1e-8, f"{err_half:.1e}"),
    ]
    record(8, checks)
    assert_all(checks)


def test_criterion_09_limits(cyl_small):
    mus = (1e2, 1e3, 1e4)
    dist, eig = [], []
    for mu in mus:
        r = closed_mu_darboux(build(cyl_small, mu), "plus")
        dist.append(source_distance(r))
        eig.append(analyse_eigenline(r))
    slope_d = np.polyfit(np.log(mus), np.log(dist), 1)[0]
    slope_e = np.polyfit(np.log(mus), np.log(eig), 1)[0]
    checks = [
        ("distance to f decreases", dist[0] > dist[1] > dist[2], ", ".join(f"{d:.3g}" for d in dist)),
        ("distance rate mu^-1/2", abs(slope_d + 0.5) <= 0.05, f"slope {slope_d:.3f}"),
        ("eigenline -> i e^{iy}", eig[0] > eig[1] > eig[2], ", ".join(f"{d:.3g}" for d in eig)),
        ("eigenline rate mu^-1/2", abs(slope_e + 0.5) <= 0.05, f"slope {slope_e:.3f}"),
    ]
    record(9, checks)
    assert_all(checks)


def test_criterion_10_asymptotic_fit():
    p = surfaces.cylinder(4, 8)
    z_inf = np.linspace(25, 35, 41) * np.exp(0.3j)
    fit_inf = fit_asymptotics(p, z_inf, "infinity")
    fit_zero = fit_asymptotics(p, 1 / np.conj(z_inf), "zero")
    lead = sorted(fit_inf.leading, key=lambda c: c.imag)
    lead_err = max(abs(lead[0] + 0.5j * math.pi), abs(lead[1] - 0.5j * math.pi))
    neg_conj = [-np.conj(c) for c in fit_inf.leading]
    pair_err = set_distance(tuple(fit_zero.leading), tuple(neg_conj))
    checks = [
        ("leading coefficient +-i pi/2 at |zeta|=30", lead_err <= 1e-3, f"{lead[1]:.7f}"),
        ("ends are negated conjugates", pair_err <= 1e-3, f"{pair_err:.1e}"),
        ("fit residual", max(fit_inf.residual, fit_zero.residual) <= 1e-6,
         f"{max(fit_inf.residual, fit_zero.residual):.1e}"),
    ]
    record(10, checks)
    assert_all(checks)


def test_criterion_11_reality(cyl64):
    mus = closed_under_reality(panel_mus() + list(real_segment(0.05, 0.9, 6)))
    rep = scan(cyl64, mus, tol=1e-12)
    resid = reality_involution_check(rep)
    checks = [("eigenvalues at 1/conj(mu) = conj at mu", resid <= 1e-7, f"{resid:.1e} over {len(rep.samples)} samples")]
    record(11, checks)
    assert_all(checks)


def test_criterion_12_bubbleton(cyl64):
    b2 = closed_mu_darboux(build(cyl64, resonance_mu(2)), "mix")
    h2 = fd_cmc(b2)
    b3 = closed_mu_darboux(build(cyl64, resonance_mu(3)), "mix")
    q = iterate(b3)
    b6 = closed_mu_darboux(build(q, resonance_mu(6)), "mix")
    h6 = fd_cmc(b6)
    checks = [
        ("mu2 closed <= 1e-8", b2.closedness <= 1e-8, f"{b2.closedness:.1e}"),
        ("mu2 CMC <= 1e-3", h2 <= 1e-3,
         f"grid {h2:.2f}, exact-derivative {np.max(np.abs(b2.exact_mean_curvature() - 1)):.1e}"),
        ("mu2 radius extrema = 4", radius_extrema(b2) == 4, f"{radius_extrema(b2)}"),
        ("Bianchi mu3 -> mu6 closed <= 1e-6", b6.closedness <= 1e-6, f"{b6.closedness:.1e}"),
        ("Bianchi CMC <= 5e-3", h6 <= 5e-3,
         f"grid {h6:.3g}, exact-derivative {np.max(np.abs(b6.exact_mean_curvature() - 1)):.1e}"),
    ]
    record(12, checks)
    assert_all(checks)


def test_criterion_13_delaunay(tmp_path):
    checks = []
    for kind in ("unduloid", "nodoid"):
        d = surfaces.delaunay(kind, 0.3, 64, 256)
        rep = surfaces.validate(d, tolerance=1e-6)
        worst = max(rep.residuals["conformality"], rep.residuals["mean_curvature"])
        checks.append((f"{kind} validates", rep.ok, f"{worst:.1e}"))
        err = 0.0
        for theta in (math.pi / 2, math.pi, 3 * math.pi / 2):
            r = closed_mu_darboux(build(d, cmath.exp(1j * theta)), "plus")
            target = d.f + d.N
            target[..., 0] += 1 / math.tan(theta / 2)
            err = max(err, float(np.max(np.abs(r.f_hat - target))))
        checks.append((f"{kind} S^1 transforms = parallel + cot", err <= 1e-6, f"{err:.1e}"))
    code = cli.main(["transform", "--surface", "nodoid", "--neck", "0.3", "--mu", "0.5,0.5", "--which", "initial",
                     "--nx", "32", "--ny", "64", "--out", str(tmp_path)])
    summary = json.loads((tmp_path / "summary.json").read_text()) if code == 0 else {}
    n_faces = sum(1 for ln in (tmp_path / "f_hat.obj").read_text().splitlines() if ln.startswith("f ")) if code == 0 else -1
    checks.append(("non-real mu exports an open strip", code == 0 and not summary.get("seam_welded", True)
                   and n_faces == 2 * 31 * 63, f"exit {code}, closedness {summary.get('closedness', float('nan')):.2g}"))
    record(13, checks)
    assert_all(checks)


def test_criterion_14_structural():
    failures = {}

    @settings(max_examples=12, deadline=None)
    @given(st.floats(0.05, 20), st.floats(-math.pi, math.pi))
    def det_one(r, t):
        mu = cmath.rect(r, t)
        assume(abs(mu - 1) > 0.05)
        d = holonomy_y(build(surfaces.cylinder(4, 8), mu), tol=1e-12)
        assert abs(np.linalg.det(d.H) - 1) <= 1e-8 * max(1.0, np.abs(d.H).max() ** 2)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1e-3, 1e3), st.floats(-math.pi, math.pi))
    def a2b2(r, t):
        p = make_param(cmath.rect(r, t))
        assert abs(p.a ** 2 + p.b ** 2 - 1) <= 1e-12 * max(1.0, abs(p.a) ** 2)

    @settings(max_examples=8, deadline=None)
    @given(st.floats(0.2, 3.0), st.floats(-math.pi, math.pi), st.floats(0.3, 0.6))
    def plaquette(r, t, h):
        mu = cmath.rect(r, t)
        assume(abs(mu - 1) > 0.05)
        form = build(surfaces.cylinder(4, 8), mu)
        assert plaquette_flatness(form, h) / plaquette_flatness(form, h / 2) > 12

    quats = st.lists(st.floats(-5, 5), min_size=4, max_size=4).map(np.array)

    @settings(max_examples=100, deadline=None)
    @given(quats, quats)
    def homomorphism(p, q):
        assert np.allclose(left_mul_matrix(qmul(p, q)), left_mul_matrix(p) @ left_mul_matrix(q), atol=1e-9)
        assert np.allclose(from_pair(left_mul_matrix(p) @ to_pair(q)), qmul(p, q), atol=1e-9)

    @settings(max_examples=6, deadline=None)
    @given(st.sampled_from(["unduloid", "nodoid"]), st.floats(0.1, 0.45), st.floats(0.02, 0.3))
    def validation(kind, neck, eps):
        d = surfaces.delaunay(kind, neck, 16, 32)
        assert surfaces.validate(d).ok
        broken = surfaces.ConformalPatch(x=d.x, y=d.y, f=d.f, N=d.N, dfx=d.dfx, dfy=d.dfy,
                                         dNx=(1 + eps) * d.dNx, dNy=d.dNy)
        assert not surfaces.validate(broken).ok

    for name, prop in (("det H = 1", det_one), ("a^2 + b^2 = 1", a2b2), ("plaquette order", plaquette),
                       ("pair homomorphism", homomorphism), ("patch validation", validation)):
        try:
            prop()
        except Exception as exc:  # report every property, then fail
            failures[name] = f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
    checks = [(name, name not in failures, failures.get(name, "held"))
              for name in ("det H = 1", "a^2 + b^2 = 1", "plaquette order", "pair homomorphism", "patch validation")]
    record(14, checks)
    assert_all(checks)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
