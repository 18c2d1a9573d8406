import cmath
import math

import numpy as np
import pytest

from cmc_darboux import surfaces
from cmc_darboux.errors import BranchJump
from cmc_darboux.scan import (
    closed_under_reality, coincidence, fit_asymptotics, plot_script, real_segment, reality_involution_check,
    ring, scan, set_distance, traceless,
)


@pytest.fixture(scope="module")
def patch():
    return surfaces.cylinder(4, 8)


def test_excludes_neighbourhood_of_one(patch):
    rep = scan(patch, [0.5, 0.99, 1.02, 2.0])
    assert [m.real for m in rep.samples] == [0.5, 2.0]


def test_reality_closure():
    out = closed_under_reality([2.0, 0.5, 1j, 0.5 + 0.5j])
    assert len(out) == 5
    for m in out:
        assert any(abs(1 / m.conjugate() - w) < 1e-14 for w in out)


def test_reality_residual(patch):
    rep = scan(patch, closed_under_reality(list(ring(2.0, 6)) + [0.3, 0.2 + 0.1j]), tol=1e-12)
    assert reality_involution_check(rep) < 1e-9
    assert rep.reality_residual is not None


def test_report_serialisations(patch):
    rep = scan(patch, real_segment(0.1, 0.5, 4))
    assert rep.csv().count("\r\n") == 5
    d = rep.to_dict()
    assert d["samples"] == 4 and d["max_det_error"] < 1e-8
    assert rep.json().startswith("{")


def test_helpers():
    assert set_distance((1, 2), (2, 1)) == 0
    assert coincidence(np.array([1, 0j]), np.array([0, 1j])) == pytest.approx(1)
    assert np.allclose(np.trace(traceless(np.array([[1, 2], [3, 4]]))), 0)
    assert "scan.csv" in plot_script()


def test_fit_at_infinity(patch):
    z = np.linspace(25, 35, 41) * np.exp(0.3j)
    fit = fit_asymptotics(patch, z, "infinity")
    assert fit.residual < 1e-6
    lead = sorted(fit.leading, key=lambda c: c.imag)
    assert lead[0] == pytest.approx(-0.5j * math.pi, abs=1e-3)
    assert lead[1] == pytest.approx(0.5j * math.pi, abs=1e-3)


def test_branch_jump_detected(patch):
    with pytest.raises(BranchJump):
        fit_asymptotics(patch, [3.0 + 1j, 30.0 + 10j, 60 + 1j], "infinity")


def test_bad_end(patch):
    with pytest.raises(ValueError):
        fit_asymptotics(patch, [2 + 1j, 2.1 + 1j, 2.2 + 1j], "middle")
