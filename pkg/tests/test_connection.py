import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmc_darboux import surfaces
from cmc_darboux.connection import build, plaquette_flatness, reality_check
from cmc_darboux.spectral import make_param

mus = st.tuples(st.floats(0.1, 5), st.floats(-math.pi, math.pi)).map(lambda t: t[0] * complex(math.cos(t[1]), math.sin(t[1])))


@given(mus)
def test_connection_is_traceless(mu):
    p = surfaces.cylinder(4, 8)
    form = build(p, mu)
    assert np.max(np.abs(np.trace(form.Ox, axis1=-2, axis2=-1))) < 1e-12
    assert np.max(np.abs(np.trace(form.Oy, axis1=-2, axis2=-1))) < 1e-12


def test_trivial_at_one(small_cylinder):
    form = build(small_cylinder, 1.0)
    assert np.max(np.abs(form.Ox)) == 0 and np.max(np.abs(form.Oy)) == 0


def test_omega_matches_grid_at_nodes(small_cylinder):
    form = build(small_cylinder, 0.3 + 0.2j)
    assert np.allclose(form.omega(small_cylinder.x[3], small_cylinder.y[5])[0], form.Ox[3, 5])


@pytest.mark.parametrize("mu", [0.25, 2j, -0.5, make_param(0.7 - 0.4j)])
def test_flatness_refines(mu):
    p = surfaces.cylinder(8, 16)
    form = build(p, mu)
    coarse = plaquette_flatness(form, h=0.4)
    fine = plaquette_flatness(form, h=0.2)
    # one RK4 step per edge: loop error shrinks at least fourth order
    assert fine < coarse
    assert coarse / fine > 12


@given(st.floats(0.2, 0.8))
def test_flatness_refinement_order_property(h):
    form = build(surfaces.cylinder(4, 8), 0.5 + 0.5j)
    ratio = plaquette_flatness(form, h=h) / plaquette_flatness(form, h=h / 2)
    assert ratio > 12


@pytest.mark.parametrize("mu", [0.5 + 0.5j, 3.0, 0.2j])
def test_reality_symmetry(small_cylinder, mu):
    assert reality_check(small_cylinder, mu) < 1e-9


def test_reality_symmetry_delaunay(unduloid_small):
    assert reality_check(unduloid_small, 0.4 + 0.9j) < 1e-8
