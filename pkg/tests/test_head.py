from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import random_field
from selfsim_ns.forces import make_force
from selfsim_ns.head import (exponents, head, head_pde_ambient_deviation, head_pde_residual,
                             negative_part, positive_part, positive_part_norms, radial_relation_residual)
from selfsim_ns.sphere import AxisymField, ScalarSphereField, build_grid, laplace_beltrami, sphere_area


# --- exponents ------------------------------------------------------------------

def test_exponent_examples():
    e5 = exponents(5)
    assert (e5.theta, e5.q) == (Fraction(3), Fraction(6, 5))
    e16 = exponents(16)
    assert (e16.theta, e16.q) == (Fraction(105, 13), Fraction(35, 9))
    e17 = exponents(17)
    assert e17.q == Fraction(120, 29) and e17.q > 4 and not e17.in_existence_range


def test_exponents_reject_small_n():
    for n in (4, 3, 5.5):
        with pytest.raises(ValueError):
            exponents(n)


@given(n=st.integers(5, 16))
def test_exponent_invariants(n):
    e = exponents(n)
    assert e.in_existence_range and e.q < 4
    assert e.regularity_margin and e.theta > Fraction(n, 2)
    assert e.theta_conjugate < 2
    assert 1 / e.theta + 1 / e.theta_conjugate == 1
    assert 1 / e.q + 1 / e.q_conjugate == 1


@given(n=st.integers(17, 200))
def test_exponents_beyond_sixteen_are_flagged(n):
    assert not exponents(n).in_existence_range


# --- head -----------------------------------------------------------------------

def test_head_trivial_cases():
    g = build_grid(5, 16)
    Z = AxisymField.zeros(g)
    assert not np.any(head(Z, ScalarSphereField.zeros(g)).values)
    P = ScalarSphereField(g, g.x**2)
    assert np.array_equal(head(Z, P).values, P.values)


@given(seed=st.integers(0, 500))
def test_head_kinetic_part_matches_cartesian(seed):
    g = build_grid(6, 16)
    U = random_field(g, seed)
    H = head(U, ScalarSphereField.zeros(g)).values
    assert np.allclose(H, 0.5 * np.sum(U.cartesian() ** 2, axis=1), atol=1e-12)


# --- radial relation --------------------------------------------------------------

def test_radial_relation_zero_fields():
    g = build_grid(5, 16)
    f = make_force("radial-cosine", {}, g)
    r = radial_relation_residual(AxisymField.zeros(g), ScalarSphereField.zeros(g), f)
    assert np.array_equal(r.values, -f.radial)


@given(n=st.sampled_from([4, 5, 9]), seed=st.integers(0, 500))
def test_radial_relation_manufactured(n, seed):
    g = build_grid(n, 24)
    U = random_field(g, seed)
    f = make_force("mixed", {}, g)
    ur = ScalarSphereField(g, U.u_r)
    drift = U.u_theta * (-g.sin * (g.D @ U.u_r))
    H = ScalarSphereField(g, 0.5 * (-laplace_beltrami(ur).values + drift - 0.3 * f.radial))
    r = radial_relation_residual(U, H, f, 0.3).values
    assert np.abs(r).max() < 1e-12 * (1 + np.abs(H.values).max())


# --- head PDE ------------------------------------------------------------------------

def test_head_pde_zero():
    g = build_grid(5, 16)
    Z = AxisymField.zeros(g)
    assert not np.any(head_pde_residual(Z, ScalarSphereField.zeros(g), None).values)


@pytest.mark.parametrize("n", [4, 5, 8])
@pytest.mark.parametrize("fam", ["radial-cosine", "mixed"])
def test_head_pde_matches_ambient_fd(n, fam):
    g = build_grid(n, 24)
    U = random_field(g, n)
    P = ScalarSphereField(g, np.cos(g.theta) ** 3 - 0.2)
    f = make_force(fam, {}, g)
    assert head_pde_ambient_deviation(U, P, f, 0.8, 16, 1e-4, seed=n) < 1e-6


# --- positive and negative parts ---------------------------------------------------------

def test_positive_part_norm_examples():
    for n in (5, 8):
        g = build_grid(n, 16)
        area = sphere_area(n)
        th = float(exponents(n).theta)
        a, b, c = positive_part_norms(ScalarSphereField(g, -np.ones(16)), n)
        assert (a, c) == (0.0, 0.0) and b == pytest.approx(area, rel=1e-12)
        a, b, c = positive_part_norms(ScalarSphereField(g, np.ones(16)), n)
        assert a == pytest.approx(area ** (1 / th), rel=1e-12) and b == 0.0
        assert c == pytest.approx(area, rel=1e-12)
        _, neg, pos = positive_part_norms(ScalarSphereField(g, g.x))
        assert pos == pytest.approx(neg, rel=1e-12)


@given(seed=st.integers(0, 1000))
def test_part_identities(seed):
    g = build_grid(5, 16)
    H = ScalarSphereField(g, np.random.default_rng(seed).standard_normal(16))
    p, m = positive_part(H).values, negative_part(H).values
    assert np.array_equal(p + m, np.abs(H.values))
    assert np.array_equal(p - m, H.values)
