import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import random_field
from selfsim_ns.forces import ForceSpec, make_force
from selfsim_ns.head import head
from selfsim_ns.solver import solve_selfsimilar
from selfsim_ns.sphere import AxisymField, ScalarSphereField, build_grid, grad_norm_squared, sphere_area
from selfsim_ns.validators import (energy_identity_gap, energy_split, estimate_report, identities_pass,
                                   radial_average_gap, safe_ratio, sobolev_identity_gap)


def test_zero_fields():
    g = build_grid(5, 16)
    Z, P0 = AxisymField.zeros(g), ScalarSphereField.zeros(g)
    assert energy_identity_gap(Z, P0, None) == 0.0
    assert radial_average_gap(Z, P0, None) == 0.0
    assert sobolev_identity_gap(Z) == 0.0


@given(c=st.floats(-5, 5))
def test_radial_gap_constant_head(c):
    g = build_grid(6, 16)
    f = ForceSpec(g, np.full(16, -2 * c), np.zeros(16))
    H = ScalarSphereField(g, np.full(16, c))
    assert radial_average_gap(AxisymField.zeros(g), H, f) <= 1e-13 * (1 + abs(c))


@given(seed=st.integers(0, 300))
def test_energy_gap_n4_specialization(seed):
    g = build_grid(4, 24)
    U = random_field(g, seed)
    P = ScalarSphereField(g, np.cos(g.theta))
    f = make_force("mixed", {}, g)
    work = g.integrate(np.sum(U.cartesian() * f.field().cartesian(), axis=1))
    assert energy_identity_gap(U, P, f) == pytest.approx(abs(grad_norm_squared(U) - work), rel=1e-12)


def test_sobolev_gap_examples():
    for n in (4, 5, 8):
        g = build_grid(n, 16)
        U = AxisymField(g, np.zeros(16), np.ones(16))
        assert sobolev_identity_gap(U) <= 1e-10 * n * sphere_area(n)


@given(n=st.sampled_from([4, 5, 8, 16]), seed=st.integers(0, 500))
def test_sobolev_gap_random(n, seed):
    g = build_grid(n, 24)
    U = random_field(g, seed)
    assert sobolev_identity_gap(U) <= 1e-10 * grad_norm_squared(U)


def test_safe_ratio():
    assert safe_ratio(0.0, 0.0) is None
    assert safe_ratio(0.0, 2.0) == 0.0
    assert safe_ratio(1.0, 0.0) == math.inf
    assert safe_ratio(3.0, 2.0) == 1.5


def test_report_on_zero_fields():
    g = build_grid(5, 16)
    Z, P0 = AxisymField.zeros(g), ScalarSphereField.zeros(g)
    rep = estimate_report(Z, P0, None)
    assert all(v is None for v in rep.estimate_ratios.values())
    rep = estimate_report(Z, P0, make_force("radial-cosine", {}, g))
    for key in ("head_positive_control", "radial_l2_control", "radial_positive_control"):
        assert rep.estimate_ratios[key] == 0.0
    assert rep.energy_split_holds


@pytest.mark.parametrize("n", [5, 8])
def test_converged_solution_gaps_and_ratios(n):
    g = build_grid(n, 64)
    f = make_force("radial-cosine", {}, g, amplitude=0.5)
    sol, rep = solve_selfsimilar(f)
    U, P = sol.velocity, sol.pressure
    r = rep.identities
    lhs, rhs = energy_split(U, P, f)
    assert r.energy_identity_gap <= 1e-7 * (1 + abs(grad_norm_squared(U)))
    assert r.radial_average_gap <= 1e-7 * (1 + g.integrate(np.abs(f.radial)))
    assert lhs <= rhs + 1e-6 * max(1.0, abs(lhs), abs(rhs))
    assert identities_pass(r)
    assert all(v is not None and np.isfinite(v) and v >= 0 for v in r.estimate_ratios.values())
    assert set(r.estimate_ratios) >= {"energy_split", "head_positive_control", "radial_l2_control",
                                      "gradient_head_coupling", "head_positive_vs_lipschitz",
                                      "radial_positive_control"}
    # a radial force does work only through u_r
    work = g.integrate(np.sum(U.cartesian() * f.field().cartesian(), axis=1))
    assert work == pytest.approx(g.integrate(f.radial * U.u_r), rel=1e-14)


def test_gaps_decrease_with_resolution():
    # a force with a nearby singularity keeps the coarse-grid gaps above round-off
    floor = 1e-12
    gaps = {"energy": [], "radial": [], "sobolev": []}
    for N in (16, 32, 64):
        g = build_grid(5, N)
        f = ForceSpec.from_functions(g, lambda t: 1 / (1.02 - np.cos(t)), lambda t: np.sin(t) / (1.02 - np.cos(t)),
                                     amplitude=0.5)
        sol, rep = solve_selfsimilar(f, validate=False)
        U, P = sol.velocity, sol.pressure
        gaps["energy"].append(energy_identity_gap(U, P, f))
        gaps["radial"].append(radial_average_gap(U, head(U, P), f))
        gaps["sobolev"].append(sobolev_identity_gap(U))
    assert gaps["energy"][0] > 1e-6 and gaps["radial"][0] > 1e-8
    for seq in gaps.values():
        for a, b in zip(seq, seq[1:]):
            assert b < a or max(a, b) <= floor, seq
