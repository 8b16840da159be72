import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import random_divfree, random_field
from oracles import green_convolution_n4
from selfsim_ns import terms
from selfsim_ns.ambient import fd_gradient, fd_navier_stokes, sphere_points, vector_at
from selfsim_ns.forces import ForceSpec, make_force
from selfsim_ns.sphere import (AxisymField, ScalarSphereField, build_grid, divergence_residual,
                               embed_nodes)
from selfsim_ns.stokes import (advection_cartesian, assemble, green_tensor, picard_map,
                               recover_pressure, solve_stokes)

dims = st.sampled_from([4, 5, 8, 12])


def _pressure(g, seed=0):
    c = np.random.default_rng(seed).standard_normal(5) / (1 + np.arange(5)) ** 2
    return ScalarSphereField(g, np.polynomial.polynomial.polyval(g.x, c))


# --- assembly -------------------------------------------------------------------

def test_zero_input_gives_zero_output():
    g = build_grid(5, 24)
    m, d = assemble(g).apply(AxisymField.zeros(g), ScalarSphereField.zeros(g))
    assert not np.any(m.alpha) and not np.any(m.beta) and not np.any(d.values)


@given(n=dims, seed=st.integers(0, 500))
def test_nodal_operator_matches_direct_evaluation(n, seed):
    g = build_grid(n, 24)
    U, P = random_field(g, seed), _pressure(g, seed)
    m, d = assemble(g).apply(U, P)
    j = terms.field_jets(U)
    vn, vs = terms.viscous(j)
    pn, ps = terms.pressure_gradient(g.x, *terms.scalar_jets(g, P.values))
    assert np.abs(m.alpha - (vn + pn)).max() <= 1e-10 * (1 + np.abs(vn).max())
    assert np.abs(m.beta - (vs + ps)).max() <= 1e-10 * (1 + np.abs(vs).max())
    assert np.allclose(d.values, divergence_residual(U).values, atol=1e-12)


@pytest.mark.parametrize("n", [4, 5, 9])
def test_radial_projection_against_cartesian_oracle(n):
    # sigma . (-Delta u + grad p) = -Delta_S u_r - 2P + 2 div u, checked with the FD evaluation
    g = build_grid(n, 24)
    U, P = random_field(g, 7), _pressure(g, 7)
    m, _ = assemble(g).apply(U, P)
    radial = g.x * m.alpha + m.beta
    ur = U.u_r
    formula = -(g.L @ ur) - 2 * P.values + 2 * divergence_residual(U).values
    assert np.abs(radial - formula).max() <= 1e-10 * (1 + np.abs(radial).max())
    X = embed_nodes(g)[::4]
    fd = fd_navier_stokes(U, P, None, 0.0, X, 1e-4)
    lin = fd["viscous"] + fd["pressure"]
    assert np.abs(np.sum(lin * X, axis=1) - radial[::4]).max() <= 1e-6 * (1 + np.abs(radial).max())


@given(n=dims, seed=st.integers(0, 500))
def test_constraint_rows_vanish_on_divergence_free_fields(n, seed):
    g = build_grid(n, 24)
    _, d = assemble(g).apply(random_divfree(g, seed), ScalarSphereField.zeros(g))
    assert np.abs(d.values).max() <= 1e-10


def test_singular_values_reported():
    for n in (4, 5, 8, 16, 20):
        sys = assemble(build_grid(n, 32))
        assert sys.smallest_singular_value > 1e-3
        assert np.isfinite(sys.condition)


# --- solves -------------------------------------------------------------------------

def test_zero_rhs_gives_zero():
    for n in (4, 5):
        g = build_grid(n, 24)
        sol = solve_stokes(assemble(g), AxisymField.zeros(g))
        assert np.abs(sol.velocity.alpha).max() == 0 and np.abs(sol.pressure.values).max() == 0


@pytest.mark.parametrize("n", [4, 5, 8, 16])
def test_manufactured_solution(n):
    g = build_grid(n, 32)
    U, P = random_divfree(g, n), _pressure(g, n)
    m, _ = assemble(g).apply(U, P)
    sol = solve_stokes(assemble(g), m, gauge=(n == 4))
    Pref = P.values - (g.integrate(P.values) / g.area if n == 4 else 0.0)
    assert np.abs(sol.velocity.alpha - U.alpha).max() < 1e-8
    assert np.abs(sol.velocity.beta - U.beta).max() < 1e-8
    assert np.abs(sol.pressure.values - Pref).max() < 1e-8
    assert sol.divergence_max < 1e-9
    if n == 4:
        assert abs(g.integrate(sol.pressure.values)) < 1e-12


@given(n=dims, s1=st.integers(0, 100), s2=st.integers(0, 100))
def test_linearity(n, s1, s2):
    g = build_grid(n, 24)
    sys = assemble(g)
    r1, r2 = random_field(g, s1), random_field(g, s2 + 1000)
    a = solve_stokes(sys, r1 + r2).velocity
    b = solve_stokes(sys, r1).velocity + solve_stokes(sys, r2).velocity
    scale = 1 + np.abs(a.alpha).max() + np.abs(a.beta).max()
    assert np.abs(a.alpha - b.alpha).max() <= 1e-10 * scale
    assert np.abs(a.beta - b.beta).max() <= 1e-10 * scale


def test_concurrent_solves_share_the_system():
    g = build_grid(8, 32)
    sys = assemble(g)
    rhs = [random_field(g, s) for s in range(6)]
    serial = [solve_stokes(sys, r).velocity.alpha for r in rhs]
    with ThreadPoolExecutor(4) as ex:
        parallel = list(ex.map(lambda r: solve_stokes(sys, r).velocity.alpha, rhs))
    for a, b in zip(serial, parallel):
        assert np.array_equal(a, b)


# --- Green tensor ---------------------------------------------------------------------

def test_green_tensor_value_n4():
    G = green_tensor(np.array([1.0, 0, 0, 0]), 4)
    assert G[0, 0] == pytest.approx(3 / (8 * math.pi**2), rel=1e-14)


@given(n=st.integers(3, 12), seed=st.integers(0, 1000))
def test_green_tensor_homogeneity_and_symmetry(n, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    G = green_tensor(x, n)
    assert np.allclose(G, G.T, rtol=0, atol=0)
    assert np.allclose(green_tensor(2 * x, n), 2.0 ** (2 - n) * G, rtol=1e-13)


def test_green_tensor_rejects_origin():
    with pytest.raises(ValueError):
        green_tensor(np.zeros(4), 4)


# --- Picard map -----------------------------------------------------------------------

def test_picard_base_point_and_linearity():
    g = build_grid(5, 32)
    f = make_force("mixed", {}, g)
    zero = AxisymField.zeros(g)
    assert np.abs(picard_map(zero, f, 0.0).alpha).max() == 0
    T1 = picard_map(zero, f, 1.0)
    for lam in (0.25, 0.6):
        Tl = picard_map(zero, f, lam)
        assert np.allclose(Tl.alpha, lam * T1.alpha, atol=1e-13)
        assert np.allclose(Tl.beta, lam * T1.beta, atol=1e-13)
    with pytest.raises(ValueError):
        picard_map(zero, f, 1.5)


@given(n=dims, seed=st.integers(0, 500))
def test_picard_output_is_divergence_free(n, seed):
    g = build_grid(n, 32)
    v = random_field(g, seed, scale=0.5)
    u = picard_map(v, make_force("radial-cosine", {}, g), 0.7)
    assert np.abs(divergence_residual(u).values).max() <= 1e-9


def test_advection_degree_bookkeeping():
    # (v . grad) v of a (-1)-homogeneous v is (-3)-homogeneous: the FD value at r = 2 is 1/8 of r = 1
    n = 5
    g = build_grid(n, 24)
    v = random_field(g, 3)
    X = sphere_points(n, 8, 0)
    adv = lambda Y, h: np.einsum("ki,kij->kj", vector_at(v, Y), fd_gradient(lambda Z: vector_at(v, Z), Y, h))
    assert np.allclose(adv(2 * X, 2e-4), adv(X, 1e-4) / 8, rtol=1e-8, atol=1e-12)
    red = advection_cartesian(v).cartesian()
    fd_nodes = adv(embed_nodes(g), 1e-4)
    assert np.abs(red - fd_nodes).max() < 1e-7


@pytest.mark.parametrize("family", ["radial-cosine", "mixed"])
def test_stokes_response_against_green_convolution(family):
    # force profiles in closed form, independent of the grid
    closed = {
        "radial-cosine": (lambda p: 0 * p, lambda p: 1 + np.cos(p)),
        "mixed": (lambda p: -1 + 0 * p, lambda p: 2 * np.cos(p)),
    }
    g = build_grid(4, 16)
    T = picard_map(AxisymField.zeros(g), make_force(family, {}, g), 1.0)
    for th in (0.5, 1.4, 2.6):
        u = green_convolution_n4(*closed[family], th, m=32)
        x = math.cos(th)
        a, b = g.interpolate(T.alpha, [x])[0], g.interpolate(T.beta, [x])[0]
        ref = np.array([b * math.sin(th), a + b * x])
        assert np.abs(u - ref).max() <= 0.05 * np.abs(ref).max()


# --- pressure recovery ----------------------------------------------------------------

def test_recover_pressure_trivial():
    g = build_grid(5, 16)
    assert not np.any(recover_pressure(AxisymField.zeros(g)).values)


def test_recover_pressure_manufactured_n5():
    # at n = 5 a radial force has div f = f_r, so -div f injects any source
    n = 5
    g = build_grid(n, 32)
    P = _pressure(g, 4)
    src = -(g.L @ P.values) + (2 * n - 8) * P.values
    f = ForceSpec(g, -src, np.zeros(g.N))
    assert np.abs(f.spectral_divergence().values + src).max() < 1e-10
    rec = recover_pressure(AxisymField.zeros(g), f)
    assert np.abs(rec.values - P.values).max() < 1e-8


def test_recover_pressure_n4_zero_mean():
    g = build_grid(4, 32)
    P = recover_pressure(random_divfree(g, 1), make_force("mixed", {}, g))
    assert abs(g.integrate(P.values)) < 1e-12
