"""Sphere-reduced Navier–Stokes terms in (alpha, beta) variables.

Every vector quantity ``V`` evaluated at ``r = 1`` is returned as a pair
``(cn, cs)`` with ``V = cn e_n + cs sigma``.  Inputs are profile "jets":
value, ``d/dx`` and Laplace–Beltrami of each profile, where
``x = cos(theta)`` and ``w = 1 - x^2``.  The formulas are validated
against the Cartesian route in :mod:`selfsim_ns.ambient` and in the tests.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sphere import AxisymField, Grid, ScalarSphereField


@dataclass(frozen=True)
class Jets:
    """Profile values, x-derivatives and Laplace–Beltrami at some points."""

    n: int
    x: np.ndarray
    a0: np.ndarray
    a1: np.ndarray
    a_lap: np.ndarray
    b0: np.ndarray
    b1: np.ndarray
    b_lap: np.ndarray

    @property
    def w(self) -> np.ndarray:
        return 1.0 - self.x**2

    @property
    def sin(self) -> np.ndarray:
        return np.sqrt(np.clip(self.w, 0.0, None))


def field_jets(U: AxisymField) -> Jets:
    gr = U.grid
    return Jets(
        gr.n, gr.x,
        U.alpha, gr.D @ U.alpha, gr.L @ U.alpha,
        U.beta, gr.D @ U.beta, gr.L @ U.beta,
    )


def _point_profile(grid: Grid, values, xs):
    M = grid.interpolation_matrix(xs)
    d1 = grid.D @ values
    d2 = grid.D @ d1
    v0, v1, v2 = M @ values, M @ d1, M @ d2
    lap = (1 - xs**2) * v2 - (grid.n - 1) * xs * v1
    return v0, v1, lap


def point_jets(U: AxisymField, xs) -> Jets:
    """Jets of the interpolants at arbitrary ``xs = cos(theta)``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    a = _point_profile(U.grid, U.alpha, xs)
    b = _point_profile(U.grid, U.beta, xs)
    return Jets(U.grid.n, xs, *a, *b)


def scalar_jets(grid: Grid, values, xs=None):
    """(value, d/dx) of a scalar profile at the nodes or at ``xs``."""
    values = np.asarray(values, dtype=float)
    d1 = grid.D @ values
    if xs is None:
        return values, d1
    M = grid.interpolation_matrix(xs)
    return M @ values, M @ d1


def viscous(j: Jets):
    """``-Delta u`` at r = 1."""
    n, x = j.n, j.x
    cn = -j.a_lap + (n - 3) * j.a0 - 2 * j.b1
    cs = -j.b_lap + 2 * x * j.b1 + (2 * n - 4) * j.b0
    return cn, cs


def pressure_gradient(x, p0, p1):
    """``grad p`` at r = 1 for ``p = P(sigma) / r^2``."""
    return p1, -2 * p0 - x * p1


def convective(j: Jets):
    """``(u . grad) u`` at r = 1."""
    x, w = j.x, j.w
    cn = j.a0 * (w * j.a1 - x * j.a0)
    cs = -j.b0**2 - 2 * x * j.a0 * j.b0 + w * j.a0 * j.b1
    return cn, cs


def divergence_form(j: Jets):
    """``div(u (x) u)`` at r = 1; equals the convective form plus ``u div u``."""
    n, x, w = j.n, j.x, j.w
    a, b = j.a0, j.b0
    cn = -2 * x * a**2 + 2 * w * a * j.a1 + (n - 2) * a * b
    cs = -3 * x * a * b + w * (j.a1 * b + a * j.b1) + (n - 3) * b**2
    return cn, cs


def divergence(j: Jets):
    return j.w * j.a1 - j.x * j.a0 + (j.n - 2) * j.b0


def gradient_trace_square(j: Jets):
    """``d_i u_j d_j u_i`` at r = 1 (trace of the squared velocity gradient)."""
    x, w = j.x, j.w
    dn_a = w * j.a1 - x * j.a0
    dn_b = w * j.b1 - 2 * x * j.b0
    return dn_a**2 - 2 * j.a0 * dn_b + 2 * j.b0 * dn_a + j.n * j.b0**2


def vorticity_square(j: Jets):
    """``sum_{i,j} (d_i u_j - d_j u_i)^2`` at r = 1."""
    return 2 * j.w * (j.a0 + j.x * j.a1 + j.b1) ** 2


def squared_norm(x, a0, b0):
    return a0**2 + b0**2 + 2 * x * a0 * b0


def dot(x, a0, b0, c0, d0):
    """``(a e_n + b sigma) . (c e_n + d sigma)``."""
    return a0 * c0 + b0 * d0 + x * (a0 * d0 + b0 * c0)


def force_divergence(n, x, gn0, gn1, gs0):
    """``div f`` at r = 1 for ``f = (gn e_n + gs sigma) / r^3``."""
    return (1 - x**2) * gn1 - 3 * x * gn0 + (n - 4) * gs0


def to_cartesian(n, x, cn, cs):
    """Ambient vectors ``cn e_n + cs sigma`` in the (e_1, e_n) half-plane, shape (m, n)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros((x.size, n))
    out[:, 0] = cs * np.sqrt(np.clip(1 - x**2, 0.0, None))
    out[:, -1] = cn + cs * x
    return out


def from_cartesian(x, V):
    """Inverse of :func:`to_cartesian` for vectors in the (e_1, e_n) plane."""
    s = np.sqrt(1 - x**2)
    cs = V[:, 0] / s
    return V[:, -1] - x * cs, cs


def radial_trace(U: AxisymField) -> ScalarSphereField:
    return ScalarSphereField(U.grid, U.u_r)
