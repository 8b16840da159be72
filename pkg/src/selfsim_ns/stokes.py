"""Homogeneous Stokes problem on S^{n-1}, pressure recovery and the Green tensor.

The (-1)-homogeneous Stokes system ``-Delta u + grad p = F / r^3``,
``div u = 0`` reduces on the sphere to two momentum rows (the ``e_n`` and
``sigma`` coefficients) plus the constraint.  The velocity is
parametrized by a poloidal potential ``psi`` of degree ``N - 1``::

    alpha = psi',   beta = -Delta_S psi / (n - 2) - x psi'

which satisfies the constraint identically.  The unknowns are the
``N - 1`` non-constant modal coefficients of ``psi`` plus the nodal
pressure; the ``e_n`` row is projected onto degree ``N - 2`` and the
``sigma`` row is collocated, which gives a square system with no aliasing
of the linear part.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve, svdvals

from . import terms
from .sphere import AxisymField, Grid, ScalarSphereField, ambient_gradient

__all__ = [
    "StokesSystem",
    "StokesSolution",
    "assemble",
    "solve_stokes",
    "green_tensor",
    "picard_map",
    "advection_cartesian",
    "recover_pressure",
]


@dataclass(frozen=True, eq=False)
class StokesSystem:
    """Assembled operators for one grid.

    ``nodal`` maps nodal ``[alpha, beta, P]`` (length 3N) to nodal
    ``[M_n, M_sigma, div]``.  ``reduced`` maps ``[c, P]`` (length 2N - 1,
    ``c`` the potential coefficients) to the projected momentum rows.
    """

    grid: Grid
    nodal: np.ndarray
    alpha_map: np.ndarray  # c -> alpha at nodes
    beta_map: np.ndarray  # c -> beta at nodes
    projector: np.ndarray  # nodal -> modal coefficients 0..N-2
    reduced: np.ndarray
    lu: tuple
    smallest_singular_value: float
    condition: float

    @property
    def size(self) -> int:
        return self.reduced.shape[0]

    def apply(self, U: AxisymField, P: ScalarSphereField):
        """Linear Stokes operator evaluated nodally: (momentum, divergence)."""
        N = self.grid.N
        out = self.nodal @ np.concatenate([U.alpha, U.beta, P.values])
        return AxisymField(self.grid, out[:N], out[N:2 * N]), ScalarSphereField(self.grid, out[2 * N:])

    def project_rows(self, rn, rs) -> np.ndarray:
        """Right-hand side or residual in the reduced row space."""
        return np.concatenate([self.projector @ rn, rs])

    def unpack(self, z):
        """Reduced unknowns ``[c, P]`` to (alpha, beta, P) nodal arrays."""
        N = self.grid.N
        c, P = z[: N - 1], z[N - 1:]
        return self.alpha_map @ c, self.beta_map @ c, P

    def potential_coefficients(self, U: AxisymField) -> np.ndarray:
        """Least-squares potential coefficients of a (divergence-free) field."""
        A = np.vstack([self.alpha_map, self.beta_map])
        c, *_ = np.linalg.lstsq(A, np.concatenate([U.alpha, U.beta]), rcond=None)
        return c

    def solve(self, b) -> np.ndarray:
        return lu_solve(self.lu, b)


def _linear_blocks(grid: Grid):
    n, x, D, L = grid.n, grid.x, grid.D, grid.L
    I = np.eye(grid.N)
    X = np.diag(x)
    W = np.diag(1 - x**2)
    Mn = [-L + (n - 3) * I, -2 * D, D]
    Ms = [np.zeros_like(I), -L + 2 * X @ D + (2 * n - 4) * I, -2 * I - X @ D]
    Dv = [W @ D - X, (n - 2) * I, np.zeros_like(I)]
    return Mn, Ms, Dv


@functools.lru_cache(maxsize=32)
def assemble(grid: Grid) -> StokesSystem:
    """Assemble and factor the Stokes operators for ``grid``."""
    N, n = grid.N, grid.n
    Mn, Ms, Dv = _linear_blocks(grid)
    nodal = np.block([Mn, Ms, Dv])

    V1 = grid.modal[:, 1:]
    A_alpha = grid.D @ V1
    A_beta = -(grid.L @ V1) / (n - 2) - grid.x[:, None] * A_alpha
    proj = grid.modal_inverse[: N - 1]
    top = np.hstack([proj @ (Mn[0] @ A_alpha + Mn[1] @ A_beta), proj @ Mn[2]])
    bottom = np.hstack([Ms[1] @ A_beta, Ms[2]])
    reduced = np.vstack([top, bottom])
    s = svdvals(reduced)
    if s[-1] <= 1e-13 * s[0]:
        raise np.linalg.LinAlgError(f"singular Stokes assembly (n={n}, N={N}), cond={s[0] / s[-1]:.3e}")
    for a in (nodal, A_alpha, A_beta, proj, reduced):
        a.setflags(write=False)
    return StokesSystem(
        grid, nodal, A_alpha, A_beta, proj, reduced, lu_factor(reduced),
        float(s[-1]), float(s[0] / s[-1]),
    )


@dataclass(frozen=True)
class StokesSolution:
    velocity: AxisymField
    pressure: ScalarSphereField
    residual_norm: float
    divergence_max: float
    condition: float
    coefficients: np.ndarray | None = None


def solve_stokes(sys: StokesSystem, rhs: AxisymField, gauge: bool = False) -> StokesSolution:
    """Solve ``-Delta u + grad p = rhs / r^3``, ``div u = 0``.

    ``rhs`` holds the ``(e_n, sigma)`` coefficients of the right-hand side at
    r = 1.  With ``gauge`` the returned pressure has zero mean.
    """
    gr = sys.grid
    if rhs.grid is not gr:
        raise ValueError("rhs lives on a different grid")
    b = sys.project_rows(rhs.alpha, rhs.beta)
    z = sys.solve(b)
    if not np.all(np.isfinite(z)):
        raise np.linalg.LinAlgError(f"Stokes solve failed, condition estimate {sys.condition:.3e}")
    res = np.abs(sys.reduced @ z - b).max()
    a, be, P = sys.unpack(z)
    if gauge:
        P = P - gr.integrate(P) / gr.area
    U = AxisymField(gr, a, be)
    div = terms.divergence(terms.field_jets(U))
    return StokesSolution(U, ScalarSphereField(gr, P), float(res), float(np.abs(div).max()),
                          sys.condition, z[: gr.N - 1].copy())


def green_tensor(x, n: int) -> np.ndarray:
    """Stokes fundamental solution in R^n (velocity part) at ``x != 0``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"x must have shape ({n},)")
    r = np.linalg.norm(x)
    if r == 0.0:
        raise ValueError("green_tensor is singular at the origin")
    omega = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
    return (np.eye(n) / ((n - 2) * r ** (n - 2)) + np.outer(x, x) / r**n) / (2 * n * omega)


def advection_cartesian(v: AxisymField) -> AxisymField:
    """``(v . grad) v`` at r = 1 from the ambient entries ``d_i v_j``."""
    gr = v.grid
    J = ambient_gradient(v)
    V = v.cartesian()
    A = np.einsum("ki,kij->kj", V, J)
    cn, cs = terms.from_cartesian(gr.x, A)
    return AxisymField(gr, cn, cs)


def picard_map(v: AxisymField, f, lam: float, *, return_solution: bool = False):
    """One application of ``T(lam, v)``: Stokes solve with ``lam f - (v . grad) v``."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    if v.grid is not f.grid:
        raise ValueError("v and f live on different grids")
    rhs = lam * f.field() - advection_cartesian(v)
    sol = solve_stokes(assemble(v.grid), rhs)
    return sol if return_solution else sol.velocity


def pressure_source(U: AxisymField, f=None, lam: float = 1.0) -> np.ndarray:
    """``d_i u_j d_j u_i - lam div f`` at the nodes, from ambient entries."""
    J = ambient_gradient(U)
    src = np.einsum("kij,kji->k", J, J)
    if f is not None:
        src = src - lam * f.divergence().values
    return src


def recover_pressure(U: AxisymField, f=None, lam: float = 1.0) -> ScalarSphereField:
    """Pressure from ``-Delta p = d_i u_j d_j u_i - div f`` for homogeneous data.

    For ``p = P / r^2`` this is ``-Delta_S P + (2n - 8) P = source`` on the
    sphere.  At n = 4 constants are in the kernel; the mean of P is then
    fixed to zero by a bordered system.
    """
    gr = U.grid
    n, N = gr.n, gr.N
    src = pressure_source(U, f, lam)
    A = -gr.L + (2 * n - 8) * np.eye(N)
    if n == 4:
        B = np.zeros((N + 1, N + 1))
        B[:N, :N] = A
        B[:N, N] = 1.0
        B[N, :N] = gr.weights
        sol = np.linalg.solve(B, np.concatenate([src, [0.0]]))
        return ScalarSphereField(gr, sol[:N])
    return ScalarSphereField(gr, np.linalg.solve(A, src))
