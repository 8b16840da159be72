"""Total head pressure ``H = |u|^2 / 2 + p`` and its equations on the sphere.

For a (-1)-homogeneous solution ``H = Hbar(sigma) / r^2``.  Two relations
are checked here:

* the radial relation ``-Delta_S u_r + u^t . grad_S u_r = 2 Hbar + f_r``,
* the drift-diffusion equation
  ``-Delta H + u . grad H = -|d_i u_j - d_j u_i|^2 / 2 + f . u - div f``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import ambient, terms
from .sphere import (AxisymField, ScalarSphereField, ambient_gradient, laplace_beltrami,
                     lp_norm, surface_gradient)

__all__ = [
    "Exponents",
    "exponents",
    "head",
    "radial_relation_residual",
    "head_pde_residual",
    "head_pde_ambient_deviation",
    "positive_part",
    "negative_part",
    "positive_part_norms",
]


@dataclass(frozen=True)
class Exponents:
    n: int
    theta: Fraction
    q: Fraction
    theta_conjugate: Fraction
    q_conjugate: Fraction

    @property
    def in_existence_range(self) -> bool:
        """True when ``1 < q < 4``, which holds exactly for 5 <= n <= 16."""
        return 1 < self.q < 4

    @property
    def regularity_margin(self) -> bool:
        """``theta > n / 2``."""
        return self.theta > Fraction(self.n, 2)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "theta": float(self.theta),
            "theta_exact": str(self.theta),
            "q": float(self.q),
            "q_exact": str(self.q),
            "theta_conjugate": float(self.theta_conjugate),
            "q_conjugate": float(self.q_conjugate),
            "in_existence_range": self.in_existence_range,
            "theta_above_half_dimension": self.regularity_margin,
        }


def exponents(n: int) -> Exponents:
    """Critical integrability exponents, in exact rational arithmetic.

    ``theta = (n-2)(n-1) / (2(n-3))`` and ``q = (n-2)(n-1) / (4n-10)``.
    For 5 <= n <= 16 the invariants ``q < 4``, ``theta > n/2`` and
    ``theta' < 2`` are asserted.
    """
    if int(n) != n or n < 5:
        raise ValueError(f"exponents need an integer n >= 5, got {n!r}")
    n = int(n)
    theta = Fraction((n - 2) * (n - 1), 2 * (n - 3))
    q = Fraction((n - 2) * (n - 1), 4 * n - 10)
    ex = Exponents(n, theta, q, theta / (theta - 1), q / (q - 1))
    if n <= 16:
        assert ex.q < 4 and ex.theta > Fraction(n, 2) and ex.theta_conjugate < 2, ex
    return ex


def head(U: AxisymField, P: ScalarSphereField) -> ScalarSphereField:
    if U.grid is not P.grid:
        raise ValueError("fields live on different grids")
    return ScalarSphereField(U.grid, 0.5 * U.squared_norm() + P.values)


def radial_relation_residual(U: AxisymField, H: ScalarSphereField, f, lam: float = 1.0) -> ScalarSphereField:
    """Nodewise ``-Delta_S u_r + u^t . grad_S u_r - 2H - lam f_r``."""
    gr = U.grid
    ur = ScalarSphereField(gr, U.u_r)
    drift = U.u_theta * surface_gradient(ur).values
    fr = 0.0 if f is None else lam * f.radial
    return ScalarSphereField(gr, -laplace_beltrami(ur).values + drift - 2 * H.values - fr)


def _vorticity_square(U: AxisymField) -> np.ndarray:
    J = ambient_gradient(U)
    W = J - np.swapaxes(J, 1, 2)
    return np.sum(W**2, axis=(1, 2))


def head_pde_residual(U: AxisymField, H: ScalarSphereField, f, lam: float = 1.0) -> ScalarSphereField:
    """Residual of the head-pressure equation, reduced to the unit sphere.

    ``-Delta_S H + (2n-8) H - 2 u_r H + u^t . grad_S H + Omega / 2 - F.U + div f``
    with ``Omega`` the full double sum of squared vorticity entries.
    """
    gr = U.grid
    n = gr.n
    lap = laplace_beltrami(H).values
    drift = U.u_theta * surface_gradient(H).values
    res = -lap + (2 * n - 8) * H.values - 2 * U.u_r * H.values + drift + 0.5 * _vorticity_square(U)
    if f is not None:
        work = np.sum(U.cartesian() * f.field().cartesian(), axis=1)
        res = res - lam * work + lam * f.divergence().values
    return ScalarSphereField(gr, res)


def head_pde_ambient_deviation(U: AxisymField, P: ScalarSphereField, f=None, lam: float = 1.0,
                               sample_count: int = 16, step: float = 1e-4, seed=0) -> float:
    """Compare :func:`head_pde_residual` with an n-dimensional FD evaluation.

    Sample points sit at the polar angles of randomly chosen nodes with a
    random azimuthal direction, so the reduced residual is read off at the
    nodes.  Returns the max deviation relative to the largest term.
    """
    gr = U.grid
    n = gr.n
    rng = np.random.default_rng(seed)
    ks = rng.choice(gr.N, size=min(sample_count, gr.N), replace=False)
    nu = rng.standard_normal((ks.size, n - 1))
    nu /= np.linalg.norm(nu, axis=1, keepdims=True)
    X = np.zeros((ks.size, n))
    X[:, : n - 1] = gr.sin[ks, None] * nu
    X[:, -1] = gr.x[ks]

    F = None if f is None else f.field()
    uf = lambda Y: ambient.vector_at(U, Y, -1)
    Hf = lambda Y: 0.5 * np.sum(uf(Y) ** 2, axis=1) + ambient.scalar_at(P, Y, -2)
    h = step
    J = ambient.fd_gradient(uf, X, h)
    W = J - np.swapaxes(J, 1, 2)
    u = uf(X)
    parts = {
        "diffusion": -ambient.fd_laplacian(Hf, X, h),
        "drift": np.sum(u * ambient.fd_gradient(Hf, X, h), axis=1),
        "vorticity": 0.5 * np.sum(W**2, axis=(1, 2)),
    }
    if F is not None:
        ff = lambda Y: ambient.vector_at(F, Y, -3)
        parts["work"] = -lam * np.sum(ff(X) * u, axis=1)
        parts["divf"] = lam * np.trace(ambient.fd_gradient(ff, X, h), axis1=1, axis2=2)
    fd = sum(parts.values())
    red = head_pde_residual(U, head(U, P), f, lam).values[ks]
    scale = max(np.abs(v).max() for v in parts.values())
    dev = float(np.abs(fd - red).max())
    return dev / scale if scale > 0 else dev


def positive_part(H: ScalarSphereField) -> ScalarSphereField:
    return ScalarSphereField(H.grid, np.clip(H.values, 0.0, None))


def negative_part(H: ScalarSphereField) -> ScalarSphereField:
    return ScalarSphereField(H.grid, np.clip(-H.values, 0.0, None))


def positive_part_norms(H: ScalarSphereField, n: int | None = None):
    """``(||H_+||_{L^theta}, ||H_-||_{L^1}, ||H_+||_{L^1})``."""
    n = H.grid.n if n is None else n
    if n != H.grid.n:
        raise ValueError("n does not match the grid dimension")
    th = float(exponents(n).theta)
    Hp, Hm = positive_part(H), negative_part(H)
    return lp_norm(Hp, th), lp_norm(Hm, 1.0), lp_norm(Hp, 1.0)
