"""Ambient finite-difference evaluation of homogeneous fields in R^n.

Sphere data are extended to R^n \\ {0} by homogeneity (``u = U/r``,
``p = P/r^2``, ``f = F/r^3``) and differentiated with fourth-order central
differences in the n Cartesian variables.  This is the independent oracle
for every sphere-reduced formula.
"""
from __future__ import annotations

import numpy as np

from . import terms
from .sphere import AxisymField, ConsistencyError, ScalarSphereField

__all__ = [
    "sphere_points",
    "vector_at",
    "scalar_at",
    "fd_gradient",
    "fd_laplacian",
    "fd_navier_stokes",
    "reduced_navier_stokes",
    "ambient_deviation",
    "ambient_consistency_check",
]

_D1 = ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12))
_D2 = ((-2, -1 / 12), (-1, 16 / 12), (0, -30 / 12), (1, 16 / 12), (2, -1 / 12))


def sphere_points(n: int, count: int, seed=0) -> np.ndarray:
    """Uniform random points on S^{n-1}, shape (count, n)."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((count, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def vector_at(V: AxisymField, X, degree: int = -1) -> np.ndarray:
    """``r^degree (alpha e_n + beta sigma)`` at points ``X`` (m, n)."""
    X = np.atleast_2d(X)
    r = np.linalg.norm(X, axis=1)
    sig = X / r[:, None]
    M = V.grid.interpolation_matrix(sig[:, -1])
    a, b = M @ V.alpha, M @ V.beta
    out = b[:, None] * sig
    out[:, -1] += a
    return out * r[:, None] ** degree


def scalar_at(G: ScalarSphereField, X, degree: int = -2) -> np.ndarray:
    X = np.atleast_2d(X)
    r = np.linalg.norm(X, axis=1)
    return G.at(X[:, -1] / r) * r**degree


def fd_gradient(func, X, h):
    """``[k, i, ...] = d_i func`` at each row of X."""
    X = np.atleast_2d(X)
    m, n = X.shape
    out = None
    for i in range(n):
        acc = 0.0
        for s, c in _D1:
            Y = X.copy()
            Y[:, i] += s * h
            acc = acc + c * func(Y)
        acc = acc / h
        if out is None:
            out = np.zeros((m, n) + np.shape(acc)[1:])
        out[:, i] = acc
    return out


def fd_laplacian(func, X, h):
    X = np.atleast_2d(X)
    n = X.shape[1]
    acc = 0.0
    for i in range(n):
        for s, c in _D2:
            Y = X.copy()
            Y[:, i] += s * h
            acc = acc + c * func(Y)
    return acc / h**2


def fd_navier_stokes(U, P, F=None, lam=1.0, X=None, h=1e-4):
    """Terms of ``-Delta u + (u.grad)u + grad p - lam f`` and ``div u`` by finite differences.

    Returns a dict of (m, n) arrays plus ``"div"`` (m,).
    """
    uf = lambda Y: vector_at(U, Y, -1)
    J = fd_gradient(uf, X, h)  # [k, i, j] = d_i u_j
    u = uf(X)
    out = {
        "viscous": -fd_laplacian(uf, X, h),
        "advection": np.einsum("ki,kij->kj", u, J),
        "pressure": fd_gradient(lambda Y: scalar_at(P, Y, -2), X, h),
        "force": np.zeros_like(u) if F is None else -lam * vector_at(F, X, -3),
        "div": np.trace(J, axis1=1, axis2=2),
    }
    out["momentum"] = out["viscous"] + out["advection"] + out["pressure"] + out["force"]
    return out


def _embed(x_sig, cn, cs):
    """``cn e_n + cs sigma`` for general unit vectors ``sigma`` (rows of x_sig)."""
    out = cs[:, None] * x_sig
    out[:, -1] += cn
    return out


def reduced_navier_stokes(U, P, F=None, lam=1.0, X=None):
    """The same terms as :func:`fd_navier_stokes` from the sphere-reduced formulas."""
    X = np.atleast_2d(X)
    r = np.linalg.norm(X, axis=1)
    sig = X / r[:, None]
    xs = sig[:, -1]
    j = terms.point_jets(U, xs)
    p0, p1 = terms.scalar_jets(P.grid, P.values, xs)
    vis = _embed(sig, *terms.viscous(j))
    adv = _embed(sig, *terms.convective(j))
    prs = _embed(sig, *terms.pressure_gradient(xs, p0, p1))
    if F is None:
        frc = np.zeros_like(vis)
    else:
        M = F.grid.interpolation_matrix(xs)
        frc = -lam * _embed(sig, M @ F.alpha, M @ F.beta)
    # radial scaling of each term: u ~ r^-1 so every momentum term is r^-3, div is r^-2
    s3 = r[:, None] ** -3
    out = {
        "viscous": vis * s3,
        "advection": adv * s3,
        "pressure": prs * s3,
        "force": frc * s3,
        "div": terms.divergence(j) * r**-2,
    }
    out["momentum"] = out["viscous"] + out["advection"] + out["pressure"] + out["force"]
    return out


def ambient_deviation(U, P, F=None, lam=1.0, X=None, h=1e-4) -> float:
    """Max deviation between FD and reduced residuals, relative to the largest term."""
    fd = fd_navier_stokes(U, P, F, lam, X, h)
    rd = reduced_navier_stokes(U, P, F, lam, X)
    scale = max(np.abs(rd[k]).max() for k in ("viscous", "advection", "pressure", "force", "div"))
    dev = max(np.abs(fd["momentum"] - rd["momentum"]).max(), np.abs(fd["div"] - rd["div"]).max())
    if scale == 0.0:
        return float(dev)
    return float(dev / scale)


def ambient_consistency_check(U: AxisymField, P: ScalarSphereField, sample_count: int = 16,
                              f=None, lam: float = 1.0, step: float = 1e-4, seed=0,
                              threshold: float = 1e-6) -> float:
    """Compare the reduced Navier–Stokes residual with an n-dimensional FD evaluation.

    ``f`` may be a ForceSpec or an AxisymField of force coefficients.
    Raises :class:`ConsistencyError` when the deviation exceeds ``threshold``.
    """
    if sample_count < 4:
        raise ValueError("sample_count must be >= 4")
    F = f.field() if hasattr(f, "field") else f
    X = sphere_points(U.grid.n, sample_count, seed)
    dev = ambient_deviation(U, P, F, lam, X, step)
    if dev > threshold:
        raise ConsistencyError(f"ambient deviation {dev:.3e} exceeds {threshold:.1e}")
    return dev
