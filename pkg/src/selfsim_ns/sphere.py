"""Calculus for axisymmetric, swirl-free, 0-homogeneous fields on S^{n-1}.

Profiles are functions of the polar angle theta, stored at Gauss–Jacobi
nodes in ``x = cos(theta)`` and interpreted as the interpolating polynomial
in ``x``.  A vector field is stored as two profiles ``(alpha, beta)`` with
``U(sigma) = alpha e_n + beta sigma``; smoothness at the poles is then
automatic for polynomial profiles.

All sphere-reduced formulas are cross-checked against a Cartesian route
that builds the full ``n x n`` ambient gradient at each node.
"""
from __future__ import annotations

import functools
import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, roots_jacobi, eval_jacobi

__all__ = [
    "ConsistencyError",
    "Grid",
    "ScalarSphereField",
    "AxisymField",
    "TangentialGradientSample",
    "build_grid",
    "sphere_area",
    "embed_nodes",
    "laplace_beltrami",
    "surface_gradient",
    "divergence_residual",
    "divergence_cartesian",
    "ambient_gradient",
    "tangential_gradient_sample",
    "grad_norm_routes",
    "grad_norm_squared",
    "lp_norm",
]


class ConsistencyError(ArithmeticError):
    """Two independent evaluations of the same quantity disagree."""


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1} in R^n."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _barycentric_weights(x: np.ndarray) -> np.ndarray:
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    logs = -np.sum(np.log(np.abs(diff)), axis=1)
    signs = np.prod(np.sign(diff), axis=1)
    return signs * np.exp(logs - logs.max())


def _differentiation_matrix(x: np.ndarray, bary: np.ndarray) -> np.ndarray:
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (bary[None, :] / bary[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


@dataclass(frozen=True, eq=False)
class Grid:
    """Polar-angle collocation grid on S^{n-1}.

    ``x`` holds ``cos(theta)`` at the nodes (descending, so ``theta``
    ascends).  ``weights`` integrate ``g(theta) sin^{n-2}(theta) dtheta``
    over ``(0, pi)``; multiplying by ``sphere_prefactor`` (the area of
    S^{n-2}) gives integrals over S^{n-1}.
    """

    n: int
    N: int
    x: np.ndarray
    theta: np.ndarray
    weights: np.ndarray
    sphere_prefactor: float
    jacobi_parameter: float
    exact_degree: int
    bary: np.ndarray = field(repr=False)
    D: np.ndarray = field(repr=False)
    L: np.ndarray = field(repr=False)
    modal: np.ndarray = field(repr=False)
    modal_inverse: np.ndarray = field(repr=False)

    @property
    def nodes(self) -> np.ndarray:
        return self.theta

    @property
    def sin(self) -> np.ndarray:
        return np.sqrt(1.0 - self.x**2)

    @property
    def area(self) -> float:
        return sphere_area(self.n)

    def integrate(self, values) -> float:
        """Integral over S^{n-1} of an axisymmetric profile given at the nodes."""
        return float(self.sphere_prefactor * np.dot(self.weights, values))

    def derivative(self, values) -> np.ndarray:
        """d/dx of the interpolant, at the nodes."""
        return self.D @ np.asarray(values, dtype=float)

    def interpolation_matrix(self, xs) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        d = xs[:, None] - self.x[None, :]
        hit = d == 0.0
        d[hit] = 1.0
        t = self.bary / d
        M = t / t.sum(axis=1, keepdims=True)
        rows = hit.any(axis=1)
        if rows.any():
            M[rows] = hit[rows].astype(float)
        return M

    def interpolate(self, values, xs) -> np.ndarray:
        """Evaluate the interpolant of nodal ``values`` at ``xs = cos(theta)``."""
        return self.interpolation_matrix(xs) @ np.asarray(values, dtype=float)

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.n}:{self.N}:".encode())
        h.update(np.ascontiguousarray(self.x).tobytes())
        h.update(np.ascontiguousarray(self.weights).tobytes())
        return h.hexdigest()[:16]


@functools.lru_cache(maxsize=64)
def build_grid(n: int, N: int) -> Grid:
    """Gauss–Jacobi grid for the ``sin^{n-2}`` measure with ``N`` nodes.

    The nodes come from the Jacobi weight ``(1-x^2)^a'`` with
    ``a' = a - floor(a)``, ``a = (n-3)/2``, and the remaining integer power
    of ``(1-x^2)`` is folded into the weights.  This keeps the quadrature
    exact up to degree ``2N - 1 - 2 floor(a)`` while the nodes stay well
    spread, which keeps differentiation well conditioned for large n.
    """
    if int(n) != n or n < 4:
        raise ValueError(f"dimension n must be an integer >= 4, got {n!r}")
    if int(N) != N or N < 8:
        raise ValueError(f"grid size N must be an integer >= 8, got {N!r}")
    n, N = int(n), int(N)
    a = (n - 3) / 2
    m = math.floor(a)
    ap = a - m
    x, w0 = roots_jacobi(N, ap, ap)
    x, w0 = x[::-1].copy(), w0[::-1].copy()
    weights = w0 * (1.0 - x**2) ** m
    bary = _barycentric_weights(x)
    D = _differentiation_matrix(x, bary)
    L = np.diag(1.0 - x**2) @ D @ D - (n - 1) * np.diag(x) @ D

    V = np.column_stack([eval_jacobi(k, ap, ap, x) for k in range(N)])
    V /= np.sqrt((V**2 * w0[:, None]).sum(axis=0))
    Vinv = (V * w0[:, None]).T

    log_pref = math.log(2.0) + (n - 1) / 2 * math.log(math.pi) - gammaln((n - 1) / 2)
    return Grid(
        n=n,
        N=N,
        x=_readonly(x),
        theta=_readonly(np.arccos(x)),
        weights=_readonly(weights),
        sphere_prefactor=math.exp(log_pref),
        jacobi_parameter=ap,
        exact_degree=2 * N - 1 - 2 * m,
        bary=_readonly(bary),
        D=_readonly(D),
        L=_readonly(L),
        modal=_readonly(V),
        modal_inverse=_readonly(Vinv),
    )


def _check_values(grid: Grid, values, name: str) -> np.ndarray:
    v = np.array(values, dtype=float)
    if v.shape == ():
        v = np.full(grid.N, float(v))
    if v.shape != (grid.N,):
        raise ValueError(f"{name} must have shape ({grid.N},), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    v.setflags(write=False)
    return v


def _same_grid(a, b):
    if a.grid is not b.grid:
        raise ValueError("fields live on different grids")


@dataclass(frozen=True, eq=False)
class ScalarSphereField:
    """A 0-homogeneous axisymmetric scalar profile on S^{n-1}."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.grid, self.values, "values"))

    @classmethod
    def from_function(cls, grid: Grid, func) -> "ScalarSphereField":
        """Sample ``func(theta)`` at the nodes."""
        return cls(grid, np.broadcast_to(func(grid.theta), (grid.N,)))

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarSphereField":
        return cls(grid, np.zeros(grid.N))

    def at(self, xs) -> np.ndarray:
        return self.grid.interpolate(self.values, xs)

    def mean(self) -> float:
        return self.grid.integrate(self.values) / self.grid.area

    def __add__(self, other):
        if isinstance(other, ScalarSphereField):
            _same_grid(self, other)
            return ScalarSphereField(self.grid, self.values + other.values)
        return ScalarSphereField(self.grid, self.values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return ScalarSphereField(self.grid, -self.values)

    def __mul__(self, other):
        if isinstance(other, ScalarSphereField):
            _same_grid(self, other)
            return ScalarSphereField(self.grid, self.values * other.values)
        return ScalarSphereField(self.grid, self.values * float(other))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class AxisymField:
    """Swirl-free axisymmetric field ``U(sigma) = alpha e_n + beta sigma``.

    ``u_r = beta + alpha cos(theta)`` and ``u_theta = -alpha sin(theta)``.
    The same container is used for 0-homogeneous traces of forces and
    right-hand sides.
    """

    grid: Grid
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_values(self.grid, self.alpha, "alpha"))
        object.__setattr__(self, "beta", _check_values(self.grid, self.beta, "beta"))

    @classmethod
    def zeros(cls, grid: Grid) -> "AxisymField":
        return cls(grid, np.zeros(grid.N), np.zeros(grid.N))

    @classmethod
    def from_functions(cls, grid: Grid, alpha, beta) -> "AxisymField":
        th = grid.theta
        return cls(grid, np.broadcast_to(alpha(th), (grid.N,)), np.broadcast_to(beta(th), (grid.N,)))

    @classmethod
    def from_potential(cls, grid: Grid, psi) -> "AxisymField":
        """Divergence-free field with tangential part ``grad_S psi``.

        ``u_r = -Delta_S psi / (n-2)`` is forced by the constraint.
        """
        psi = np.asarray(psi, dtype=float)
        dpsi = grid.D @ psi
        alpha = dpsi
        beta = -(grid.L @ psi) / (grid.n - 2) - grid.x * dpsi
        return cls(grid, alpha, beta)

    @property
    def u_r(self) -> np.ndarray:
        return self.beta + self.grid.x * self.alpha

    @property
    def u_theta(self) -> np.ndarray:
        return -self.alpha * self.grid.sin

    def squared_norm(self) -> np.ndarray:
        """|U|^2 at the nodes."""
        return self.alpha**2 + self.beta**2 + 2.0 * self.grid.x * self.alpha * self.beta

    def cartesian(self) -> np.ndarray:
        """Ambient components ``U_j`` at the embedded nodes, shape (N, n)."""
        sig = embed_nodes(self.grid)
        U = self.beta[:, None] * sig
        U[:, -1] += self.alpha
        return U

    def pole_values(self) -> np.ndarray:
        """Cartesian ``U`` at the north and south poles (rows), via the interpolants."""
        a = self.grid.interpolate(self.alpha, [1.0, -1.0])
        b = self.grid.interpolate(self.beta, [1.0, -1.0])
        out = np.zeros((2, self.grid.n))
        out[:, -1] = a + b * np.array([1.0, -1.0])
        return out

    def __add__(self, other):
        _same_grid(self, other)
        return AxisymField(self.grid, self.alpha + other.alpha, self.beta + other.beta)

    def __sub__(self, other):
        _same_grid(self, other)
        return AxisymField(self.grid, self.alpha - other.alpha, self.beta - other.beta)

    def __neg__(self):
        return AxisymField(self.grid, -self.alpha, -self.beta)

    def __mul__(self, c):
        c = float(c)
        return AxisymField(self.grid, c * self.alpha, c * self.beta)

    __rmul__ = __mul__


def embed_nodes(grid: Grid) -> np.ndarray:
    """Nodes as points of S^{n-1} in the (e_1, e_n) half-plane, shape (N, n)."""
    sig = np.zeros((grid.N, grid.n))
    sig[:, 0] = grid.sin
    sig[:, -1] = grid.x
    return sig


def laplace_beltrami(g: ScalarSphereField) -> ScalarSphereField:
    """``Delta_S g = (1-x^2) g'' - (n-1) x g'`` for an axisymmetric profile."""
    return ScalarSphereField(g.grid, g.grid.L @ g.values)


def surface_gradient(g: ScalarSphereField) -> ScalarSphereField:
    """Polar component ``dg/dtheta`` of the spherical gradient."""
    return ScalarSphereField(g.grid, -g.grid.sin * (g.grid.D @ g.values))


def divergence_residual(U: AxisymField) -> ScalarSphereField:
    """``div_S U^t + (n-2) u_r`` in profile form."""
    gr = U.grid
    x = gr.x
    val = (1.0 - x**2) * (gr.D @ U.alpha) - x * U.alpha + (gr.n - 2) * U.beta
    return ScalarSphereField(gr, val)


def _surface_gradient_components(n, x, s, a0, a1, b0, b1):
    """``(grad_S U_j)_i`` for points ``sigma = s e_1 + x e_n``; shape (m, n, n)."""
    m = len(x)
    sig = np.zeros((m, n))
    sig[:, 0] = s
    sig[:, -1] = x
    t = -x[:, None] * sig
    t[:, -1] += 1.0
    eye = np.eye(n)
    G = b0[:, None, None] * (eye[None] - sig[:, :, None] * sig[:, None, :])
    G += b1[:, None, None] * t[:, :, None] * sig[:, None, :]
    G[:, :, -1] += a1[:, None] * t
    return sig, G


def _ambient_from_profiles(n, x, s, a0, a1, b0, b1, degree):
    sig, G = _surface_gradient_components(n, x, s, a0, a1, b0, b1)
    U = b0[:, None] * sig
    U[:, -1] += a0
    return G + degree * sig[:, :, None] * U[:, None, :]


def ambient_gradient(U: AxisymField, degree: int = -1) -> np.ndarray:
    """Ambient partials ``d_i u_j`` at the embedded nodes, at radius one.

    ``u(r sigma) = r^degree U(sigma)``, so ``d_i u_j = (grad_S U_j)_i +
    degree * sigma_i U_j``.  Returned as an array indexed ``[k, i, j]``.
    """
    gr = U.grid
    return _ambient_from_profiles(
        gr.n, gr.x, gr.sin, U.alpha, gr.D @ U.alpha, U.beta, gr.D @ U.beta, degree
    )


def divergence_cartesian(U: AxisymField) -> ScalarSphereField:
    """``sum_i d_i u_i`` from the Cartesian entries."""
    J = ambient_gradient(U)
    return ScalarSphereField(U.grid, np.trace(J, axis1=1, axis2=2))


@dataclass(frozen=True)
class TangentialGradientSample:
    index: int
    sigma: np.ndarray
    surface: np.ndarray  # [i, j] = (grad_S U_j)_i
    ambient: np.ndarray  # [i, j] = d_i u_j

    def tangency_defect(self) -> float:
        """max_j |sigma . grad_S U_j|."""
        return float(np.abs(self.sigma @ self.surface).max())


def tangential_gradient_sample(U: AxisymField, k: int) -> TangentialGradientSample:
    gr = U.grid
    sl = slice(k, k + 1)
    a1 = gr.D @ U.alpha
    b1 = gr.D @ U.beta
    sig, G = _surface_gradient_components(
        gr.n, gr.x[sl], gr.sin[sl], U.alpha[sl], a1[sl], U.beta[sl], b1[sl]
    )
    J = _ambient_from_profiles(
        gr.n, gr.x[sl], gr.sin[sl], U.alpha[sl], a1[sl], U.beta[sl], b1[sl], -1
    )
    return TangentialGradientSample(k, sig[0], G[0], J[0])


def grad_norm_routes(U: AxisymField) -> tuple[float, float]:
    """``int |grad u|^2`` from the ambient entries, and from ``|grad_S U|^2 + |U|^2``."""
    gr = U.grid
    J = ambient_gradient(U)
    route_a = gr.integrate(np.sum(J**2, axis=(1, 2)))
    x = gr.x
    a, b = U.alpha, U.beta
    a1, b1 = gr.D @ a, gr.D @ b
    surf = (1 - x**2) * (a1**2 + b1**2 + 2 * x * a1 * b1 + 2 * b * a1) + (gr.n - 1) * b**2
    route_b = gr.integrate(surf + U.squared_norm())
    return route_a, route_b


def grad_norm_squared(U: AxisymField, rtol: float = 1e-10) -> float:
    """``int_{S^{n-1}} |grad u|^2`` with the two routes checked against each other."""
    a, b = grad_norm_routes(U)
    if abs(a - b) > rtol * max(abs(a), abs(b)) + 1e-300:
        raise ConsistencyError(f"gradient-norm routes disagree: {a!r} vs {b!r}")
    return a


def lp_norm(g, p: float) -> float:
    """L^p(S^{n-1}) norm of a scalar profile."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    gr = g.grid
    vals = np.abs(g.values)
    if math.isinf(p):
        return float(vals.max())
    return gr.integrate(vals**p) ** (1.0 / p)
