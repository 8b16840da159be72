"""Built-in (-3)-homogeneous axisymmetric force families.

A force is ``f(r sigma) = F(sigma) / r^3`` with ``F = g_n e_n + g_sigma sigma``.
Families are specified by the radial component ``f^r`` and the polar
component ``f^theta`` (along ``e_theta``), both polynomial in ``cos(theta)``
up to a factor ``sin(theta)`` for ``f^theta``; this keeps the Cartesian
field smooth at the poles and exactly representable on the grid.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import terms
from .sphere import AxisymField, Grid, ScalarSphereField, _ambient_from_profiles

__all__ = ["ForceFamily", "ForceSpec", "FAMILIES", "make_force", "analytic_div"]


@dataclass(frozen=True)
class ForceFamily:
    """Closed-form profiles of a force family, as functions of ``x = cos(theta)``.

    ``normal(x, **p)`` returns ``g_n``, so that ``f^theta = -sin(theta) g_n``;
    ``div(n, x, **p)`` is the analytic ``div f`` at r = 1.
    """

    name: str
    radial: Callable
    normal: Callable
    div: Callable
    nonnegative_radial: Callable  # params -> bool
    defaults: dict = field(default_factory=dict)
    smoothness: str = "polynomial"


def _zeros(x, **_):
    return np.zeros_like(x)


FAMILIES: dict[str, ForceFamily] = {
    "zero": ForceFamily(
        "zero", _zeros, _zeros, lambda n, x, **_: np.zeros_like(x), lambda **_: True
    ),
    "radial-constant": ForceFamily(
        "radial-constant",
        lambda x, **_: np.ones_like(x),
        _zeros,
        lambda n, x, **_: (n - 4) * np.ones_like(x),
        lambda **_: True,
    ),
    "radial-cosine": ForceFamily(
        "radial-cosine",
        lambda x, offset=1.0: offset + x,
        _zeros,
        lambda n, x, offset=1.0: (n - 4) * (offset + x),
        lambda offset=1.0: offset >= 1.0,
        {"offset": 1.0},
    ),
    "radial-cos": ForceFamily(
        "radial-cos",
        lambda x, **_: np.array(x, dtype=float),
        _zeros,
        lambda n, x, **_: (n - 4) * x,
        lambda **_: False,
    ),
    "mixed": ForceFamily(
        "mixed",
        lambda x, **_: np.array(x, dtype=float),
        lambda x, **_: -np.ones_like(x),
        lambda n, x, **_: (2 * n - 5) * x,
        lambda **_: False,
    ),
    "tangential": ForceFamily(
        "tangential",
        _zeros,
        lambda x, **_: -np.ones_like(x),
        lambda n, x, **_: (n - 1) * x,
        lambda **_: False,
    ),
}


@dataclass(frozen=True, eq=False)
class ForceSpec:
    """Force profiles on a grid.  ``f_r`` and ``f_t`` are unit-amplitude shapes."""

    grid: Grid
    f_r: np.ndarray
    f_t: np.ndarray
    amplitude: float = 1.0
    family: str | None = None
    params: dict = field(default_factory=dict)
    div_shape: np.ndarray | None = None  # analytic div of the unit shape, if known

    def __post_init__(self):
        for name in ("f_r", "f_t"):
            v = np.array(getattr(self, name), dtype=float)
            if v.shape == ():
                v = np.full(self.grid.N, float(v))
            if v.shape != (self.grid.N,) or not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be a finite profile of length {self.grid.N}")
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        if not np.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")
        object.__setattr__(self, "amplitude", float(self.amplitude))

    @classmethod
    def from_functions(cls, grid: Grid, f_r, f_t=None, amplitude=1.0) -> "ForceSpec":
        """Custom force from callables of theta; no analytic divergence attached."""
        th = grid.theta
        fr = np.broadcast_to(f_r(th), (grid.N,))
        ft = np.zeros(grid.N) if f_t is None else np.broadcast_to(f_t(th), (grid.N,))
        return cls(grid, fr, ft, amplitude)

    def with_amplitude(self, A: float) -> "ForceSpec":
        return dataclasses.replace(self, amplitude=float(A))

    @property
    def g_n(self) -> np.ndarray:
        return -self.amplitude * self.f_t / self.grid.sin

    @property
    def g_sigma(self) -> np.ndarray:
        return self.amplitude * self.f_r - self.grid.x * self.g_n

    def field(self) -> AxisymField:
        """The trace ``F`` as an (e_n, sigma) pair, amplitude included."""
        return AxisymField(self.grid, self.g_n, self.g_sigma)

    @property
    def radial(self) -> np.ndarray:
        return self.amplitude * self.f_r

    @property
    def is_radial_nonnegative(self) -> bool:
        return bool(np.all(self.f_t == 0.0) and np.all(self.amplitude * self.f_r >= 0.0))

    @property
    def div_route(self) -> str:
        return "analytic" if self.div_shape is not None else "spectral"

    def spectral_divergence(self) -> ScalarSphereField:
        gr = self.grid
        gn = self.g_n
        return ScalarSphereField(gr, terms.force_divergence(gr.n, gr.x, gn, gr.D @ gn, self.g_sigma))

    def divergence(self) -> ScalarSphereField:
        if self.div_shape is None:
            return self.spectral_divergence()
        return ScalarSphereField(self.grid, self.amplitude * self.div_shape)

    def lipschitz_norm(self) -> float:
        """``sup |f| + sup |grad f|`` on the unit sphere.

        Evaluated at the nodes and at both poles (through the interpolants),
        since polynomial forces often peak at the poles.
        """
        gr = self.grid
        xs = np.concatenate([[1.0], gr.x, [-1.0]])
        gn, gs = self.g_n, self.g_sigma
        M = gr.interpolation_matrix(xs)
        n0, n1 = M @ gn, M @ (gr.D @ gn)
        s0, s1 = M @ gs, M @ (gr.D @ gs)
        size = np.sqrt(np.abs(terms.squared_norm(xs, n0, s0)))
        sin = np.sqrt(np.clip(1 - xs**2, 0.0, None))
        J = _ambient_from_profiles(gr.n, xs, sin, n0, n1, s0, s1, -3)
        grad = np.sqrt(np.sum(J**2, axis=(1, 2)))
        return float(size.max() + grad.max())


def make_force(family: str, params: dict | None = None, grid: Grid | None = None, *,
               amplitude: float = 1.0, radial_only: bool = False) -> ForceSpec:
    """Sample a registered family on ``grid``.

    ``radial_only`` requests the nonnegative purely radial regime and
    raises if the family does not qualify.
    """
    if grid is None:
        raise ValueError("a grid is required")
    try:
        fam = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown force family {family!r}; known: {sorted(FAMILIES)}") from None
    p = dict(fam.defaults)
    unknown = set(params or {}) - set(fam.defaults)
    if unknown:
        raise ValueError(f"family {family!r} takes no parameters {sorted(unknown)}")
    p.update(params or {})
    x = grid.x
    gn = fam.normal(x, **p)
    f_t = -grid.sin * gn
    spec = ForceSpec(grid, fam.radial(x, **p), f_t, amplitude, family, p, analytic_div(family, p, grid, _shape=True))
    if radial_only and not (fam.nonnegative_radial(**p) and spec.is_radial_nonnegative):
        raise ValueError(f"family {family!r} with {p} is not a nonnegative radial force")
    return spec


def analytic_div(family: str, params: dict | None, grid: Grid, *, _shape: bool = False):
    """Closed-form ``div f`` at r = 1 for a unit-amplitude family member."""
    fam = FAMILIES[family]
    p = dict(fam.defaults)
    p.update(params or {})
    vals = np.broadcast_to(fam.div(grid.n, grid.x, **p), (grid.N,)).astype(float)
    if _shape:
        vals.setflags(write=False)
        return vals
    return ScalarSphereField(grid, vals)
