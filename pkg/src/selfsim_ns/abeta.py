"""Numerical check that ``a(x) = |x|^{2b-n+1} / (1+|x|)^2`` is an A_b weight.

The A_b product of a ball ``B_R(x0)`` is

    (avg_B a) * (avg_B a^{-1/(b-1)})^{b-1}

For a radial weight only the measure of each sphere ``|x| = r`` inside the
ball matters, so every average reduces to a one-dimensional integral in
``r``.  Off-center balls weight each radius by the fraction of the sphere
lying in the ball (a spherical cap, via the regularized incomplete beta).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import betainc

__all__ = [
    "WeightConfig",
    "weight_value",
    "cap_fraction",
    "ball_average",
    "abeta_product",
    "default_balls",
    "ball_case",
    "pointwise_bounds",
    "ScanResult",
    "abeta_scan",
]


@dataclass(frozen=True)
class WeightConfig:
    n: int
    beta: float
    balls: Sequence = ()  # (center norm, radius) pairs
    epsrel: float = 1e-10
    cap: float = 1e6  # products above this are flagged

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not self.beta > 1:
            raise ValueError("beta must exceed 1")
        for d, R in self.balls:
            if R <= 0 or d < 0:
                raise ValueError(f"invalid ball (|x0|={d}, R={R})")

    @property
    def exponent(self) -> float:
        return 2 * self.beta - self.n + 1


def weight_value(x_norm: float, cfg: WeightConfig) -> float:
    e = cfg.exponent
    if x_norm < 0 or (x_norm == 0 and e < 0):
        raise ValueError(f"weight undefined at |x| = {x_norm} for exponent {e}")
    return x_norm**e / (1 + x_norm) ** 2


def cap_fraction(r, d: float, R: float, n: int):
    """Fraction of the sphere ``|x| = r`` inside ``B_R(x0)`` with ``|x0| = d``."""
    r = np.asarray(r, dtype=float)
    if d == 0:
        return (r < R).astype(float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        c0 = (r**2 + d**2 - R**2) / (2 * r * d)
        c0 = np.where(r == 0, -np.inf if R > d else np.inf, c0)
        half = 0.5 * betainc((n - 1) / 2, 0.5, np.clip(1 - c0**2, 0.0, 1.0))
    frac = np.where(c0 >= 0, half, 1 - half)
    return np.where(c0 >= 1, 0.0, np.where(c0 <= -1, 1.0, frac))


def ball_average(g: Callable, d: float, R: float, n: int, epsrel=1e-10, *, with_measure=False) -> float:
    """Average over ``B_R(x0)`` of a radial function ``g(r)``; ``|x0| = d``.

    With ``with_measure=True`` the callable already includes the ``r^{n-1}``
    factor, which avoids overflow of singular powers near the origin.
    """
    lo, hi = max(0.0, d - R), d + R
    pts = sorted({p for p in (R - d, d, R) if lo < p < hi})
    dens = g if with_measure else (lambda r: g(r) * r ** (n - 1))
    if d == 0:
        integrand = dens
    else:
        integrand = lambda r: dens(r) * float(cap_fraction(r, d, R, n))
    edges = [lo, *pts, hi]
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        val, _ = quad(integrand, a, b, epsabs=0.0, epsrel=epsrel, limit=200)
        total += val
    return n * total / R**n


def abeta_product(x0, R: float, cfg: WeightConfig, weight: Callable | None = None) -> float:
    """A_b product of the ball ``B_R(x0)``; ``x0`` is a point or its norm.

    ``weight`` overrides the radial weight ``a(r)`` (used for sanity checks).
    """
    if R <= 0:
        raise ValueError("R must be positive")
    d = float(np.linalg.norm(np.atleast_1d(x0)))
    b, n = cfg.beta, cfg.n
    if weight is None:
        e = cfg.exponent
        # merge r^{n-1} into a single power: 2b and b(n-3)/(b-1), both >= 0 for n >= 3
        a = lambda r: r ** (n - 1 + e) / (1 + r) ** 2
        ainv = lambda r: r ** (n - 1 - e / (b - 1)) * (1 + r) ** (2 / (b - 1))
        first = ball_average(a, d, R, n, cfg.epsrel, with_measure=True)
        second = ball_average(ainv, d, R, n, cfg.epsrel, with_measure=True)
    else:
        first = ball_average(weight, d, R, n, cfg.epsrel)
        second = ball_average(lambda r: weight(r) ** (-1 / (b - 1)), d, R, n, cfg.epsrel)
    return first * second ** (b - 1)


def ball_case(d: float, R: float) -> str:
    """Which of the four ball regimes (centered or not, small or large) a ball falls into."""
    if d == 0:
        return "centered-small" if R < 2 else "centered-large"
    return "offcenter-large" if R > 0.5 * d else "offcenter-small"


def default_balls(count: int = 100):
    """Log-spaced balls, split evenly over the four regimes."""
    k = count // 4
    extra = count - 4 * k
    balls = [(0.0, R) for R in np.geomspace(1e-3, 1.99, k + extra)]
    balls += [(0.0, R) for R in np.geomspace(2.0, 1e4, k)]
    ds = np.geomspace(1e-3, 1e3, k)
    big = np.geomspace(0.51, 20.0, k)
    small = np.geomspace(1e-3, 0.5, k)[::-1]
    balls += [(float(d), float(d * s)) for d, s in zip(ds, big)]
    balls += [(float(d), float(d * s)) for d, s in zip(ds, small)]
    return balls


def pointwise_bounds(d: float, cfg: WeightConfig):
    """Lower and upper bounds of ``a`` on any ball with ``R <= |x0| / 2``."""
    e = cfg.exponent
    lo_r, hi_r = (0.5 * d, 1.5 * d) if e >= 0 else (1.5 * d, 0.5 * d)
    if d >= 2:
        # d/2 <= 1 + r <= 2d on the ball
        return lo_r**e * (2 * d) ** -2, hi_r**e * 4 * d**-2
    return lo_r**e / 16, hi_r**e


@dataclass
class ScanResult:
    sup: float
    rows: list = field(default_factory=list)  # (center_norm, radius, product, case)
    flagged: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["center_norm", "radius", "product"])
        for d, R, p, _ in self.rows:
            w.writerow([repr(float(d)), repr(float(R)), repr(float(p))])
        return buf.getvalue()


def abeta_scan(cfg: WeightConfig) -> ScanResult:
    balls = list(cfg.balls) or default_balls()
    rows = []
    for d, R in balls:
        p = abeta_product(d, R, cfg)
        rows.append((float(d), float(R), float(p), ball_case(d, R)))
    sup = max(r[2] for r in rows)
    if not math.isfinite(sup):
        raise ArithmeticError("A_beta scan produced a non-finite product")
    flagged = [r for r in rows if r[2] > cfg.cap]
    return ScanResult(sup, rows, flagged)
