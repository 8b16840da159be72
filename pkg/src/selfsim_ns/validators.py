"""Integral identities and estimate reports for a (U, P, f, lam) tuple.

Identities hold exactly for true solutions and are asserted by callers;
inequalities whose constants are unknown are only reported as ratios
LHS / RHS.  The one inequality that follows from the identities alone,
the energy split, is checked with a relative tolerance.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .head import exponents, head, head_pde_residual, negative_part, positive_part, radial_relation_residual
from .sphere import (AxisymField, ScalarSphereField, divergence_residual, grad_norm_routes,
                     grad_norm_squared, lp_norm)

__all__ = [
    "IdentityReport",
    "energy_identity_gap",
    "radial_average_gap",
    "sobolev_identity_gap",
    "energy_split",
    "pressure_norms",
    "estimate_report",
    "identities_pass",
    "safe_ratio",
]


@dataclass
class IdentityReport:
    energy_identity_gap: float
    sobolev_identity_gap: float
    radial_average_gap: float
    nsnorm2_max_residual: float
    headpde_max_residual: float
    divergence_max: float
    estimate_ratios: dict
    x_norm: float
    relative: dict = field(default_factory=dict)
    energy_split_holds: bool = True
    norms: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def _force_work(U: AxisymField, f, lam) -> np.ndarray:
    if f is None:
        return np.zeros(U.grid.N)
    return lam * np.sum(U.cartesian() * f.field().cartesian(), axis=1)


def _energy_sides(U, P, f, lam):
    gr = U.grid
    n = gr.n
    H = head(U, P)
    lhs = grad_norm_squared(U) + gr.integrate((n - 4) * U.squared_norm() + (n - 4) * H.values * U.u_r)
    rhs = gr.integrate(_force_work(U, f, 1.0))
    return lhs, lam * rhs


def energy_identity_gap(U: AxisymField, P: ScalarSphereField, f, lam: float = 1.0) -> float:
    """``|int |grad u|^2 + (n-4)|u|^2 + (n-4) H u_r - lam int f.u|``."""
    lhs, rhs = _energy_sides(U, P, f, lam)
    return abs(lhs - rhs)


def radial_average_gap(U: AxisymField, H: ScalarSphereField, f, lam: float = 1.0) -> float:
    """``|int (n-2) u_r^2 + 2 H_- - 2 H_+ - lam f_r|``."""
    gr = U.grid
    fr = 0.0 if f is None else lam * f.radial
    Hp, Hm = positive_part(H).values, negative_part(H).values
    return abs(gr.integrate((gr.n - 2) * U.u_r**2 + 2 * Hm - 2 * Hp - fr))


def sobolev_identity_gap(U: AxisymField) -> float:
    a, b = grad_norm_routes(U)
    return abs(a - b)


def energy_split(U, P, f, lam: float = 1.0):
    """Both sides of the energy-split inequality.

    ``int |grad u|^2 + (n-4)|u|^2 <= int f.u + (n-4) int H_+ u_r^- + (n-4)/2 int f_r u_r^+``.
    """
    gr = U.grid
    n = gr.n
    H = head(U, P)
    ur = U.u_r
    fr = np.zeros(gr.N) if f is None else lam * f.radial
    lhs = grad_norm_squared(U) + (n - 4) * gr.integrate(U.squared_norm())
    rhs = gr.integrate(_force_work(U, f, lam) + (n - 4) * positive_part(H).values * np.clip(-ur, 0, None)
                       + 0.5 * (n - 4) * fr * np.clip(ur, 0, None))
    return lhs, rhs


def pressure_norms(P: ScalarSphereField) -> dict:
    """``||p||_{L^{(n-1)/(n-3)}}`` and ``||grad p||_{L^{(n-1)/(n-2)}}`` on the unit sphere."""
    gr = P.grid
    n = gr.n
    Px = gr.D @ P.values
    grad = np.sqrt(4 * P.values**2 + (1 - gr.x**2) * Px**2)
    return {
        "pressure": lp_norm(P, (n - 1) / (n - 3)),
        "pressure_gradient": lp_norm(ScalarSphereField(gr, grad), (n - 1) / (n - 2)),
    }


def safe_ratio(num: float, den: float):
    """``num / den``; 0 for 0/positive and None when both vanish."""
    if den == 0.0:
        return None if num == 0.0 else math.inf
    return num / den


def _estimate_ratios(U, P, f, lam, H) -> dict:
    gr = U.grid
    n = gr.n
    ratios: dict = {}
    lhs, rhs = energy_split(U, P, f, lam)
    ratios["energy_split"] = safe_ratio(lhs, rhs)
    if n < 5:
        return ratios
    ex = exponents(n)
    th, q = float(ex.theta), float(ex.q)
    zero = ScalarSphereField(gr, np.zeros(gr.N))
    work = ScalarSphereField(gr, _force_work(U, f, lam))
    divf = zero if f is None else lam * f.divergence()
    fr = zero if f is None else ScalarSphereField(gr, lam * f.radial)
    Hp, Hm = positive_part(H), negative_part(H)
    ur = ScalarSphereField(gr, U.u_r)
    forcing_q = lp_norm(work, q) + lp_norm(divf, q)
    hp_theta = lp_norm(Hp, th)

    ratios["head_positive_control"] = safe_ratio(hp_theta, forcing_q)
    ratios["radial_l2_control"] = safe_ratio(lp_norm(ur, 2) ** 2 + lp_norm(Hm, 1), forcing_q + lp_norm(fr, 1))
    f_l2 = 0.0 if f is None else lam * math.sqrt(gr.integrate(f.field().squared_norm()))
    coupling = gr.integrate(Hp.values * np.clip(-U.u_r, 0, None))
    ratios["gradient_head_coupling"] = safe_ratio(grad_norm_squared(U), f_l2**2 + coupling)
    lip = 0.0 if f is None else abs(lam) * f.lipschitz_norm()
    ratios["head_positive_vs_lipschitz"] = safe_ratio(hp_theta, lip + lip**4)
    if f is not None and f.is_radial_nonnegative:
        urp = ScalarSphereField(gr, np.clip(U.u_r, 0, None))
        frmax = float(np.abs(fr.values).max())
        ratios["radial_positive_control"] = safe_ratio(
            lp_norm(urp, 2 * th), frmax + math.sqrt(frmax) + math.sqrt(lp_norm(divf, q)))
    return ratios


def estimate_report(U: AxisymField, P: ScalarSphereField, f, lam: float = 1.0) -> IdentityReport:
    """All identity gaps, residuals, norms and empirical estimate ratios."""
    from .solver import x_norm

    gr = U.grid
    n = gr.n
    H = head(U, P)
    e_lhs, e_rhs = _energy_sides(U, P, f, lam)
    e_gap = abs(e_lhs - e_rhs)
    s_a, s_b = grad_norm_routes(U)
    s_gap = abs(s_a - s_b)
    r_gap = radial_average_gap(U, H, f, lam)
    ns2 = radial_relation_residual(U, H, f, lam).values
    hp = head_pde_residual(U, H, f, lam).values
    div = divergence_residual(U).values

    fr_abs = 0.0 if f is None else gr.integrate(np.abs(lam * f.radial))
    radial_scale = 1.0 + fr_abs + gr.integrate((n - 2) * U.u_r**2)
    # pointwise scales: the largest single term entering each residual
    ur = ScalarSphereField(gr, U.u_r)
    ns2_scale = 1.0 + max(np.abs(gr.L @ ur.values).max(), np.abs(2 * H.values).max(),
                          0.0 if f is None else np.abs(lam * f.radial).max())
    hp_scale = 1.0 + max(np.abs(gr.L @ H.values).max(), np.abs(H.values * U.u_r).max(),
                         0.0 if f is None else np.abs(lam * f.divergence().values).max())
    div_scale = 1.0 + np.abs(U.u_r).max() * (n - 2)
    relative = {
        "energy_identity": e_gap / (1.0 + abs(e_lhs)),
        "sobolev_identity": s_gap / (1.0 + abs(s_a)),
        "radial_average": r_gap / radial_scale,
        "nsnorm2": float(np.abs(ns2).max()) / ns2_scale,
        "headpde": float(np.abs(hp).max()) / hp_scale,
        "divergence": float(np.abs(div).max()) / div_scale,
    }
    lhs, rhs = energy_split(U, P, f, lam)
    split_ok = lhs <= rhs + 1e-6 * max(1.0, abs(lhs), abs(rhs))
    norms = {"grad_l2": math.sqrt(max(s_a, 0.0)), **pressure_norms(P)} if n > 4 else {
        "grad_l2": math.sqrt(max(s_a, 0.0))}
    return IdentityReport(
        energy_identity_gap=e_gap,
        sobolev_identity_gap=s_gap,
        radial_average_gap=r_gap,
        nsnorm2_max_residual=float(np.abs(ns2).max()),
        headpde_max_residual=float(np.abs(hp).max()),
        divergence_max=float(np.abs(div).max()),
        estimate_ratios=_estimate_ratios(U, P, f, lam, H),
        x_norm=x_norm(U),
        relative=relative,
        energy_split_holds=bool(split_ok),
        norms=norms,
    )


def identities_pass(report: IdentityReport, rtol: float = 1e-6) -> bool:
    return all(v <= rtol for v in report.relative.values()) and report.energy_split_holds
