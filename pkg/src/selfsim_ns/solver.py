"""Self-similar Navier–Stokes solver: lambda-homotopy with Newton corrections.

The family ``-Delta u + (u.grad)u + grad p = lam f`` is followed from the
trivial solution at ``lam = 0`` to ``lam = 1``.  Each step is a Newton
solve on the reduced (potential, pressure) unknowns of
:mod:`selfsim_ns.stokes`; the fixed-point map ``T(lam, .)`` is available
as a fallback.
"""
from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import terms
from .forces import ForceSpec
from .sphere import AxisymField, ScalarSphereField, ambient_gradient
from .stokes import StokesSystem, assemble, picard_map

__all__ = [
    "SolverConfig",
    "TraceRecord",
    "ContinuationTrace",
    "SelfSimilarSolution",
    "SolveReport",
    "ExistenceScopeWarning",
    "x_norm",
    "nonlinear_residual",
    "solve_selfsimilar",
    "stokes_response",
    "amplitude_sweep",
    "uniqueness_probe",
]

log = logging.getLogger(__name__)


class ExistenceScopeWarning(UserWarning):
    """Solve requested outside the dimension range with a known existence result."""


@dataclass(frozen=True)
class SolverConfig:
    lambda_step: float = 0.25
    newton_tol: float = 1e-10
    max_newton: int = 30
    shrink: float = 0.5
    grow: float = 1.5
    min_step: float = 1e-4
    max_step: float = 1.0
    fast_iterations: int = 4  # grow the step when Newton needs at most this many
    picard_fallback: bool = False
    picard_max: int = 300

    def __post_init__(self):
        if not (self.newton_tol > 0 and self.min_step > 0 and self.lambda_step > 0):
            raise ValueError("tolerances and steps must be positive")
        if not (0 < self.shrink < 1 < self.grow):
            raise ValueError("need 0 < shrink < 1 < grow")
        if self.max_newton < 1:
            raise ValueError("max_newton must be >= 1")


@dataclass(frozen=True)
class TraceRecord:
    lam: float
    newton_iterations: int
    residual: float
    x_norm: float


@dataclass
class ContinuationTrace:
    records: list = field(default_factory=list)

    def append(self, rec: TraceRecord):
        if self.records and rec.lam < self.records[-1].lam:
            raise ValueError("lambda must be nondecreasing along the trace")
        self.records.append(rec)

    @property
    def last_lambda(self) -> float:
        return self.records[-1].lam if self.records else 0.0

    def __len__(self):
        return len(self.records)

    def as_rows(self):
        return [[r.lam, r.newton_iterations, r.residual, r.x_norm] for r in self.records]


@dataclass(frozen=True)
class SelfSimilarSolution:
    velocity: AxisymField
    pressure: ScalarSphereField
    lam: float
    coefficients: np.ndarray  # reduced unknowns [potential modes, nodal pressure]

    @property
    def grid(self):
        return self.velocity.grid


@dataclass
class SolveReport:
    converged: bool
    stalled: bool
    last_lambda: float
    trace: ContinuationTrace
    newton_history: list
    quadratic_constant: float | None
    total_newton: int
    warnings: list = field(default_factory=list)
    identities: object = None
    validation_passed: bool | None = None
    message: str = ""


def x_norm(U: AxisymField) -> float:
    """``sup |U| + sup |grad u|`` over the nodes, for the (-1)-homogeneous extension."""
    J = ambient_gradient(U)
    size = np.sqrt(np.abs(U.squared_norm()))
    grad = np.sqrt(np.sum(J**2, axis=(1, 2)))
    return float(size.max() + grad.max())


def nonlinear_residual(U: AxisymField, P: ScalarSphereField, f: ForceSpec, lam: float):
    """Nodal residual of ``-Delta u + (u.grad)u + grad p - lam f`` and of ``div u``."""
    gr = U.grid
    if P.grid is not gr or f.grid is not gr:
        raise ValueError("fields live on different grids")
    j = terms.field_jets(U)
    vn, vs = terms.viscous(j)
    an, as_ = terms.convective(j)
    pn, ps = terms.pressure_gradient(gr.x, P.values, gr.D @ P.values)
    gn, gs = f.g_n, f.g_sigma
    mom = AxisymField(gr, vn + an + pn - lam * gn, vs + as_ + ps - lam * gs)
    return mom, ScalarSphereField(gr, terms.divergence(j))


class _Problem:
    """Reduced residual and Jacobian for one force."""

    def __init__(self, f: ForceSpec):
        self.f = f
        self.grid = f.grid
        self.sys: StokesSystem = assemble(f.grid)
        self.gn = f.g_n
        self.gs = f.g_sigma

    def fields(self, z):
        a, b, P = self.sys.unpack(z)
        return a, b, P

    def residual(self, z, lam):
        gr, s = self.grid, self.sys
        a, b, _ = self.fields(z)
        x, w = gr.x, 1 - gr.x**2
        a1, b1 = gr.D @ a, gr.D @ b
        cn = a * (w * a1 - x * a)
        cs = -(b**2) - 2 * x * a * b + w * a * b1
        return s.reduced @ z + s.project_rows(cn - lam * self.gn, cs - lam * self.gs)

    def jacobian(self, z):
        gr, s = self.grid, self.sys
        N = gr.N
        a, b, _ = self.fields(z)
        x, w = gr.x, 1 - gr.x**2
        D = gr.D
        a1, b1 = D @ a, D @ b
        dn_da = np.diag(w * a1 - 2 * x * a) + (a * w)[:, None] * D
        ds_da = np.diag(-2 * x * b + w * b1)
        ds_db = np.diag(-2 * b - 2 * x * a) + (w * a)[:, None] * D
        Jc_n = s.projector @ (dn_da @ s.alpha_map)
        Jc_s = ds_da @ s.alpha_map + ds_db @ s.beta_map
        J = np.array(s.reduced)
        J[: N - 1, : N - 1] += Jc_n
        J[N - 1:, : N - 1] += Jc_s
        return J

    def solution(self, z, lam) -> SelfSimilarSolution:
        a, b, P = self.fields(z)
        return SelfSimilarSolution(AxisymField(self.grid, a, b), ScalarSphereField(self.grid, P), lam, z.copy())

    def newton(self, z0, lam, cfg: SolverConfig):
        """Damped Newton; returns (z, iterations, residual, converged, history)."""
        z = z0.copy()
        r = self.residual(z, lam)
        res = float(np.abs(r).max())
        hist = [res]
        for it in range(1, cfg.max_newton + 1):
            try:
                dz = np.linalg.solve(self.jacobian(z), -r)
            except np.linalg.LinAlgError:
                return z, it, res, False, hist
            step_size = float(np.abs(dz).max())
            t = 1.0
            while True:
                zt = z + t * dz
                rt = self.residual(zt, lam)
                rest = float(np.abs(rt).max())
                if np.isfinite(rest) and (rest < (1 - 1e-4 * t) * res or rest <= self._floor(zt)):
                    break
                t *= 0.5
                if t < 1e-4:
                    return z, it, res, False, hist
            z, r, res = zt, rt, rest
            hist.append(res)
            if res <= cfg.newton_tol or (t == 1.0 and step_size <= cfg.newton_tol * (1 + np.abs(z).max())
                                         and res <= self._floor(z)):
                return z, it, res, True, hist
        return z, cfg.max_newton, res, False, hist

    def _floor(self, z):
        """Round-off floor of the reduced residual at ``z``."""
        scale = np.abs(self.sys.reduced).sum(axis=1).max() * max(np.abs(z).max(), 1.0)
        return 1e3 * np.finfo(float).eps * scale

    def picard(self, z0, lam, cfg: SolverConfig):
        """Fixed-point iteration of T(lam, .); returns (z, iterations, residual, converged)."""
        z = z0.copy()
        for it in range(1, cfg.picard_max + 1):
            v = self.solution(z, lam).velocity
            sol = picard_map(v, self.f, lam, return_solution=True)
            znew = np.concatenate([sol.coefficients, sol.pressure.values])
            diff = float(np.abs(znew - z).max())
            z = znew
            if not np.isfinite(diff):
                break
            if diff <= cfg.newton_tol * (1 + np.abs(z).max()):
                res = float(np.abs(self.residual(z, lam)).max())
                return z, it, res, True
        return z, cfg.picard_max, float(np.abs(self.residual(z, lam)).max()), False


def _quadratic_constant(history):
    """max r_{k+1} / r_k^2 over the tail, or None when the tail is not resolved.

    The tail starts once r_k < 1e-4 r_0 (the reduced residual carries the
    operator's large scale); pairs whose r_{k+1} sits at the round-off
    floor are dropped.
    """
    if not history:
        return None
    floor = max(1e-13, 100 * min(history))
    tail = 1e-4 * max(1.0, history[0])
    cs = [b / a**2 for a, b in zip(history, history[1:]) if 0 < a < tail and b > floor]
    return max(cs) if cs else None


def solve_selfsimilar(f: ForceSpec, cfg: SolverConfig | None = None, *,
                      initial: np.ndarray | None = None, validate: bool = True):
    """Follow ``lam`` from 0 to 1 and return ``(solution, report)``.

    ``initial`` (reduced unknowns) triggers a direct Newton attempt at
    ``lam = 1`` first, falling back to the homotopy.  A stall is reported
    in the returned report rather than raised.
    """
    cfg = cfg or SolverConfig()
    gr = f.grid
    notes = []
    if gr.n > 16 and not f.is_radial_nonnegative:
        msg = (f"n={gr.n} > 16 with a force that is not nonnegative and radial: "
               "existence of a self-similar solution is not guaranteed")
        warnings.warn(msg, ExistenceScopeWarning, stacklevel=2)
        notes.append(msg)
    prob = _Problem(f)
    trace = ContinuationTrace()
    z = np.zeros(prob.sys.size)
    total = 0
    last_hist: list = []

    if initial is not None:
        z_try, it, res, ok, hist = prob.newton(np.asarray(initial, dtype=float), 1.0, cfg)
        total += it
        if ok:
            sol = prob.solution(z_try, 1.0)
            trace.append(TraceRecord(1.0, it, res, x_norm(sol.velocity)))
            return _finish(prob, sol, trace, hist, total, notes, cfg, validate)
        notes.append("direct Newton from the supplied initial guess failed; using the homotopy")

    lam = 0.0
    z0, it, res, ok, hist = prob.newton(z, 0.0, cfg)
    total += it
    z = z0
    trace.append(TraceRecord(0.0, it, res, x_norm(prob.solution(z, 0.0).velocity)))
    step = min(cfg.lambda_step, cfg.max_step)
    stalled = False
    while lam < 1.0:
        target = min(1.0, lam + step)
        zt, it, res, ok, hist = prob.newton(z, target, cfg)
        total += it
        if not ok and cfg.picard_fallback:
            zt, it_p, res, ok = prob.picard(z, target, cfg)
            total += it_p
            if ok:
                zt, it2, res, ok, hist = prob.newton(zt, target, cfg)
                it += it_p + it2
        if ok:
            lam, z, last_hist = target, zt, hist
            trace.append(TraceRecord(lam, it, res, x_norm(prob.solution(z, lam).velocity)))
            log.debug("lambda=%.4g newton=%d residual=%.3e", lam, it, res)
            if it <= cfg.fast_iterations:
                step = min(step * cfg.grow, cfg.max_step)
        else:
            step *= cfg.shrink
            log.debug("step rejected at lambda=%.4g, new step %.3g", target, step)
            if step < cfg.min_step:
                stalled = True
                break

    sol = prob.solution(z, lam)
    if stalled:
        report = SolveReport(False, True, lam, trace, last_hist, _quadratic_constant(last_hist), total,
                             notes, message=f"continuation stalled at lambda={lam:.6g}")
        return sol, report
    return _finish(prob, sol, trace, last_hist, total, notes, cfg, validate)


def _finish(prob, sol, trace, hist, total, notes, cfg, validate):
    report = SolveReport(True, False, sol.lam, trace, hist, _quadratic_constant(hist), total, notes,
                         message="converged")
    if validate:
        from .validators import estimate_report, identities_pass
        report.identities = estimate_report(sol.velocity, sol.pressure, prob.f, sol.lam)
        report.validation_passed = identities_pass(report.identities)
    return sol, report


def stokes_response(f: ForceSpec) -> AxisymField:
    """``T(1, 0)``: the Stokes velocity driven by ``f``."""
    return picard_map(AxisymField.zeros(f.grid), f, 1.0)


@dataclass(frozen=True)
class SweepRow:
    A: float
    converged: bool
    x_norm: float
    energy_gap: float
    radial_gap: float
    newton_iterations: int
    seconds: float


def amplitude_sweep(f_shape: ForceSpec, A_values, cfg: SolverConfig | None = None, *,
                    warm_start: bool = True):
    """Solve along increasing amplitudes; returns a list of :class:`SweepRow`.

    With ``warm_start`` each amplitude starts from the previous converged
    solution (direct Newton at lam = 1), otherwise from the homotopy.
    """
    from .validators import energy_identity_gap, radial_average_gap
    from .head import head

    A_values = [float(a) for a in A_values]
    if not all(np.isfinite(A_values)) or A_values != sorted(A_values):
        raise ValueError("A_values must be finite and sorted")
    cfg = cfg or SolverConfig()
    rows, prev = [], None
    for A in A_values:
        f = f_shape.with_amplitude(A)
        t0 = time.perf_counter()
        sol, rep = solve_selfsimilar(f, cfg, initial=prev if warm_start else None, validate=False)
        dt = time.perf_counter() - t0
        if rep.converged:
            U, P = sol.velocity, sol.pressure
            H = head(U, P)
            rows.append(SweepRow(A, True, x_norm(U), energy_identity_gap(U, P, f, 1.0),
                                 radial_average_gap(U, H, f), rep.total_newton, dt))
            prev = sol.coefficients
        else:
            rows.append(SweepRow(A, False, float("nan"), float("nan"), float("nan"), rep.total_newton, dt))
    return rows


@dataclass(frozen=True)
class ProbeResult:
    max_distance: float
    converged: int
    excluded: int
    distances: tuple


def uniqueness_probe(f: ForceSpec, cfg: SolverConfig | None = None, initializations: int = 5,
                     seed=0, scale: float = 0.1) -> ProbeResult:
    """Solve from random initial guesses; report the max pairwise X-norm distance."""
    cfg = cfg or SolverConfig()
    rng = np.random.default_rng(seed)
    size = assemble(f.grid).size
    decay = 1.0 / (1.0 + np.arange(size) % f.grid.N) ** 2
    sols = []
    excluded = 0
    for _ in range(initializations):
        z0 = scale * rng.standard_normal(size) * decay
        sol, rep = solve_selfsimilar(f, cfg, initial=z0, validate=False)
        if rep.converged:
            sols.append(sol.velocity)
        else:
            excluded += 1
    d = [x_norm(a - b) for i, a in enumerate(sols) for b in sols[i + 1:]]
    return ProbeResult(max(d) if d else 0.0, len(sols), excluded, tuple(d))
