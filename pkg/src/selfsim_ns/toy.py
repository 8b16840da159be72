"""One-dimensional self-similar model ``-u'' + u u' = c / x^3`` on ``x > 0``.

Homogeneous solutions ``u = C/x`` exist iff ``C^2 + 2C + c = 0``: two for
``c < 1``, one at ``c = 1`` and none beyond.  The fold is reproduced by a
pseudo-arclength continuation engine that works either on that algebraic
reduction or on a Chebyshev collocation of the ODE on ``[1, R]``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar, root

__all__ = [
    "ToyBranch",
    "exact_branches",
    "residual_check",
    "ContinuationPoint",
    "pseudo_arclength",
    "AlgebraicToy",
    "CollocationToy",
    "FoldDiagram",
    "fold_continuation",
    "nonexistence_floor",
]


@dataclass(frozen=True)
class ToyBranch:
    c: float
    roots: tuple
    multiplicity: str  # "two", "one" or "none"


def exact_branches(c: float) -> ToyBranch:
    """Closed-form roots of ``C^2 + 2C + c = 0``, sorted ascending."""
    disc = 1.0 - c
    if disc > 0:
        s = math.sqrt(disc)
        return ToyBranch(c, (-1.0 - s, -1.0 + s), "two")
    if disc == 0:
        return ToyBranch(c, (-1.0,), "one")
    return ToyBranch(c, (), "none")


def residual_check(C: float, c: float) -> float:
    """``x^3 (-u'' + u u' - c/x^3)`` for ``u = C/x``; independent of x."""
    return -2.0 * C - C * C - c


@dataclass(frozen=True)
class ContinuationPoint:
    state: np.ndarray
    param: float
    tangent_param: float  # d param / d arclength


class AlgebraicToy:
    """``G(C; c) = C^2 + 2C + c`` with one unknown."""

    size = 1

    def residual(self, y, c):
        return np.array([y[0] ** 2 + 2 * y[0] + c])

    def jacobian(self, y, c):
        return np.array([[2 * y[0] + 2]]), np.array([1.0])

    def amplitude(self, y) -> float:
        return float(y[0])

    def initial_guess(self, C):
        return np.array([C], dtype=float)


class CollocationToy:
    """Chebyshev collocation of ``-u'' + u u' = c/x^3`` on ``[1, R]``.

    Unknowns are ``u`` at ``M + 1`` Chebyshev points and the constant ``C``;
    the boundary rows impose the homogeneous data ``u(1) = C``,
    ``u(R) = C/R`` and ``u'(1) = -C``.
    """

    def __init__(self, R: float = 2.0, M: int = 24):
        if R <= 1 or M < 4:
            raise ValueError("need R > 1 and M >= 4")
        k = np.arange(M + 1)
        t = np.cos(np.pi * k / M)  # 1 .. -1
        xs = 1 + (R - 1) * (1 - t) / 2  # 1 .. R
        c = np.where((k == 0) | (k == M), 2.0, 1.0) * (-1.0) ** k
        T = t[:, None] - t[None, :]
        Dt = np.outer(c, 1 / c) / (T + np.eye(M + 1))
        Dt -= np.diag(Dt.sum(axis=1))
        self.D = Dt * (-2 / (R - 1))
        self.D2 = self.D @ self.D
        self.x = xs
        self.M = M
        self.R = R
        self.size = M + 2

    def residual(self, y, c):
        u, C = y[:-1], y[-1]
        ode = -(self.D2 @ u) + u * (self.D @ u) - c / self.x**3
        return np.concatenate([ode[1:-1], [u[0] - C, u[-1] - C / self.R, (self.D @ u)[0] + C]])

    def jacobian(self, y, c):
        u = y[:-1]
        M = self.M
        Ju = -self.D2 + np.diag(self.D @ u) + u[:, None] * self.D
        J = np.zeros((self.size, self.size))
        J[: M - 1, : M + 1] = Ju[1:-1]
        J[M - 1, 0], J[M - 1, -1] = 1.0, -1.0
        J[M, M], J[M, -1] = 1.0, -1.0 / self.R
        J[M + 1, : M + 1] = self.D[0]
        J[M + 1, -1] = 1.0
        Jp = np.zeros(self.size)
        Jp[: M - 1] = -1.0 / self.x[1:-1] ** 3
        return J, Jp

    def amplitude(self, y) -> float:
        return float(y[-1])

    def initial_guess(self, C):
        return np.concatenate([C / self.x, [C]])


def _newton_fixed(model, y, c, tol=1e-13, maxit=50):
    for _ in range(maxit):
        r = model.residual(y, c)
        if np.abs(r).max() <= tol:
            return y, True
        Jy, _ = model.jacobian(y, c)
        try:
            dy = np.linalg.solve(Jy, r)
        except np.linalg.LinAlgError:
            return y, False
        y = y - dy
        if not np.all(np.isfinite(y)):
            return y, False
        if np.abs(dy).max() <= 1e-12 * (1 + np.abs(y).max()):
            return y, True
    return y, False


def _tangent(model, y, c, prev=None):
    Jy, Jp = model.jacobian(y, c)
    m = len(y)
    A = np.zeros((m + 1, m + 1))
    A[:m, :m], A[:m, m] = Jy, Jp
    if prev is None:
        A[m, m] = 1.0
    else:
        A[m] = prev
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    t = np.linalg.solve(A, rhs)
    return t / np.linalg.norm(t)


def pseudo_arclength(model, y0, c0, ds, max_steps, stop, *, tol=1e-12, min_ds=1e-10, max_ds=None):
    """Trace a solution curve of ``model.residual(y, c) = 0`` from ``(y0, c0)``.

    Starts moving towards increasing ``c`` and stops when ``stop(y, c)``
    becomes true or after ``max_steps`` accepted steps.  Returns
    ``(points, stalled)``.
    """
    max_ds = max_ds or 4 * ds
    z = np.concatenate([y0, [c0]])
    t = _tangent(model, y0, c0)
    if t[-1] < 0:
        t = -t
    pts = [ContinuationPoint(y0.copy(), c0, float(t[-1]))]
    stalled = False
    m = len(y0)
    for _ in range(max_steps):
        while True:
            zp = z + ds * t
            zc, ok = zp.copy(), False
            for _ in range(20):
                y, c = zc[:m], zc[m]
                Jy, Jp = model.jacobian(y, c)
                F = np.concatenate([model.residual(y, c), [t @ (zc - zp)]])
                if np.abs(F).max() <= tol:
                    ok = True
                    break
                A = np.zeros((m + 1, m + 1))
                A[:m, :m], A[:m, m], A[m] = Jy, Jp, t
                try:
                    dz = np.linalg.solve(A, F)
                except np.linalg.LinAlgError:
                    break
                zc = zc - dz
                if not np.all(np.isfinite(zc)):
                    break
                if np.abs(dz).max() <= 1e-13 * (1 + np.abs(zc).max()):
                    ok = True
                    break
            if ok:
                break
            ds *= 0.5
            if ds < min_ds:
                stalled = True
                return pts, stalled
        t_new = _tangent(model, zc[:m], zc[m], prev=t)
        z, t = zc, t_new
        pts.append(ContinuationPoint(z[:m].copy(), float(z[m]), float(t[-1])))
        ds = min(ds * 1.3, max_ds)
        if stop(z[:m], z[m]):
            break
    return pts, stalled


def _refine_fold(model, y, c):
    """Solve ``F = 0``, ``F_y phi = 0``, ``phi . phi0 = 1`` near a turning point."""
    m = len(y)
    Jy, _ = model.jacobian(y, c)
    _, _, Vt = np.linalg.svd(Jy)
    phi0 = Vt[-1]

    def system(v):
        yy, cc, phi = v[:m], v[m], v[m + 1:]
        J, _ = model.jacobian(yy, cc)
        return np.concatenate([model.residual(yy, cc), J @ phi, [phi @ phi0 - 1.0]])

    sol = root(system, np.concatenate([y, [c], phi0]), method="hybr", options={"xtol": 1e-14})
    # hybr often reports "no progress" once it sits at round-off, so judge by the residual
    ok = bool(np.abs(system(sol.x)).max() <= 1e-8)
    return sol.x[:m], float(sol.x[m]), ok


@dataclass
class FoldDiagram:
    points: list  # (c, C, branch, fold)
    fold_c: float | None
    fold_C: float | None
    stalled: bool
    nonexistence: dict = field(default_factory=dict)
    mode: str = "algebraic"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["c", "C", "branch", "fold"])
        for c, C, b, f in self.points:
            w.writerow([repr(float(c)), repr(float(C)), int(b), int(bool(f))])
        return buf.getvalue()

    def branch(self, k: int):
        return [(c, C) for c, C, b, f in self.points if b == k and not f]


def nonexistence_floor(c: float, bracket=(-50.0, 50.0)) -> float:
    """``min_C |C^2 + 2C + c|`` by bounded scalar minimization.

    A positive value certifies that no homogeneous solution exists.
    """
    res = minimize_scalar(lambda C: abs(residual_check(C, c)), bounds=bracket, method="bounded",
                          options={"xatol": 1e-12})
    return float(res.fun)


def fold_continuation(c_start: float, c_end: float, steps: int = 100, *, mode: str = "algebraic",
                      R: float = 2.0, M: int = 24, sample=None) -> FoldDiagram:
    """Trace both branches from ``c_start`` through the fold.

    The upper branch is found by Newton from ``C = 0`` at ``c_start``; the
    curve is followed past the turning point until ``c`` drops back to
    ``c_start``.  ``sample`` (an iterable of c values) additionally
    Newton-corrects both branches at those parameters, seeded from the
    traced curve.  Parameters above the fold and up to ``c_end`` are
    probed for a nonexistence floor.
    """
    if not c_start < 1.0:
        raise ValueError("c_start must be below the fold")
    if steps < 4:
        raise ValueError("steps must be >= 4")
    model = AlgebraicToy() if mode == "algebraic" else CollocationToy(R, M)
    y0, ok = _newton_fixed(model, model.initial_guess(0.0), c_start)
    if not ok:
        return FoldDiagram([], None, None, True, mode=mode)
    span = max(c_end, 1.0) - c_start
    ds = 4.0 * span / steps

    pts, stalled = pseudo_arclength(model, y0, c_start, ds, 8 * steps, lambda y, c: c < c_start)
    passed = {"fold": False}

    rows = []
    branch = 0
    fold_c = fold_C = None
    for i, p in enumerate(pts):
        if i > 0 and branch == 0 and p.tangent_param < 0 <= pts[i - 1].tangent_param:
            yf, cf, okf = _refine_fold(model, p.state, p.param)
            if okf:
                fold_c, fold_C = cf, model.amplitude(yf)
                rows.append((cf, fold_C, 0, True))
            branch = 1
            passed["fold"] = True
        if p.param >= c_start:
            rows.append((p.param, model.amplitude(p.state), branch, False))

    if sample is not None:
        rows = [r for r in rows if r[3]]
        for b in (0, 1):
            bpts = [p for p, r in zip(pts, _branch_labels(pts)) if r == b]
            if not bpts:
                continue
            cs = np.array([p.param for p in bpts])
            for c in sample:
                if fold_c is not None and c >= fold_c - 1e-9:
                    continue
                k = int(np.argmin(np.abs(cs - c)))
                y, ok = _newton_fixed(model, bpts[k].state.copy(), c)
                if ok:
                    rows.append((float(c), model.amplitude(y), b, False))
        rows.sort(key=lambda r: (r[2], r[0]))

    diagram = FoldDiagram(rows, fold_c, fold_C, stalled or not passed["fold"], mode=mode)
    if c_end > 1.0:
        probe = np.linspace(1.0, c_end, 6)[1:]
        diagram.nonexistence = {float(c): nonexistence_floor(c) for c in probe}
    return diagram


def _branch_labels(pts):
    labels, b = [], 0
    for i, p in enumerate(pts):
        if i > 0 and b == 0 and p.tangent_param < 0 <= pts[i - 1].tangent_param:
            b = 1
        labels.append(b)
    return labels
