"""Command-line front end: ``selfsim-ns <command> [flags]``.

Commands: solve, validate, toy, sweep, exponents, abeta.  Reports are JSON
(UTF-8, sorted keys); curves are CSV.  Exit codes: 0 success, 1 usage
error, 2 solver or continuation stall, 3 validation failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_STALL, EXIT_VALIDATION = 0, 1, 2, 3
COMMANDS = ("solve", "validate", "toy", "sweep", "exponents", "abeta")

SCHEMA_HELP = """\
Report schema (JSON, version {v}):
  schema_version, version, command, config (echo of the run configuration),
  grid {{n, N, checksum}} for grid-based commands, result (command specific),
  timing {{seconds}} (the only non-deterministic field).
CSV columns:
  toy   -> c, C, branch, fold
  sweep -> A, converged, x_norm, energy_gap, radial_gap
  abeta -> center_norm, radius, product
Exit codes: 0 success, 1 usage error, 2 stall, 3 validation failure.
""".format(v=SCHEMA_VERSION)

log = logging.getLogger("selfsim_ns")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: int = 5
    N: int = 64
    force: str = "radial-cosine"
    force_params: dict = field(default_factory=dict)
    A: float = 1.0
    lambda_steps: int = 4
    tol: float = 1e-10
    max_newton: int = 30
    min_step: float = 1e-4
    out: str | None = None
    csv: str | None = None
    seed: int = 0
    jobs: int = 1
    sweep: str | None = None
    beta: float = 2.0
    balls: int = 100

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if int(self.n) != self.n or self.n < 4:
            raise UsageError("--n must be an integer >= 4")
        if int(self.N) != self.N or self.N < 8:
            raise UsageError("--grid must be an integer >= 8")
        if self.lambda_steps < 1:
            raise UsageError("--lambda-steps must be >= 1")
        if not self.tol > 0:
            raise UsageError("--tol must be positive")
        if self.max_newton < 1 or not self.min_step > 0:
            raise UsageError("--max-newton must be >= 1 and --min-step positive")
        if self.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        if not math.isfinite(self.A):
            raise UsageError("--A must be finite")
        if self.command == "exponents" and self.n < 5:
            raise UsageError("exponents are defined for n >= 5")
        if self.command == "abeta" and not self.beta > 1:
            raise UsageError("--beta must exceed 1")
        if self.command in ("toy", "sweep") and self.sweep is not None:
            parse_range(self.sweep)
        return self

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("csv")
        return d


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="selfsim-ns", description=__doc__.splitlines()[0],
                formatter_class=argparse.RawDescriptionHelpFormatter, epilog=SCHEMA_HELP)
    p.add_argument("command", choices=COMMANDS)
    S = argparse.SUPPRESS
    p.add_argument("--n", type=int, default=S, help="dimension (>= 4)")
    p.add_argument("--grid", dest="N", type=int, default=S, help="number of polar nodes")
    p.add_argument("--force", default=S, help="force family name")
    p.add_argument("--A", type=float, default=S, help="force amplitude")
    p.add_argument("--lambda-steps", dest="lambda_steps", type=int, default=S,
                   help="initial homotopy step is 1/lambda_steps")
    p.add_argument("--tol", type=float, default=S, help="Newton residual tolerance")
    p.add_argument("--max-newton", dest="max_newton", type=int, default=S, help="Newton iterations per step")
    p.add_argument("--min-step", dest="min_step", type=float, default=S,
                   help="smallest continuation step before reporting a stall")
    p.add_argument("--out", default=S, help="JSON report path (default: stdout)")
    p.add_argument("--csv", default=S, help="CSV curve path")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--jobs", type=int, default=S, help="parallel workers for sweeps")
    p.add_argument("--sweep", default=S, help="start:stop:step or a comma list")
    p.add_argument("--beta", type=float, default=S, help="A_beta exponent")
    p.add_argument("--balls", type=int, default=S, help="number of balls for abeta")
    p.add_argument("--config", default=None, help="JSON config file; flags take precedence")
    return p


def parse_range(text: str) -> list:
    """``start:stop:step`` (inclusive stop) or ``a,b,c``."""
    try:
        if ":" in text:
            a, b, h = (float(t) for t in text.split(":"))
            if h <= 0 or b < a:
                raise ValueError
            k = int(math.floor((b - a) / h + 1e-9))
            return [round(a + i * h, 12) for i in range(k + 1)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected start:stop:step or a comma list") from None


def make_config(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    cfg_path = ns.pop("config")
    merged = {}
    if cfg_path:
        try:
            with open(cfg_path, encoding="utf-8") as fh:
                merged.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {cfg_path}: {exc}") from None
    merged.update(ns)
    known = {f.name for f in fields(RunConfig)}
    unknown = set(merged) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    try:
        return RunConfig(**merged).validate()
    except TypeError as exc:
        raise UsageError(str(exc)) from None


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dump_report(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def load_report(text: str) -> dict:
    return json.loads(text)


def _grid_info(grid) -> dict:
    return {"n": grid.n, "N": grid.N, "checksum": grid.checksum()}


def _solver_config(cfg: RunConfig):
    from .solver import SolverConfig

    return SolverConfig(lambda_step=1.0 / cfg.lambda_steps, newton_tol=cfg.tol, max_newton=cfg.max_newton,
                        min_step=cfg.min_step)


def _force(cfg: RunConfig, grid):
    from .forces import make_force

    try:
        return make_force(cfg.force, cfg.force_params, grid, amplitude=cfg.A)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _solve_payload(cfg: RunConfig):
    from .head import exponents
    from .sphere import build_grid
    from .solver import solve_selfsimilar

    grid = build_grid(cfg.n, cfg.N)
    f = _force(cfg, grid)
    sol, rep = solve_selfsimilar(f, _solver_config(cfg))
    result = {
        "converged": rep.converged,
        "stalled": rep.stalled,
        "last_lambda": rep.last_lambda,
        "message": rep.message,
        "trace": [dict(zip(["lambda", "newton_iterations", "residual", "x_norm"], r))
                  for r in rep.trace.as_rows()],
        "total_newton": rep.total_newton,
        "quadratic_constant": rep.quadratic_constant,
        "warnings": rep.warnings,
        "div_route": f.div_route,
        "pressure_gauge": "zero-mean" if cfg.n == 4 else "unique",
    }
    if rep.identities is not None:
        ident = rep.identities.as_dict()
        result["identities"] = ident
        result["validation_passed"] = rep.validation_passed
        result["norms"] = {"x_norm": ident["x_norm"], **ident.pop("norms")}
    if cfg.n >= 5:
        result["exponents"] = exponents(cfg.n).as_dict()
    return grid, f, sol, rep, result


def cmd_solve(cfg: RunConfig):
    grid, _, _, rep, result = _solve_payload(cfg)
    code = EXIT_STALL if rep.stalled else (EXIT_OK if rep.validation_passed else EXIT_VALIDATION)
    return code, {"grid": _grid_info(grid), "result": result}, None


def cmd_validate(cfg: RunConfig):
    from .ambient import ambient_deviation, sphere_points
    from .head import head_pde_ambient_deviation
    from .stokes import recover_pressure

    grid, f, sol, rep, result = _solve_payload(cfg)
    if rep.stalled:
        return EXIT_STALL, {"grid": _grid_info(grid), "result": result}, None
    U, P = sol.velocity, sol.pressure
    X = sphere_points(grid.n, 16, cfg.seed)
    amb = ambient_deviation(U, P, f.field(), 1.0, X, 1e-4)
    head_dev = head_pde_ambient_deviation(U, P, f, 1.0, 16, 1e-4, cfg.seed)
    Pr = recover_pressure(U, f).values
    Ps = P.values
    if grid.n == 4:
        Ps = Ps - grid.integrate(Ps) / grid.area
    prs = float(np.abs(Pr - Ps).max())
    checks = {
        "ambient_deviation": amb,
        "head_ambient_deviation": head_dev,
        "pressure_route_gap": prs,
    }
    ok = bool(rep.validation_passed) and amb <= 1e-6 and head_dev <= 1e-6 and prs <= 1e-7
    result["checks"] = checks
    result["validation_passed"] = ok
    return (EXIT_OK if ok else EXIT_VALIDATION), {"grid": _grid_info(grid), "result": result}, None


def cmd_exponents(cfg: RunConfig):
    from .head import exponents

    return EXIT_OK, {"result": exponents(cfg.n).as_dict()}, None


def cmd_toy(cfg: RunConfig):
    from .toy import fold_continuation

    cs = parse_range(cfg.sweep or "0:1:0.01")
    if cs[0] >= 1.0:
        raise UsageError("the toy sweep must start below the fold (c < 1)")
    d = fold_continuation(cs[0], cs[-1], max(len(cs), 8), sample=cs)
    result = {
        "fold_c": d.fold_c,
        "fold_C": d.fold_C,
        "stalled": d.stalled,
        "nonexistence_floor": {repr(k): v for k, v in d.nonexistence.items()},
        "rows": len(d.points),
    }
    return (EXIT_STALL if d.stalled else EXIT_OK), {"result": result}, d.to_csv()


def _sweep_rows(cfg: RunConfig, As):
    from .solver import amplitude_sweep
    from .sphere import build_grid

    grid = build_grid(cfg.n, cfg.N)
    shape = _force(cfg, grid).with_amplitude(1.0)
    scfg = _solver_config(cfg)
    if cfg.jobs > 1:
        # independent cold starts; warm starting needs the previous amplitude
        with ThreadPoolExecutor(max_workers=cfg.jobs) as ex:
            parts = list(ex.map(lambda a: amplitude_sweep(shape, [a], scfg, warm_start=False)[0], As))
        return grid, parts
    return grid, amplitude_sweep(shape, As, scfg, warm_start=True)


def cmd_sweep(cfg: RunConfig):
    As = parse_range(cfg.sweep or "0:0.1:0.025")
    if As != sorted(As):
        raise UsageError("sweep amplitudes must be sorted")
    grid, rows = _sweep_rows(cfg, As)
    lines = ["A,converged,x_norm,energy_gap,radial_gap"]
    for r in rows:
        lines.append(",".join([repr(r.A), str(int(r.converged)), repr(r.x_norm), repr(r.energy_gap),
                               repr(r.radial_gap)]))
    result = {"rows": [{"A": r.A, "converged": r.converged, "x_norm": r.x_norm,
                        "energy_gap": r.energy_gap, "radial_gap": r.radial_gap,
                        "newton_iterations": r.newton_iterations} for r in rows]}
    code = EXIT_OK if all(r.converged for r in rows) else EXIT_STALL
    return code, {"grid": _grid_info(grid), "result": result}, "\n".join(lines) + "\n"


def cmd_abeta(cfg: RunConfig):
    from .abeta import WeightConfig, abeta_scan, default_balls

    wc = WeightConfig(cfg.n, cfg.beta, default_balls(cfg.balls))
    scan = abeta_scan(wc)
    mins = min(r[2] for r in scan.rows)
    result = {"sup": scan.sup, "min": mins, "flagged": len(scan.flagged), "balls": len(scan.rows)}
    return EXIT_OK, {"result": result}, scan.to_csv()


HANDLERS = {
    "solve": cmd_solve,
    "validate": cmd_validate,
    "toy": cmd_toy,
    "sweep": cmd_sweep,
    "exponents": cmd_exponents,
    "abeta": cmd_abeta,
}


def _setup_logging():
    level = os.environ.get("SELFSIM_NS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def run(argv=None) -> int:
    """Entry point; returns the process exit code."""
    _setup_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = make_config(argv)
        t0 = time.perf_counter()
        code, payload, curve = HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}\n", file=sys.stderr)
        print(build_parser().format_usage(), file=sys.stderr)
        print(SCHEMA_HELP, file=sys.stderr)
        return EXIT_USAGE
    report = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": cfg.command,
        "config": cfg.echo(),
        "exit_code": code,
        **payload,
        "timing": {"seconds": time.perf_counter() - t0},
    }
    text = dump_report(report)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if curve is not None and cfg.csv:
        with open(cfg.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(curve)
    return code


def main():
    sys.exit(run())
