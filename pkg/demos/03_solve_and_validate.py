"""Solve for a self-similar flow at n = 5 and check it several independent ways."""
import numpy as np

from selfsim_ns.ambient import ambient_deviation, sphere_points
from selfsim_ns.forces import make_force
from selfsim_ns.solver import solve_selfsimilar
from selfsim_ns.sphere import build_grid
from selfsim_ns.stokes import recover_pressure

grid = build_grid(5, 64)
force = make_force("radial-cosine", {}, grid, amplitude=1.0)
sol, rep = solve_selfsimilar(force)
print(rep.message, f"after {rep.total_newton} Newton iterations")
for lam, its, res, xn in rep.trace.as_rows():
    print(f"  lambda {lam:.3f}: {its} iterations, residual {res:.1e}, X-norm {xn:.4f}")

print("relative identity gaps:")
for key, val in sorted(rep.identities.relative.items()):
    print(f"  {key:18s} {val:.1e}")

# the pressure again, this time from the velocity alone
gap = np.abs(recover_pressure(sol.velocity, force).values - sol.pressure.values).max()
print(f"pressure from the divergence equation differs by {gap:.1e}")

# and the full n-dimensional equations by finite differences
X = sphere_points(5, 16, seed=0)
dev = ambient_deviation(sol.velocity, sol.pressure, force.field(), 1.0, X, 1e-4)
print(f"finite-difference check in R^5: {dev:.1e}")
