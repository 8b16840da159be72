"""How the solution grows with the forcing amplitude.

For small A the flow is the Stokes response A*T plus a correction of order A^2;
at larger A Newton needs more work and, eventually, continuation may stall.
"""
import numpy as np

from selfsim_ns.forces import make_force
from selfsim_ns.solver import amplitude_sweep, solve_selfsimilar, stokes_response, x_norm
from selfsim_ns.sphere import build_grid

grid = build_grid(5, 64)
shape = make_force("radial-cosine", {}, grid)
T = stokes_response(shape)

print("    A      X-norm   |u - A T|_X")
for A in (1e-3, 1e-2, 1e-1, 1.0):
    sol, _ = solve_selfsimilar(shape.with_amplitude(A), validate=False)
    print(f"{A:7.0e}  {x_norm(sol.velocity):9.3e}  {x_norm(sol.velocity - A * T):9.3e}")

rows = amplitude_sweep(shape, list(np.linspace(0, 20, 9)))
print("\nwarm-started sweep:")
for r in rows:
    print(f"  A = {r.A:5.1f}  converged={r.converged}  iterations={r.newton_iterations}  X-norm={r.x_norm:.3f}")
