"""Radial forcing in dimension 20.

The existence argument for general forces stops at n = 16, but radial forces
with nonnegative profile are covered in every dimension.  A mixed force at
n = 20 triggers a scope warning instead.
"""
import warnings

from selfsim_ns.forces import make_force
from selfsim_ns.solver import solve_selfsimilar
from selfsim_ns.sphere import build_grid

grid = build_grid(20, 64)
sol, rep = solve_selfsimilar(make_force("radial-cosine", {}, grid, amplitude=0.05))
print(rep.message, "| worst relative gap", f"{max(rep.identities.relative.values()):.1e}")

with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    solve_selfsimilar(make_force("mixed", {}, grid, amplitude=0.05), validate=False)
for w in caught:
    print("warning:", w.message)
