"""A one-line ODE that shows how existence can be lost at a fold.

The ansatz u = C/x turns -u'' + u u' = c/x^3 into C^2 + 2C + c = 0.  Below
c = 1 there are two solutions; they merge at c = 1 and vanish beyond it.
"""
from selfsim_ns.toy import fold_continuation, nonexistence_floor

diagram = fold_continuation(0.0, 1.5, 60)
print(f"fold located at c = {diagram.fold_c:.8f}, C = {diagram.fold_C:.8f}")
for k, name in ((0, "upper"), (1, "lower")):
    pts = diagram.branch(k)
    print(f"{name} branch: {len(pts)} points, C from {pts[0][1]:+.4f} to {pts[-1][1]:+.4f}")
for c in (1.2, 1.5):
    print(f"c = {c}: every C leaves a residual of at least {nonexistence_floor(c):.3f}")

# the collocation version solves the boundary value problem instead of the quadratic
bvp = fold_continuation(0.0, 1.0, 60, mode="bvp")
print(f"collocation fold: c = {bvp.fold_c:.8f}")
