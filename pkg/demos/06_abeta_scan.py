"""Numerical check that the weight |x|^(2b-n+1) / (1+|x|)^2 behaves like an A_b weight."""
from selfsim_ns.abeta import WeightConfig, abeta_scan, default_balls

balls = default_balls(100)
print(" n   beta   sup product   min product")
for n in (5, 8, 16):
    for beta in (1.5, 2.0, 3.0):
        res = abeta_scan(WeightConfig(n, beta, balls))
        low = min(r[2] for r in res.rows)
        print(f"{n:2d}  {beta:4.1f}  {res.sup:12.4f}  {low:12.6f}")
