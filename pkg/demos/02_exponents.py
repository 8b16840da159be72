"""Integrability exponents of the head pressure and where they stop being useful."""
from selfsim_ns.head import exponents

print(" n   theta     q      q<4")
for n in range(5, 19):
    e = exponents(n)
    print(f"{n:2d}  {str(e.theta):>7}  {str(e.q):>6}  {'yes' if e.in_existence_range else 'NO'}")
