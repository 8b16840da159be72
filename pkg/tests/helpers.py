"""Shared field builders for the tests."""
import numpy as np

from selfsim_ns.sphere import AxisymField, build_grid


def smooth_field(grid, coeffs_a, coeffs_b):
    """Field whose profiles are polynomials in cos(theta) with given coefficients."""
    x = grid.x
    return AxisymField(grid, np.polynomial.polynomial.polyval(x, coeffs_a),
                       np.polynomial.polynomial.polyval(x, coeffs_b))


def random_field(grid, seed=0, degree=5, scale=1.0):
    rng = np.random.default_rng(seed)
    ca = scale * rng.standard_normal(degree + 1) / (1 + np.arange(degree + 1)) ** 2
    cb = scale * rng.standard_normal(degree + 1) / (1 + np.arange(degree + 1)) ** 2
    return smooth_field(grid, ca, cb)


def random_divfree(grid, seed=0, degree=6, scale=1.0):
    """Divergence-free field built from a random poloidal potential."""
    rng = np.random.default_rng(seed)
    c = scale * rng.standard_normal(degree + 1) / (1 + np.arange(degree + 1)) ** 2
    c[0] = 0.0
    return AxisymField.from_potential(grid, np.polynomial.polynomial.polyval(grid.x, c))
