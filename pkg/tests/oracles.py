"""Frozen reference values.

Every number here was computed once, independently of the package (closed
forms evaluated with mpmath at 30 digits), and is never regenerated from
package output.
"""
import numpy as np

# free Schrödinger exponent ln((E + sqrt(E^2 - 4)) / 2) outside the spectrum
FREE_LYAPUNOV = {
    2.5: 0.69314718055994530942,
    3.0: 0.962423650119206895,
    4.0: 1.3169578969248167086,
}

# free case: rho(E) - rho(-2) = -arccos(-E/2) on [-2, 2]
FREE_ROTATION = {
    -1.0: -1.0471975511965977462,
    0.0: -1.5707963267948966192,
    0.5: -1.8234765819369752727,
    1.0: -2.0943951023931954923,
}

# integral of (1 - t^2) / |t^2 + 2 i t + 1|^2 over (-1, 1) equals pi/4
PHI_WEIGHT_INTEGRAL = 0.78539816339744830962

# contraction margin of exp(i eps J) on the closed disc at eps = 0.1: 1 - e^{-2 eps}
CONTRACTION_MARGIN_EPS_01 = 0.18126924692201815042

# |1 + i| / |sqrt(i)|
PAIR_RATIO_1_I = 1.4142135623730950488

# zero-exponent measure of the free operator over [-3, 3] (the spectrum [-2, 2])
FREE_M = 4.0

# Cayley image of J for d = 1
CAYLEY_J = np.diag([1j, -1j])

# strip transfer matrix at d = 1, v = 0, E = 0
TRANSFER_E0 = np.array([[0.0, -1.0], [1.0, 0.0]])

# adjacency of S = {1, 2} in Z
ADJACENCY_12 = np.array([[0.0, 1.0], [1.0, 0.0]])
