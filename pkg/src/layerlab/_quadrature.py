"""Prefix quadrature weights and causal convolution on a uniform time grid."""

from __future__ import annotations

import numpy as np
from scipy.linalg import toeplitz


def prefix_simpson_weights(nt: int, dt: float) -> np.ndarray:
    """Weight matrix W with sum_i W[j, i] g(t_i) ~= integral_0^{t_j} g.

    Composite Simpson when j is even; Simpson on the first j-1 panels plus a
    trapezoid on the final panel when j is odd (j = 1 is a single trapezoid).
    Row 0 is zero.
    """
    W = np.zeros((nt, nt))
    for j in range(1, nt):
        m = j if j % 2 == 0 else j - 1
        if m > 0:
            W[j, 0] += dt / 3.0
            W[j, m] += dt / 3.0
            W[j, 1:m:2] += 4.0 * dt / 3.0
            W[j, 2:m:2] += 2.0 * dt / 3.0
        if m < j:  # final trapezoid panel
            W[j, j - 1] += dt / 2.0
            W[j, j] += dt / 2.0
    return W


def causal_convolution(f: np.ndarray, kernel_lags: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """g(t_j) = integral_0^{t_j} f(tau) K(t_j - tau) dtau on the shared grid.

    kernel_lags[m] must be K(m * dt); weights from prefix_simpson_weights.
    """
    nt = len(f)
    T = toeplitz(kernel_lags, np.zeros(nt))
    return (weights * T) @ f
