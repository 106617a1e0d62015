"""Single shared kernel for lattice exponential sums.

Both the scalar and field evaluation paths of every series in the package
funnel through :func:`phase_sum`, which fixes the floating-point expression
tree (one fused phase k*x + k**3*t, numpy complex exp, ascending-index
accumulation).  Keeping a single kernel guarantees that evaluating a series
point by point and evaluating it on a grid produce identical bits.
"""

from __future__ import annotations

import numpy as np


def phase_sum(coeffs: np.ndarray, ks: np.ndarray, x, t) -> np.ndarray:
    """Sum_n coeffs[n] * exp(i*(k_n*x + k_n**3*t)) with a fixed summation order.

    ``coeffs`` and ``ks`` are 1-d and aligned; ``x`` and ``t`` broadcast
    against each other and the result keeps their broadcast shape.  Terms are
    accumulated in ascending lattice order, one mode at a time.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    ks = np.asarray(ks, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    shape = np.broadcast_shapes(x.shape, t.shape)
    acc = np.zeros(shape, dtype=np.complex128)
    for c, k in zip(coeffs, ks):
        if c == 0.0:
            continue
        acc = acc + c * np.exp(1j * (k * x + (k * k * k) * t))
    return acc


def weighted_phase_sum(
    coeffs: np.ndarray, weights: np.ndarray, ks: np.ndarray, x, t
) -> np.ndarray:
    """phase_sum with per-mode scalar weights folded into the coefficients.

    The product coeffs*weights is formed once, elementwise, before the sum,
    so a weighted evaluation agrees bitwise with phase_sum on the pre-scaled
    coefficients.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    weights = np.asarray(weights)
    return phase_sum(coeffs * weights, ks, x, t)
