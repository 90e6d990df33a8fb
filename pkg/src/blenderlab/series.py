"""Vectorized truncated Taylor arithmetic.

A Taylor array ``t`` of shape ``(K + 1, N)`` holds ``f^(k)(x_j) / k!`` for
``k = 0..K`` at ``N`` points. These helpers implement the product,
composition and inversion rules used by the interval-map expression tree.
"""
from __future__ import annotations

import numpy as np


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cauchy product of two Taylor arrays, truncated at the common order."""
    K = a.shape[0] - 1
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for i in range(K + 1):
        out[i:] += a[i] * b[: K + 1 - i]
    return out


def compose(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Taylor array of ``F o G`` at ``x``.

    ``inner`` is the expansion of ``G`` at ``x``; ``outer`` the expansion of
    ``F`` at ``G(x)``.
    """
    K = inner.shape[0] - 1
    h = inner.copy()
    h[0] = 0.0
    out = np.zeros(np.broadcast_shapes(outer.shape, inner.shape))
    out[0] = outer[0]
    p = np.zeros_like(h)
    p[0] = 1.0
    for j in range(1, K + 1):
        p = mul(p, h)
        out += outer[j] * p
    return out


def invert(t: np.ndarray, x) -> np.ndarray:
    """Expansion of ``F^{-1}`` at ``F(x)`` from the expansion ``t`` of ``F`` at ``x``."""
    K = t.shape[0] - 1
    g = np.zeros_like(t)
    g[0] = x
    if K == 0:
        return g
    g[1] = 1.0 / t[1]
    shifted = t.copy()
    shifted[0] = 0.0
    for k in range(2, K + 1):
        fg = compose(shifted, g)
        g[k] = -fg[k] / t[1]
    return g


def derivative_scale(t: np.ndarray, scale: float) -> np.ndarray:
    """Expansion of ``u -> F(scale * u)`` given that of ``F`` (chain rule for affine inner maps)."""
    powers = scale ** np.arange(t.shape[0], dtype=float)
    return t * powers.reshape((-1,) + (1,) * (t.ndim - 1))


def nonlinearity(t: np.ndarray) -> np.ndarray:
    """``f'' / f'`` from a Taylor array."""
    return 2.0 * t[2] / t[1]


def schwarzian(t: np.ndarray) -> np.ndarray:
    """``f'''/f' - 1.5 (f''/f')**2`` from a Taylor array."""
    r = t[2] / t[1]
    return 6.0 * t[3] / t[1] - 6.0 * r * r
