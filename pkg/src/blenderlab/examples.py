"""Ready-made semigroups and test fixtures.

The polynomial example has three generators on [0, 1]::

    f0(x) = x + eps (x - q0)(x - p)(x - q1)(x - r)
    f1(x) = (1 - delta) x + delta**2
    f2(x) = (1 - delta) x + delta (1 - delta)

``f1`` and ``f2`` fix ``delta`` and ``1 - delta``; ``f0`` has attractors at
``q0``, ``q1`` and a repeller at ``p``.
"""
from __future__ import annotations

import numpy as np

from .maps import IntervalMap, affine, mobius, polynomial
from .semigroup import Semigroup

DEFAULTS = {"q0": 0.1, "p": 0.5, "q1": 0.9, "r": 1.2, "delta": 0.04, "eps": 0.01}


def quartic_f0(q0=0.1, p=0.5, q1=0.9, r=1.2, eps=0.01) -> IntervalMap:
    g = np.polynomial.polynomial.polyfromroots([q0, p, q1, r])
    coeffs = eps * g
    coeffs[1] += 1.0
    m = polynomial(coeffs)
    m.record = {"kind": "polynomial", "coeffs": [float(c) for c in coeffs]}
    return m


def polynomial_example(q0=0.1, p=0.5, q1=0.9, r=1.2, delta=0.04, eps=0.01) -> Semigroup:
    """The three-generator polynomial semigroup; ``J = [2 delta, 1 - 2 delta]``."""
    f0 = quartic_f0(q0, p, q1, r, eps)
    f1 = affine(1.0 - delta, delta ** 2)
    f2 = affine(1.0 - delta, delta * (1.0 - delta))
    params = {"q0": q0, "p": p, "q1": q1, "r": r, "delta": delta, "eps": eps,
              "J": [2.0 * delta, 1.0 - 2.0 * delta]}
    return Semigroup([f0, f1, f2], "polynomial_example", params)


def mobius_model(lam: float = 2.0) -> IntervalMap:
    """``x -> lam x / (1 + (lam - 1) x)``: repeller at 0, attractor at 1, zero Schwarzian.

    Linearizations are ``phi(x) = x / (1 - x)`` at 0 and ``psi(x) = (x - 1) / x`` at 1.
    This map does not send [0, 1] into (0, 1); it is used on the open gap only.
    """
    return mobius(lam, 0.0, lam - 1.0, 1.0)
