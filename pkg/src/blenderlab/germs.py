"""Constructive germ cancellations and the contraction-flow decomposition.

The three cancellation constructions build correction germs ``H`` close to
the identity and repetition counts such that a composition of flat germs
hits a prescribed coefficient exactly. Every result is verified by jet
arithmetic before it is returned. :func:`decompose_into_flows` writes a
compactly supported increasing map as the time-one map of a linear flow
after the time-one map of a conjugated linear flow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .jets import (Jet, compose, is_flat, linearize, nonlinearity, power, schwarzian,
                   vector_field_flow)

DEFAULT_BUDGET = 10 ** 6


class CancellationError(ValueError):
    """Preconditions violated or no repetition counts within the budget."""


@dataclass
class CancellationResult:
    correction_jets: list
    m: int | None
    n: int
    composed: Jet
    target_coefficient: object
    residuals: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "correction_jets": [str(h) for h in self.correction_jets],
            "m": self.m,
            "n": self.n,
            "composed": str(self.composed),
            "target": str(self.target_coefficient),
            "residuals": {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.residuals.items()},
        }


def _deviation(h: Jet) -> float:
    return h.distance_from_identity()


def _window(m: int, a, b) -> range:
    """Integers ``n >= 1`` that can satisfy ``|m a + n b| < 1`` (checked exactly by the caller)."""
    ends = sorted(((-1 - m * float(a)) / float(b), (1 - m * float(a)) / float(b)))
    return range(max(1, math.floor(ends[0])), max(1, math.ceil(ends[1])) + 1)


def two_flat_cancel(F1: Jet, F2: Jet, alpha=0, beta=0, nbhd: float = math.inf,
                    budget: int = DEFAULT_BUDGET) -> CancellationResult:
    """Corrections for ``A(F2^n) + A((H o F1)^m) + alpha = 0`` with an S-sign condition.

    ``H = x - c x^2 + c^2 x^3`` has ``S(H) = 0`` and ``A(H) = -2c``; for 1-flat
    germs ``A`` and ``S`` are additive, so

        c = (m A(F1) + n A(F2) + alpha) / (2 m).

    The search takes the smallest ``m``, then the smallest ``n``, with
    ``|m A(F1) + n A(F2)| < 1``, ``max(|c|, c^2) <= nbhd`` and
    ``S(F1) (n S(F2) + m S(F1) + beta) > 0``.
    """
    if F1.order != F2.order or F1.order < 3:
        raise CancellationError("need two jets of equal order >= 3")
    if not (is_flat(F1, 1) and is_flat(F2, 1)):
        raise CancellationError("F1 and F2 must be 1-flat")
    exact = F1.exact and F2.exact and isinstance(alpha, Rational) and isinstance(beta, Rational)
    A1, A2 = nonlinearity(F1), nonlinearity(F2)
    S1, S2 = schwarzian(F1), schwarzian(F2)
    if not (A1 * A2 < 0 and S1 * S2 < 0):
        raise CancellationError(f"signs not opposite: A=({A1}, {A2}), S=({S1}, {S2})")
    if not abs(S1 / A1) > abs(S2 / A2):
        raise CancellationError("need |S/A(F1)| > |S/A(F2)|")
    for m in range(1, budget + 1):
        for n in _window(m, A1, A2):
            lin = m * A1 + n * A2
            if not abs(lin) < 1:
                continue
            c = Fraction(lin + alpha) / (2 * m) if exact else (lin + alpha) / (2.0 * m)
            if max(abs(c), c * c) > nbhd:
                continue
            if not S1 * (n * S2 + m * S1 + beta) > 0:
                continue
            return _finish_two_flat(F1, F2, alpha, beta, m, n, c, exact)
    raise CancellationError("no (m, n) within budget")


def _finish_two_flat(F1, F2, alpha, beta, m, n, c, exact):
    r = F1.order
    zero = 0 if exact else 0.0
    one = 1 if exact else 1.0
    H = Jet((one, -c, c * c) + (zero,) * (r - 3))
    composed = compose(power(F2, n), power(compose(H, F1), m))
    a_id = nonlinearity(power(F2, n)) + nonlinearity(power(compose(H, F1), m)) + alpha
    s_expr = schwarzian(power(F2, n)) + schwarzian(power(compose(H, F1), m)) + beta
    if exact:
        ok = a_id == 0
    else:
        ok = abs(a_id) < 1e-9
    if not ok or not schwarzian(F1) * s_expr > 0:
        raise CancellationError("verification failed")  # pragma: no cover
    return CancellationResult([H], m, n, composed, alpha,
                              {"A_identity": a_id, "S_expression": s_expr, "S_of_H": schwarzian(H)})


def next_order_cancel(F1: Jet, F2: Jet, alpha, r: int, nbhd: float = math.inf,
                      budget: int = DEFAULT_BUDGET) -> CancellationResult:
    """Correction ``H = x - c x^{r+1}`` with ``F2^m o (H o F1)^n = x + alpha x^{r+1} + ...``.

    With ``a_i`` the ``x^{r+1}`` coefficient of ``F_i``, coefficients of order
    ``r + 1`` add under composition of r-flat germs, so
    ``c = (m a_2 + n a_1 - alpha) / n``.
    """
    if r < 2:
        raise CancellationError("need r >= 2")
    if F1.order < r + 1 or F2.order < r + 1:
        raise CancellationError("jets must have order >= r + 1")
    F1, F2 = F1.truncate(r + 1), F2.truncate(r + 1)
    if not (is_flat(F1, r) and is_flat(F2, r)):
        raise CancellationError("F1 and F2 must be r-flat")
    a1, a2 = F1[r + 1], F2[r + 1]
    if not a1 * a2 < 0:
        raise CancellationError("leading coefficients must have opposite signs")
    exact = F1.exact and F2.exact and isinstance(alpha, Rational)
    for m in range(1, budget + 1):
        for n in _window(m, a2, a1):
            lin = m * a2 + n * a1
            if not abs(lin) < 1:
                continue
            c = Fraction(lin - alpha, 1) / n if exact else (lin - alpha) / float(n)
            if abs(c) > nbhd:
                continue
            zero = 0 if exact else 0.0
            one = 1 if exact else 1.0
            H = Jet((one,) + (zero,) * (r - 1) + (-c,))
            composed = compose(power(F2, m), power(compose(H, F1), n))
            resid = composed[r + 1] - alpha
            if not is_flat(composed, r) or (exact and resid != 0) or (not exact and abs(resid) > 1e-9):
                raise CancellationError("verification failed")  # pragma: no cover
            return CancellationResult([H], m, n, composed, alpha,
                                      {"coefficient_residual": resid})
    raise CancellationError("no (m, n) within budget")


def commutator(r: int, mu, t, order: int | None = None) -> Jet:
    """``G^t o H_mu^t o G^{-t} o H_mu^{-t}`` for the flows of ``x^2 d/dx`` and ``mu x^r d/dx``."""
    order = order or r + 1
    G = lambda s: vector_field_flow(2, 1 if isinstance(s, Rational) else 1.0, s, order)
    H = lambda s: vector_field_flow(r, mu, s, order)
    return compose(G(t), compose(H(t), compose(G(-t), H(-t))))


def commutator_cancel(F: list, alpha, r: int, nbhd: float = math.inf,
                      budget: int = DEFAULT_BUDGET) -> CancellationResult:
    """Four corrections making ``(H4 F4)^n ... (H1 F1)^n = x + alpha x^{r+1} + ...``.

    ``H1 = H_mu^{-t}``, ``H2 = G^{-t}``, ``H3 = H_mu^{t}``, ``H4 = G^{t}`` with
    ``mu = c - alpha / n``, ``t = 1 / sqrt(n (r - 2))`` and ``c`` the sum of the
    ``x^{r+1}`` coefficients of the ``F_i``. ``n`` is the smallest value for
    which every correction lies within ``nbhd`` of the identity.
    """
    if r < 3:
        raise CancellationError("commutator cancellation needs r >= 3 (the factor r - 2 vanishes)")
    if len(F) != 4:
        raise CancellationError("need four germs")
    if any(f.order < r + 1 for f in F):
        raise CancellationError("jets must have order >= r + 1")
    F = [f.truncate(r + 1).to_float() for f in F]
    if not all(is_flat(f, r) for f in F):
        raise CancellationError("all germs must be r-flat")
    c = sum(f[r + 1] for f in F)
    alpha = float(alpha)
    for n in range(1, budget + 1):
        mu = c - alpha / n
        t = 1.0 / math.sqrt(n * (r - 2))
        G = lambda s: vector_field_flow(2, 1.0, s, r + 1)
        Hm = lambda s: vector_field_flow(r, mu, s, r + 1)
        Hs = [Hm(-t), G(-t), Hm(t), G(t)]
        if max(_deviation(h) for h in Hs) > nbhd:
            continue
        composed = Jet.identity(r + 1, exact=False)
        for h, f in zip(Hs, F):
            composed = compose(power(compose(h, f), n), composed)
        resid = composed[r + 1] - alpha
        if not is_flat(composed, r, tol=1e-9) or abs(resid) > 1e-9:
            raise CancellationError(f"verification failed (residual {resid:.3e})")
        return CancellationResult(Hs, None, n, composed, alpha,
                                  {"coefficient_residual": resid, "mu": mu, "t": t, "c": c})
    raise CancellationError("no n within budget")


# ------------------------------------------------------------ flow decomposition


@dataclass
class FlowPair:
    """``F = G^1 o H^1`` on the support window.

    ``G^t(x) = lam^{-t} x``; ``H^t(x) = kappa^{-1}(mu^t kappa(x))`` with
    ``kappa`` the Koenigs coordinate of ``F_lam = lam F`` at its fixed point.
    """

    F: object
    lam: float
    mu: float
    fixed_point: float
    window: tuple
    support: tuple
    _local: Jet = None
    _steps: int = 2000

    def G(self, t, x):
        return self.lam ** (-t) * np.asarray(x, dtype=float)

    def F_lam(self, x):
        return self.lam * np.asarray(self.F(x))

    def kappa(self, x):
        """Koenigs coordinate ``lim mu^{-n} (F_lam^n(x) - p)`` with a local-jet tail."""
        y = np.array(x, dtype=float, copy=True)
        p = self.fixed_point
        scale = np.ones_like(y)
        for _ in range(self._steps):
            far = np.abs(y - p) > 1e-4
            if not far.any():
                break
            y[far] = self.F_lam(y[far])
            scale[far] /= self.mu
        return scale * self._local(y - p)

    def kappa_inv(self, u):
        u = np.asarray(u, dtype=float)
        lo, hi = self.window
        p = self.fixed_point
        a = np.full(u.shape, lo)
        b = np.full(u.shape, hi)
        # kappa is increasing; widen the bracket away from p until it holds u
        for _ in range(60):
            low, high = self.kappa(a) > u, self.kappa(b) < u
            if not (low.any() or high.any()):
                break
            a = np.where(low, p - 2.0 * (p - a), a)
            b = np.where(high, p + 2.0 * (b - p), b)
        for _ in range(80):
            m = 0.5 * (a + b)
            above = self.kappa(m) > u
            b = np.where(above, m, b)
            a = np.where(above, a, m)
        return 0.5 * (a + b)

    def H(self, t, x):
        x = np.asarray(x, dtype=float)
        return self.kappa_inv(self.mu ** t * self.kappa(x))


def decompose_into_flows(F, interval, lam_factor: float = 0.9, dilation: float = 3.0) -> FlowPair:
    """Flows ``G^t``, ``H^t`` with ``G^1 o H^1 = F``.

    ``F`` must be increasing and equal to the identity outside ``interval``.
    ``lam = lam_factor / sup F'`` on the window obtained by dilating
    ``interval`` by ``dilation`` about its midpoint, so ``lam F`` is a uniform
    contraction with a unique fixed point.
    """
    lo, hi = map(float, interval)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    w = (mid - dilation * half, mid + dilation * half)
    grid = np.linspace(w[0], w[1], 20001)
    sup = float(np.max(F.deriv(grid)))
    if not np.isfinite(sup) or sup <= 0:
        raise ValueError("F is not increasing on the window")
    lam = lam_factor / sup
    # fixed point of lam F, by contraction from the window midpoint
    p = mid
    for _ in range(100000):
        pn = lam * float(F(p))
        if abs(pn - p) <= 1e-16 * max(1.0, abs(p)):
            p = pn
            break
        p = pn
    else:
        raise ValueError("Koenigs iteration did not converge")
    mu = lam * float(F.deriv(p))
    local = F.jet(p, 4) if hasattr(F, "jet") else Jet((float(F.deriv(p)),))
    local_lam = Jet(tuple(lam * c for c in local.coeffs))
    phi = linearize(local_lam) if abs(local_lam.coeffs[0] - 1.0) > 1e-12 else Jet.identity(4, exact=False)
    # the Koenigs window must contain every orbit it is asked to invert; extend it
    # down to the fixed point
    win = (min(w[0], p - 1e-3), max(w[1], p + 1e-3))
    return FlowPair(F, lam, mu, p, win, (lo, hi), phi)
