"""Truncated germs of orientation-preserving maps fixing the origin.

A :class:`Jet` of order ``r`` stores the Taylor coefficients ``c_1..c_r`` of

    F(x) = c_1 x + c_2 x**2 + ... + c_r x**r + o(x**r),     c_1 > 0.

Coefficients may be exact (``int`` / ``fractions.Fraction``) or floats; the
exact backend is used to verify identities without rounding, the float
backend for everything computed from interval maps. Composition of two
float jets goes through the compiled kernel when it is available.

Examples
--------
>>> f = Jet.parse("1 1 0 0")          # x + x^2 at order 4
>>> (f @ f).coeffs
(1, 2, 2, 1)
>>> invert(f).coeffs
(Fraction(1, 1), Fraction(-1, 1), Fraction(2, 1), Fraction(-5, 1))
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from . import kernels

FLAT_TOL = 1e-10


class JetError(ValueError):
    """Invalid jet data or an operation outside its domain."""


def _exact(values) -> bool:
    return all(isinstance(v, Rational) for v in values)


@dataclass(frozen=True)
class Jet:
    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) < 1:
            raise JetError("a jet needs order >= 1")
        if not coeffs[0] > 0:
            raise JetError(f"leading coefficient must be positive, got {coeffs[0]}")

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def exact(self) -> bool:
        return _exact(self.coeffs)

    def __getitem__(self, k: int):
        """Coefficient of ``x**k`` (``k >= 1``); zero beyond the order."""
        if k < 1:
            raise IndexError("jet coefficients start at x**1")
        return self.coeffs[k - 1] if k <= self.order else 0

    def __matmul__(self, other: "Jet") -> "Jet":
        return compose(self, other)

    def __str__(self) -> str:
        return " ".join(str(c) for c in self.coeffs)

    @classmethod
    def identity(cls, order: int, exact: bool = True) -> "Jet":
        one, zero = (1, 0) if exact else (1.0, 0.0)
        return cls((one,) + (zero,) * (order - 1))

    @classmethod
    def linear(cls, alpha, order: int) -> "Jet":
        """The germ ``L_alpha(x) = alpha x``."""
        zero = 0 if isinstance(alpha, Rational) else 0.0
        return cls((alpha,) + (zero,) * (order - 1))

    @classmethod
    def parse(cls, text: str) -> "Jet":
        """Read the literal ``"c1 c2 ... cr"``; ``a/b`` tokens stay exact."""
        out = []
        for tok in text.replace(",", " ").split():
            if "/" in tok:
                out.append(Fraction(tok))
            else:
                try:
                    out.append(int(tok))
                except ValueError:
                    out.append(float(tok))
        return cls(tuple(out))

    def to_exact(self) -> "Jet":
        return Jet(tuple(Fraction(c) for c in self.coeffs))

    def to_float(self) -> "Jet":
        return Jet(tuple(float(c) for c in self.coeffs))

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            zero = 0 if self.exact else 0.0
            return Jet(self.coeffs + (zero,) * (order - self.order))
        return Jet(self.coeffs[:order])

    def taylor(self) -> np.ndarray:
        """Float Taylor vector ``[0, c_1, ..., c_r]``."""
        return np.array([0.0] + [float(c) for c in self.coeffs])

    def distance_from_identity(self) -> float:
        return max(abs(float(c) - (1.0 if i == 0 else 0.0)) for i, c in enumerate(self.coeffs))

    def __call__(self, x):
        """Evaluate the truncated polynomial (small ``x`` only makes sense)."""
        return sum(c * x ** (i + 1) for i, c in enumerate(self.coeffs))


def _series_compose_exact(f: Sequence, g: Sequence) -> list:
    # f, g without constant terms; returns coefficients of f o g
    r = len(f)
    out = [0] * r
    power = [0] * r  # g**j, starts at g**1
    power[:] = list(g)
    for j in range(1, r + 1):
        fj = f[j - 1]
        if fj != 0:
            for i in range(j - 1, r):
                out[i] += fj * power[i]
        if j < r:
            nxt = [0] * r
            for i in range(r):
                if power[i] == 0:
                    continue
                for k in range(r - i - 1):
                    nxt[i + k + 1] += power[i] * g[k]
            power = nxt
    return out


def compose(f: Jet, g: Jet) -> Jet:
    """Jet of ``f o g`` truncated at the common order."""
    if f.order != g.order:
        raise JetError(f"order mismatch: {f.order} vs {g.order}")
    if f.exact and g.exact:
        return Jet(tuple(_series_compose_exact(f.coeffs, g.coeffs)))
    out = kernels.series_compose(f.taylor(), g.taylor())
    return Jet(tuple(float(v) for v in out[1:]))


def invert(f: Jet) -> Jet:
    """Compositional inverse through order ``r``."""
    r = f.order
    c1 = f.coeffs[0]
    inv1 = Fraction(1) / c1 if f.exact else 1.0 / c1
    zero = 0 if f.exact else 0.0
    g = [inv1] + [zero] * (r - 1)
    for k in range(2, r + 1):
        fg = compose(f, Jet(tuple(g)))
        g[k - 1] = -fg.coeffs[k - 1] / c1
    return Jet(tuple(g))


def power(f: Jet, n: int) -> Jet:
    """``f`` composed with itself ``n`` times (negative ``n`` uses the inverse)."""
    if n < 0:
        return power(invert(f), -n)
    result = Jet.identity(f.order, exact=f.exact)
    base = f
    while n:
        if n & 1:
            result = compose(result, base)
        n >>= 1
        if n:
            base = compose(base, base)
    return result


def nonlinearity(f: Jet):
    """``A(F) = F''(0) / F'(0) = 2 c_2 / c_1``."""
    if f.order < 2:
        raise JetError("nonlinearity needs order >= 2")
    c1, c2 = f.coeffs[:2]
    if f.exact:
        c1 = Fraction(c1)
    return 2 * c2 / c1


def schwarzian(f: Jet):
    """``S(F) = 6 c_3 / c_1 - 6 (c_2 / c_1)**2``."""
    if f.order < 3:
        raise JetError("Schwarzian needs order >= 3")
    c1, c2, c3 = f.coeffs[:3]
    if f.exact:
        c1 = Fraction(c1)
    return 6 * c3 / c1 - 6 * (c2 / c1) ** 2


def is_flat(f: Jet, k: int, tol: float = FLAT_TOL) -> bool:
    """True when ``c_1 = 1`` and ``c_2 = ... = c_k = 0``.

    Exact jets are compared exactly; float jets within ``tol`` relative to
    ``max(1, |c_1|)``.
    """
    if k > f.order:
        raise JetError(f"flatness order {k} exceeds jet order {f.order}")
    if f.exact:
        return f.coeffs[0] == 1 and all(c == 0 for c in f.coeffs[1:k])
    scale = tol * max(1.0, abs(float(f.coeffs[0])))
    return abs(f.coeffs[0] - 1.0) <= scale and all(abs(c) <= scale for c in f.coeffs[1:k])


def _binom(alpha, j: int):
    out = Fraction(1) if isinstance(alpha, Rational) else 1.0
    for i in range(j):
        out = out * (alpha - i) / (i + 1)
    return out


def vector_field_flow(s: int, mu, t, order: int) -> Jet:
    """Time-``t`` map of the flow of ``mu x**s d/dx`` as a jet.

    Closed form ``x (1 - (s-1) mu t x**(s-1))**(-1/(s-1))``; for ``s = 2``
    this is ``x / (1 - mu t x)``.
    """
    if not 2 <= s <= order:
        raise JetError(f"need 2 <= s <= order, got s={s}, order={order}")
    exact = isinstance(mu, Rational) and isinstance(t, Rational)
    zero = 0 if exact else 0.0
    coeffs = [zero] * order
    coeffs[0] = 1 if exact else 1.0
    alpha = Fraction(-1, s - 1) if exact else -1.0 / (s - 1)
    z = -(s - 1) * mu * t
    j = 1
    while 1 + j * (s - 1) <= order:
        coeffs[j * (s - 1)] = _binom(alpha, j) * z ** j
        j += 1
    return Jet(tuple(coeffs))


def linearize(f: Jet) -> Jet:
    """Normalized ``Phi`` with ``Phi o F o Phi^{-1} = L_{c_1}`` through order r.

    Requires ``c_1 != 1``; ``Phi'(0) = 1``.
    """
    alpha = f.coeffs[0]
    if alpha == 1:
        raise JetError("linearization needs c_1 != 1")
    r = f.order
    one = Fraction(1) if f.exact else 1.0
    # rows of powers F**j, j = 1..r
    powers = [f]
    for _ in range(r - 1):
        powers.append(_mul_series(powers[-1], f))
    phi = [one] + [0 * one] * (r - 1)
    for k in range(2, r + 1):
        acc = 0 * one
        for j in range(1, k):
            acc += phi[j - 1] * powers[j - 1].coeffs[k - 1]
        phi[k - 1] = acc / (alpha - alpha ** k)
    return Jet(tuple(phi))


def _mul_series(a: Jet, b: Jet) -> Jet:
    # pointwise product of two series without constant term (not composition);
    # bypasses the c_1 > 0 invariant, so returns a bare holder
    r = a.order
    out = [0 * a.coeffs[0]] * r
    for i in range(r):
        for k in range(r - i - 1):
            out[i + k + 1] += a.coeffs[i] * b.coeffs[k]
    return _Series(tuple(out))


@dataclass(frozen=True)
class _Series:
    coeffs: tuple

    @property
    def order(self):
        return len(self.coeffs)


def lie_exp(field: Sequence, t, order: int) -> Jet:
    """Time-``t`` map of the vector field ``sum_j field[j] x**j d/dx``.

    ``field[j]`` is the coefficient of ``x**j`` (entries 0 and 1 must vanish,
    the field starts at ``x**2``). The Lie series ``sum t^n/n! L^n(x)`` with
    ``L(g) = X g'`` terminates at ``n = order - 1`` on jets, so the result is
    exact through ``order``.
    """
    r = order
    one = 1 if all(isinstance(v, Rational) for v in field) and isinstance(t, Rational) else 1.0
    zero = 0 * one
    # coefficient lists indexed by power 0..r
    term = [zero] * (r + 1)
    term[1] = one
    result = list(term)
    for n in range(1, r):
        deriv = [(i + 1) * term[i + 1] for i in range(r)] + [zero]
        nxt = [zero] * (r + 1)
        for j, a in enumerate(field):
            if j < 2 or a == 0:
                continue
            for i in range(r + 1 - j):
                if deriv[i] != 0:
                    nxt[i + j] += a * deriv[i]
        if isinstance(one, int):
            scale = Fraction(t) / n
        else:
            scale = float(t) / n
        term = [scale * v for v in nxt]
        result = [u + v for u, v in zip(result, term)]
    return Jet(tuple(result[1:]))


class GermFlow:
    """One-parameter family ``F^t`` with ``F^1 = F`` and a group law to order r.

    Exact jets with ``c_1 != 1`` use ``Phi^{-1} o L_{c_1^t} o Phi`` with ``Phi``
    from :func:`linearize`. For ``c_1 = 1`` the generating vector field
    ``sum_k a_k x**(k+1) d/dx`` is solved for one order at a time: ``a_k`` is
    the mismatch at order ``k+1`` between ``F`` and the time-one map of the
    field found so far, and ``F^t`` is the time-``t`` map of the result.
    Float jets with ``c_1 != 1`` use the same scheme with a linear term
    ``log(c_1) x d/dx`` in the field; this stays well conditioned as
    ``c_1 -> 1``, where the denominators of :func:`linearize` vanish.
    """

    def __init__(self, f: Jet, tol: float = FLAT_TOL):
        self.base = f
        self.order = f.order
        c1 = f.coeffs[0]
        self.unipotent = (c1 == 1) if f.exact else abs(c1 - 1.0) <= tol
        if self.unipotent:
            r = self.order
            zero = 0 if f.exact else 0.0
            field = [zero] * (r + 1)
            for k in range(1, r):
                current = lie_exp(field, 1, r)
                field[k + 1] = f.coeffs[k] - current.coeffs[k]
            self.field = field
        elif not f.exact:
            self.field = _float_log(f)
        else:
            self._phi = linearize(f)
            self._phi_inv = invert(self._phi)

    def __call__(self, t) -> Jet:
        r = self.order
        if self.unipotent:
            return lie_exp(self.field, t, r)
        if not self.base.exact:
            return _float_exp(self.field, float(t))
        c1 = self.base.coeffs[0]
        if isinstance(t, int) and self.base.exact:
            scale = c1 ** t
        else:
            scale = float(c1) ** float(t)
        phi, phi_inv = self._phi, self._phi_inv
        if not isinstance(scale, Rational):
            phi, phi_inv = phi.to_float(), phi_inv.to_float()
        return compose(phi_inv, compose(Jet.linear(scale, r), phi))


def _float_exp(field: np.ndarray, t: float) -> Jet:
    """Time-``t`` map of ``sum_j field[j] x**j d/dx`` (float, linear term allowed).

    Lie series on ``t / 2**m`` with ``|t field[1]| / 2**m <= 1``, then ``m``
    squarings.
    """
    r = len(field) - 1
    m = max(0, math.ceil(math.log2(abs(t * field[1])))) if field[1] != 0 and abs(t * field[1]) > 1 else 0
    tau = t / 2 ** m
    term = np.zeros(r + 1)
    term[1] = 1.0
    out = term.copy()
    for n in range(1, r + 60):
        deriv = np.zeros(r + 1)
        deriv[:r] = np.arange(1, r + 1) * term[1:]
        nxt = np.convolve(field, deriv)[: r + 1]
        term = nxt * (tau / n)
        out += term
        if not term.any() or np.max(np.abs(term)) <= 1e-17 * np.max(np.abs(out)):
            break
    g = Jet(tuple(float(v) for v in out[1:]))
    for _ in range(m):
        g = compose(g, g)
    return g


def _float_log(f: Jet) -> np.ndarray:
    """Field ``v`` with time-one map ``f``, one order at a time.

    The order-``k`` coefficient of the time-one map depends on ``v_k`` with
    slope ``(c^k - c) / ((k - 1) log c)`` (``1`` when ``c = 1``).
    """
    r = f.order
    c = float(f.coeffs[0])
    a1 = math.log(c)
    field = np.zeros(r + 1)
    field[1] = a1
    target = np.array([float(v) for v in f.coeffs])
    for k in range(2, r + 1):
        slope = 1.0 if a1 == 0 else (c ** k - c) / ((k - 1) * a1)
        for _ in range(3):
            got = _float_exp(field, 1.0).coeffs[k - 1]
            delta = (target[k - 1] - got) / slope
            field[k] += delta
            if abs(delta) <= 1e-16 * max(1.0, abs(field[k])):
                break
    return field


def frac_iterate(f: Jet, t) -> Jet:
    """The time-``t`` element ``F^t`` of the flow through ``F``."""
    return GermFlow(f)(t)


def cocycle_residuals(f: Jet, g: Jet) -> tuple:
    """Residuals of ``A(f o g) = A(f) g' + A(g)`` and ``S(f o g) = S(f) g'^2 + S(g)``."""
    fg = compose(f, g)
    g1 = g.coeffs[0]
    ra = nonlinearity(fg) - (nonlinearity(f) * g1 + nonlinearity(g))
    rs = schwarzian(fg) - (schwarzian(f) * g1 ** 2 + schwarzian(g))
    return ra, rs


def sign(x, tol: float = 0.0) -> int:
    x = float(x)
    if math.isnan(x) or abs(x) <= tol:
        return 0
    return 1 if x > 0 else -1
