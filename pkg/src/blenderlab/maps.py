"""Strictly increasing self-maps of [0, 1] built from closed-form pieces.

An :class:`IntervalMap` wraps an expression tree whose nodes evaluate
truncated Taylor expansions at arrays of points, so values, derivatives and
jets all come from the same code path. Perturbations (local diffeomorphisms,
wiggles, flattening corrections, germ realizations) are identity outside a
recorded support, and evaluate to exactly ``x`` there.

Bumps and plateau windows are piecewise polynomials of class C^4:

    beta(u) = (1 - u**2)**5,                 |u| < 1
    S(t)    = t**5 (126 - 420 t + 540 t**2 - 315 t**3 + 70 t**4),  0 <= t <= 1

so jets of order <= 3 are exact away from the seams.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from . import kernels, series
from .jets import Jet

DEFAULT_ORDER = 3
VALIDATION_GRID = 4097

_BUMP = P.polypow([1.0, 0.0, -1.0], 5)  # (1 - u^2)^5 in powers of u
_STEP = np.array([0, 0, 0, 0, 0, 126.0, -420.0, 540.0, -315.0, 70.0])


class MapError(ValueError):
    """Invalid map data, a failed validation or an infeasible construction."""


def _factorials(K):
    return np.array([math.factorial(k) for k in range(K + 1)], dtype=float)


def _poly_taylor(coeffs: np.ndarray, x: np.ndarray, K: int) -> np.ndarray:
    out = np.empty((K + 1,) + x.shape)
    c = np.asarray(coeffs, dtype=float)
    fact = _factorials(K)
    for k in range(K + 1):
        if k < len(c):
            out[k] = P.polyval(x, P.polyder(c, k)) / fact[k] if k else P.polyval(x, c)
        else:
            out[k] = 0.0
    return out


# ---------------------------------------------------------------- nodes


class Node:
    """Expression-tree node: ``taylor(x, K)`` returns shape ``(K + 1,) + x.shape``."""

    def taylor(self, x: np.ndarray, K: int) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError


class Poly(Node):
    def __init__(self, coeffs: Sequence[float]):
        self.coeffs = np.asarray(coeffs, dtype=float)

    def taylor(self, x, K):
        return _poly_taylor(self.coeffs, x, K)


class Bumps(Node):
    """``sum_k a_k beta((x - m_k) / w_k)``; rows of ``bumps`` are ``(m, w, a)``."""

    def __init__(self, bumps):
        self.bumps = np.asarray(bumps, dtype=float).reshape(-1, 3)

    def taylor(self, x, K):
        out = np.zeros((K + 1,) + x.shape)
        for m, w, a in self.bumps:
            u = (x - m) / w
            inside = np.abs(u) < 1.0
            if not inside.any():
                continue
            t = _poly_taylor(_BUMP, u[inside], K)
            t = series.derivative_scale(t, 1.0 / w)
            out[:, inside] += a * t
        return out


class Plateau(Node):
    """C^4 window: 1 on ``[lo, hi]``, 0 outside ``[lo - ramp, hi + ramp]``."""

    def __init__(self, lo: float, hi: float, ramp: float):
        if not (hi >= lo and ramp > 0):
            raise MapError("plateau needs hi >= lo and ramp > 0")
        self.lo, self.hi, self.ramp = float(lo), float(hi), float(ramp)

    @property
    def support(self):
        return (self.lo - self.ramp, self.hi + self.ramp)

    def taylor(self, x, K):
        out = np.zeros((K + 1,) + x.shape)
        lo, hi, ramp = self.lo, self.hi, self.ramp
        flat = (x >= lo) & (x <= hi)
        out[0, flat] = 1.0
        up = (x > lo - ramp) & (x < lo)
        if up.any():
            t = (x[up] - (lo - ramp)) / ramp
            out[:, up] = series.derivative_scale(_poly_taylor(_STEP, t, K), 1.0 / ramp)
        down = (x > hi) & (x < hi + ramp)
        if down.any():
            t = (hi + ramp - x[down]) / ramp
            out[:, down] = series.derivative_scale(_poly_taylor(_STEP, t, K), -1.0 / ramp)
        return out


class Sine(Node):
    """``a sin(k (x - c))``."""

    def __init__(self, a: float, k: float, c: float):
        self.a, self.k, self.c = float(a), float(k), float(c)

    def taylor(self, x, K):
        th = self.k * (x - self.c)
        s, co = np.sin(th), np.cos(th)
        cyc = [s, co, -s, -co]
        fact = _factorials(K)
        out = np.empty((K + 1,) + x.shape)
        for j in range(K + 1):
            out[j] = self.a * self.k ** j * cyc[j % 4] / fact[j]
        return out


class Mobius(Node):
    """``(a x + b) / (c x + d)``."""

    def __init__(self, a, b, c, d):
        self.a, self.b, self.c, self.d = map(float, (a, b, c, d))

    def taylor(self, x, K):
        a, b, c, d = self.a, self.b, self.c, self.d
        den = c * x + d
        det = a * d - b * c
        out = np.empty((K + 1,) + x.shape)
        out[0] = (a * x + b) / den
        for k in range(1, K + 1):
            out[k] = det * (-c) ** (k - 1) / den ** (k + 1)
        return out


class Sum(Node):
    def __init__(self, nodes: Iterable[Node]):
        self.nodes = list(nodes)

    def taylor(self, x, K):
        out = np.zeros((K + 1,) + x.shape)
        for n in self.nodes:
            out += n.taylor(x, K)
        return out


class Prod(Node):
    """``window * other``; ``other`` is only evaluated where the window is nonzero."""

    def __init__(self, window: Node, other: Node):
        self.window, self.other = window, other

    def taylor(self, x, K):
        w = self.window.taylor(x, K)
        live = np.any(w != 0.0, axis=0)
        out = np.zeros((K + 1,) + x.shape)
        if live.any():
            o = self.other.taylor(x[live], K)
            out[:, live] = series.mul(w[:, live], o)
        return out


class Comp(Node):
    """``outer o inner``."""

    def __init__(self, outer: Node, inner: Node):
        self.outer, self.inner = outer, inner

    def taylor(self, x, K):
        t_in = self.inner.taylor(x, K)
        t_out = self.outer.taylor(t_in[0], K)
        return series.compose(t_out, t_in)


class Inverse(Node):
    """Inverse of an increasing map node, solved on ``[lo, hi]``."""

    def __init__(self, base: Node, lo: float, hi: float):
        self.base, self.lo, self.hi = base, float(lo), float(hi)

    def taylor(self, y, K):
        x = solve_increasing(lambda z: self.base.taylor(z, 1), y, self.lo, self.hi)
        t = self.base.taylor(x, K)
        return series.invert(t, x)


class WordNode(Node):
    """Composition of generator nodes along letters in application order."""

    def __init__(self, nodes: Sequence[Node], letters: Sequence[int], poly_table=None, patches=None):
        self.nodes = list(nodes)
        self.letters = [int(s) for s in letters]
        self.poly_table = poly_table  # (table, degrees, is_poly) for the fast path
        # (patched, lo, hi, patch_nodes, table, degrees): generators that are a
        # perturbation after a polynomial, the union of perturbation supports
        # and the base polynomial table
        self.patches = patches

    def _segments(self):
        # consecutive runs of polynomial letters are handed to the kernel
        if self.poly_table is None:
            return [(False, [s]) for s in self.letters]
        _, _, is_poly = self.poly_table
        segs = []
        for s in self.letters:
            fast = bool(is_poly[s])
            if segs and segs[-1][0] and fast:
                segs[-1][1].append(s)
            else:
                segs.append((fast, [s]))
        return segs

    def _patched_taylor(self, x, K):
        patched, lo, hi, patch_nodes, table, degrees = self.patches
        word = np.asarray(self.letters, dtype=np.int64)
        nl = len(word)
        y, dy = x.astype(float).ravel(), np.ones(x.size)
        pos = np.zeros(x.size, dtype=np.int64)
        while True:
            y, dy, pos = kernels.word_orbit_patched(table, degrees, word, y, dy, pos, patched, lo, hi)
            stop = np.nonzero(pos < nl)[0]
            if stop.size == 0:
                break
            letters = word[pos[stop]]
            for s in np.unique(letters):
                sel = stop[letters == s]
                t = patch_nodes[s].taylor(y[sel], 1)
                y[sel] = t[0]
                dy[sel] *= t[1]
            pos[stop] += 1
        out = np.empty((K + 1,) + x.shape)
        out[0] = y.reshape(x.shape)
        if K == 1:
            out[1] = dy.reshape(x.shape)
        return out

    def taylor(self, x, K):
        if self.patches is not None and K <= 1 and len(self.letters):
            return self._patched_taylor(x, K)
        t = np.zeros((K + 1,) + x.shape)
        t[0] = x
        if K >= 1:
            t[1] = 1.0
        for fast, letters in self._segments():
            if fast and K <= 1:
                table, degrees, _ = self.poly_table
                y, dy = kernels.word_orbit(table, degrees, np.asarray(letters, dtype=np.int64), t[0])
                seg = np.empty_like(t)
                seg[0] = y
                if K == 1:
                    seg[1] = dy * t[1]
                t = seg
            else:
                for s in letters:
                    t = series.compose(self.nodes[s].taylor(t[0], K), t)
        return t


def solve_increasing(taylor1, y, lo, hi, tol: float = 4e-16, iters: int = 200):
    """Vectorized safeguarded Newton for ``F(x) = y`` with ``F`` increasing on ``[lo, hi]``.

    ``taylor1(x)`` must return the order-1 Taylor array of ``F`` at ``x``.
    Values of ``y`` outside ``[F(lo), F(hi)]`` are clamped to the end points.
    """
    y = np.asarray(y, dtype=float)
    shape = y.shape
    y = y.ravel()
    a = np.full_like(y, lo)
    b = np.full_like(y, hi)
    x = np.clip(y, lo, hi)
    active = np.ones(y.shape, dtype=bool)
    for _ in range(iters):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        t = taylor1(x[idx])
        g = t[0] - y[idx]
        hit = g == 0.0
        pos = g > 0.0
        b[idx[pos]] = x[idx[pos]]
        a[idx[~pos & ~hit]] = x[idx[~pos & ~hit]]
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = np.where(t[1] > 0.0, x[idx] - g / t[1], 0.5 * (a[idx] + b[idx]))
        bad = ~((xn > a[idx]) & (xn < b[idx]))
        xn[bad] = 0.5 * (a[idx] + b[idx])[bad]
        done = hit | (np.abs(xn - x[idx]) <= tol * np.maximum(1.0, np.abs(x[idx])))
        done |= (b[idx] - a[idx]) <= tol * np.maximum(1.0, np.abs(x[idx]))
        x[idx[~hit]] = xn[~hit]
        active[idx[done]] = False
    return x.reshape(shape)


# ---------------------------------------------------------------- maps


class IntervalMap:
    """Evaluatable strictly increasing map with Taylor data to ``max_order``.

    Parameters
    ----------
    node : Node
        Expression tree.
    record : dict
        Serializable description; :func:`from_record` rebuilds the map.
    support : list of (lo, hi), optional
        For perturbations: where the map may differ from the identity.
    poly : array, optional
        Ascending coefficients when the map is a plain polynomial.
    pb : tuple, optional
        ``(coeffs, bumps)`` when the map is polynomial plus bumps, enabling
        the compiled orbit kernels.
    """

    def __init__(self, node: Node, record: dict, support=None, poly=None, pb=None,
                 max_order: int = 4):
        self.node = node
        self.record = record
        self.support = support
        self.poly = None if poly is None else np.asarray(poly, dtype=float)
        if pb is None and self.poly is not None:
            pb = (self.poly, np.zeros((0, 3)))
        self.pb = pb
        self.max_order = max_order

    def __repr__(self):
        return f"IntervalMap({self.record.get('kind')})"

    def taylor(self, x, order: int = DEFAULT_ORDER) -> np.ndarray:
        xa = np.asarray(x, dtype=float)
        t = self.node.taylor(np.atleast_1d(xa).ravel(), order)
        return t.reshape((order + 1,) + xa.shape)

    def __call__(self, x):
        out = self.taylor(x, 0)[0]
        return float(out) if np.ndim(out) == 0 else out

    def deriv(self, x):
        out = self.taylor(x, 1)[1]
        return float(out) if np.ndim(out) == 0 else out

    def jet(self, x: float, r: int = DEFAULT_ORDER) -> Jet:
        t = self.taylor(float(x), r)
        return Jet(tuple(float(v) for v in t[1:]))

    def inverse(self, y, lo: float = 0.0, hi: float = 1.0):
        out = solve_increasing(lambda z: self.node.taylor(z, 1), np.atleast_1d(y), lo, hi)
        return float(out[0]) if np.ndim(y) == 0 else out.reshape(np.shape(y))

    def __matmul__(self, inner: "IntervalMap") -> "IntervalMap":
        return compose_maps(self, inner)

    def validate(self, grid: int = VALIDATION_GRID, check_range: bool = True,
                 domain=(0.0, 1.0)) -> dict:
        """Check strict monotonicity on a grid and (optionally) ``f([0,1]) in (0,1)``.

        Perturbations are additionally sampled densely around their supports.
        """
        xs = [np.linspace(domain[0], domain[1], grid)]
        for lo, hi in self.support or []:
            xs.append(np.linspace(max(lo, domain[0]), min(hi, domain[1]), grid))
        x = np.unique(np.concatenate(xs))
        t = self.taylor(x, 1)
        dmin = float(t[1].min())
        report = {"min_derivative": dmin, "value_at_0": float(t[0][0]), "value_at_1": float(t[0][-1])}
        if not np.all(np.isfinite(t)):
            raise MapError("map produced non-finite values on the validation grid")
        if dmin <= 0.0:
            raise MapError(f"map is not increasing: min derivative {dmin:.3e}")
        if check_range and not (0.0 < report["value_at_0"] and report["value_at_1"] < 1.0):
            raise MapError(f"map does not send [0,1] into (0,1): f(0)={report['value_at_0']}, "
                           f"f(1)={report['value_at_1']}")
        return report


def eval(f: IntervalMap, x):
    """Value of ``f`` at ``x`` in ``[0, 1]``."""
    xa = np.asarray(x, dtype=float)
    if np.any((xa < 0.0) | (xa > 1.0)):
        raise MapError("point outside [0, 1]")
    return f(x)


def eval_jet(f: IntervalMap, x: float, r: int = DEFAULT_ORDER) -> Jet:
    """Jet of ``y -> f(x + y) - f(x)`` at the origin."""
    if not 0.0 <= x <= 1.0:
        raise MapError("point outside [0, 1]")
    return f.jet(x, r)


# ---------------------------------------------------------------- factories


def identity() -> IntervalMap:
    return IntervalMap(Poly([0.0, 1.0]), {"kind": "identity"}, support=[], poly=[0.0, 1.0])


def polynomial(coeffs: Sequence[float]) -> IntervalMap:
    c = [float(v) for v in coeffs]
    return IntervalMap(Poly(c), {"kind": "polynomial", "coeffs": c}, poly=c)


def affine(slope: float, intercept: float) -> IntervalMap:
    m = polynomial([intercept, slope])
    m.record = {"kind": "affine", "slope": float(slope), "intercept": float(intercept)}
    return m


def poly_bump(coeffs: Sequence[float], bumps) -> IntervalMap:
    """Polynomial plus C^4 bumps; ``bumps`` rows are ``(center, radius, amplitude)``."""
    c = [float(v) for v in coeffs]
    b = np.asarray(bumps, dtype=float).reshape(-1, 3)
    node = Sum([Poly(c), Bumps(b)])
    rec = {"kind": "poly_bump", "coeffs": c, "bumps": b.tolist()}
    return IntervalMap(node, rec, pb=(np.asarray(c), b))


def mobius(a: float, b: float, c: float, d: float) -> IntervalMap:
    """Fractional linear map; used as a closed-form test fixture."""
    return IntervalMap(Mobius(a, b, c, d), {"kind": "mobius", "params": [a, b, c, d]})


def compose_maps(*maps: IntervalMap) -> IntervalMap:
    """``maps[0] o maps[1] o ...``."""
    if not maps:
        return identity()
    node = maps[-1].node
    for m in reversed(maps[:-1]):
        node = Comp(m.node, node)
    supports = None
    if all(m.support is not None for m in maps):
        supports = [iv for m in maps for iv in m.support]
    out = IntervalMap(node, {"kind": "compose", "maps": [m.record for m in maps]}, support=supports)
    # perturbations after a polynomial: remember the split for the patched word kernel
    last, outer = maps[-1], maps[:-1]
    if outer and all(m.support is not None for m in outer):
        if last.poly is not None:
            out.base_poly, out.patch = last.poly, compose_maps(*outer)
        elif getattr(last, "base_poly", None) is not None:
            out.base_poly, out.patch = last.base_poly, compose_maps(*outer, last.patch)
    return out


def _windows_for(points: Sequence[float], support, plateau: float):
    lo, hi = support
    pts = list(points)
    out = []
    for i, x in enumerate(pts):
        reach = min(x - lo, hi - x)
        if i > 0:
            reach = min(reach, 0.5 * (x - pts[i - 1]))
        if i + 1 < len(pts):
            reach = min(reach, 0.5 * (pts[i + 1] - x))
        if reach <= 0:
            raise MapError(f"constraint point {x} not interior to support {support}")
        r0 = plateau * reach
        out.append(Plateau(x - r0, x + r0, reach - r0))
    return out


def make_local_diffeo(constraints, support, plateau: float | None = None) -> IntervalMap:
    """Increasing map, identity outside ``support``, with ``h(x_i) = y_i`` and ``h'(x_i) = d_i``.

    Each constraint gets a C^4 plateau window ``w_i`` around ``x_i`` and

        h(x) = x + sum_i w_i(x) (y_i - x_i + (d_i - 1)(x - x_i)),

    so ``h`` is affine near every ``x_i``. Monotonicity is verified on a dense
    grid; narrower plateaus (longer ramps) are tried before giving up.
    """
    cons = sorted(((float(x), float(y), float(d)) for x, y, d in constraints))
    lo, hi = map(float, support)
    if not lo < hi:
        raise MapError("empty support")
    for x, y, d in cons:
        if not (lo < x < hi and lo < y < hi):
            raise MapError(f"constraint ({x}, {y}) not interior to support")
        if d <= 0:
            raise MapError("derivatives must be positive")
    ys = [c[1] for c in cons]
    if any(b <= a for a, b in zip(ys, ys[1:])):
        raise MapError("constraint values must increase with the points")
    rec = {"kind": "local_diffeo", "constraints": [list(c) for c in cons], "support": [lo, hi]}
    if not cons:
        m = identity()
        m.record = rec
        m.support = []
        return m
    fractions = [plateau] if plateau is not None else [0.1, 0.03, 0.01]
    last = None
    for frac in fractions:
        wins = _windows_for([c[0] for c in cons], (lo, hi), frac)
        terms = [Poly([0.0, 1.0])]
        for (x, y, d), w in zip(cons, wins):
            terms.append(Prod(w, Poly([y - x - (d - 1.0) * x, d - 1.0])))
        h = IntervalMap(Sum(terms), dict(rec, plateau=frac), support=[w.support for w in wins])
        try:
            h.validate(check_range=False, domain=(lo, hi))
            return h
        except MapError as exc:
            last = exc
    raise MapError(f"infeasible constraints: {last}")


def make_wiggle(support, count: int, amplitude_safety: float = 0.4, margin: float = 0.2) -> IntervalMap:
    """``x + a sin(k (x - c)) w(x)`` with at least ``count`` attracting fixed points.

    The plateau of ``w`` is the inner ``1 - 2 margin`` share of the support; ``k``
    places ``count + 1`` full periods on it and ``a k = amplitude_safety``.
    """
    if count < 1:
        raise MapError("count must be >= 1")
    lo, hi = map(float, support)
    width = hi - lo
    if width <= 0:
        raise MapError("empty support")
    ramp = margin * width
    plo, phi = lo + ramp, hi - ramp
    periods = count + 1
    k = 2.0 * math.pi * periods / (phi - plo)
    a = amplitude_safety / k
    # worst case slope: 1 - a k - a |w'|_max with |w'|_max = S'(1/2) / ramp
    slack = a * 2.4609375 / ramp
    if 1.0 - amplitude_safety - slack <= 0.0:
        raise MapError("support too small for the requested count")
    # phase: sin(k (x - c)) zero at the plateau start, attracting zeros where cos = -1
    c = plo
    node = Sum([Poly([0.0, 1.0]), Prod(Plateau(plo, phi, ramp), Sine(a, k, c))])
    rec = {"kind": "wiggle", "support": [lo, hi], "count": int(count),
           "amplitude_safety": amplitude_safety, "margin": margin}
    m = IntervalMap(node, rec, support=[(lo, hi)])
    m.validate(check_range=False, domain=(lo, hi))
    m.params = {"a": a, "k": k, "c": c, "plateau": (plo, phi)}
    return m


def flatten_at(f: IntervalMap, x: float, window, inner: float = 0.5,
               tol: float = 1e-2) -> IntervalMap:
    """Correction ``g`` with ``g o f = id`` near ``x``.

    ``g(y) = y + w(y) (f^{-1}(y) - y)`` where ``w`` is a C^4 plateau that is 1
    on the inner ``inner`` share of ``window`` and vanishes outside it.
    """
    lo, hi = map(float, window)
    if not lo < x < hi:
        raise MapError("window must contain x")
    fx = float(f(x))
    if abs(fx - x) > tol:
        raise MapError(f"f(x) - x = {fx - x:.3e} exceeds tolerance")
    half = min(x - lo, hi - x)
    r0 = inner * half
    w = Plateau(x - r0, x + r0, half - r0)
    # f^{-1} solved on a bracket slightly wider than the window
    pad = 2.0 * half
    inv = Inverse(f.node, max(0.0, lo - pad), min(1.0, hi + pad))
    node = Sum([Poly([0.0, 1.0]), Prod(w, Sum([inv, Poly([0.0, -1.0])]))])
    rec = {"kind": "flatten", "base": f.record, "x": float(x), "window": [lo, hi], "inner": inner}
    g = IntervalMap(node, rec, support=[w.support])
    g.validate(check_range=False, domain=w.support)
    # points whose image lies on the plateau
    a, b = f.inverse(np.array([x - r0, x + r0]), inv.lo, inv.hi)
    g.inner_window = (max(x - r0, float(a)), min(x + r0, float(b)))
    return g


def realize_germ_locally(target: Jet, x: float, support, plateau: float = 0.3) -> IntervalMap:
    """Map ``h`` with ``h(x) = x``, jet ``target`` at ``x`` and support in ``support``.

    ``h(y) = y + w(y) P(y - x)`` with ``P`` the target minus the identity and
    ``w`` a plateau around ``x``.
    """
    lo, hi = map(float, support)
    if not lo < x < hi:
        raise MapError("support must contain x")
    reach = min(x - lo, hi - x)
    r0 = plateau * reach
    w = Plateau(x - r0, x + r0, reach - r0)
    c = [float(v) for v in target.coeffs]
    dev = [0.0, c[0] - 1.0] + c[1:]
    # expand sum dev_k (y - x)^k in powers of y
    shifted = np.zeros(len(dev))
    for k, a in enumerate(dev):
        if a:
            shifted[: k + 1] += a * P.polypow([-x, 1.0], k)
    node = Sum([Poly([0.0, 1.0]), Prod(w, Poly(shifted))])
    rec = {"kind": "germ", "target": c, "x": float(x), "support": [lo, hi], "plateau": plateau}
    h = IntervalMap(node, rec, support=[w.support])
    try:
        h.validate(check_range=False, domain=(lo, hi))
    except MapError as exc:
        raise MapError(f"target too far from identity for this support: {exc}") from None
    return h


def from_record(rec: dict) -> IntervalMap:
    """Rebuild a map from its serialized record."""
    kind = rec["kind"]
    if kind == "identity":
        return identity()
    if kind == "polynomial":
        return polynomial(rec["coeffs"])
    if kind == "affine":
        return affine(rec["slope"], rec["intercept"])
    if kind == "poly_bump":
        return poly_bump(rec["coeffs"], rec["bumps"])
    if kind == "mobius":
        return mobius(*rec["params"])
    if kind == "compose":
        return compose_maps(*(from_record(r) for r in rec["maps"]))
    if kind == "local_diffeo":
        return make_local_diffeo(rec["constraints"], rec["support"], rec.get("plateau"))
    if kind == "wiggle":
        return make_wiggle(rec["support"], rec["count"], rec["amplitude_safety"], rec["margin"])
    if kind == "flatten":
        return flatten_at(from_record(rec["base"]), rec["x"], rec["window"], rec["inner"])
    if kind == "germ":
        return realize_germ_locally(Jet(tuple(rec["target"])), rec["x"], rec["support"], rec["plateau"])
    if kind == "word":
        from .semigroup import Semigroup
        return Semigroup.from_record(rec["semigroup"]).word_map(rec["word"])
    raise MapError(f"unknown map kind {kind!r}")
