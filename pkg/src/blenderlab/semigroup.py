"""Words, orbits and blender experiments for finitely generated semigroups.

A :class:`Word` is stored in written order: ``Word("21")`` is ``f_2 o f_1``,
so the rightmost letter acts first. Runs of polynomial letters are evaluated
by the compiled word kernel.

Targeting uses backward addresses: starting from the target, inverse
branches that keep the preimage inside ``J`` are chosen one letter at a time.
Applying the letters forward from any point of ``J`` lands within
``c**K |J|`` of the target, ``c`` being the contraction bound.
"""
from __future__ import annotations

import itertools
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .fixpoints import DEFAULT_RESOLUTION, NEUTRAL_TOL, brute_force_roots, classify, count_fixed_points
from .jets import Jet, compose, frac_iterate, invert, is_flat
from .maps import (IntervalMap, MapError, WordNode, compose_maps, from_record, make_local_diffeo,
                   realize_germ_locally)


class WordError(ValueError):
    """Invalid letters or an exhausted search budget."""


@dataclass(frozen=True)
class Word:
    letters: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(s) for s in self.letters))

    @classmethod
    def parse(cls, text) -> "Word":
        if isinstance(text, Word):
            return text
        if isinstance(text, str):
            return cls(tuple(int(c) for c in text.strip()))
        return cls(tuple(text))

    def __str__(self):
        if all(0 <= s <= 9 for s in self.letters):
            return "".join(str(s) for s in self.letters)
        return ".".join(str(s) for s in self.letters)

    def __len__(self):
        return len(self.letters)

    def __add__(self, other: "Word") -> "Word":
        """Concatenation ``self . other``: ``other`` acts first."""
        return Word(self.letters + Word.parse(other).letters)

    @property
    def application_order(self) -> tuple:
        return self.letters[::-1]

    def count(self, letter: int) -> int:
        return self.letters.count(letter)


class Semigroup:
    """Generators indexed by ``0..k-1``."""

    def __init__(self, generators: Sequence[IntervalMap], name: str = "", params: dict | None = None):
        self.generators = list(generators)
        self.name = name
        self.params = params or {}

    def __len__(self):
        return len(self.generators)

    @property
    def alphabet(self):
        return list(range(len(self.generators)))

    def __getitem__(self, s: int) -> IntervalMap:
        return self.generators[s]

    def to_record(self) -> dict:
        return {"name": self.name, "params": self.params,
                "generators": [g.record for g in self.generators]}

    @classmethod
    def from_record(cls, rec: dict) -> "Semigroup":
        return cls([from_record(r) for r in rec["generators"]], rec.get("name", ""), rec.get("params"))

    def validate(self) -> list:
        return [g.validate() for g in self.generators]

    def _poly_table(self, base: bool = False):
        polys = [g.poly if g.poly is not None or not base else getattr(g, "base_poly", None)
                 for g in self.generators]
        deg = max((len(p) for p in polys if p is not None), default=1)
        table = np.zeros((len(polys), max(deg, 2)))
        degrees = np.zeros(len(polys), dtype=np.int64)
        is_poly = np.zeros(len(polys), dtype=bool)
        for i, p in enumerate(polys):
            if p is not None:
                table[i, : len(p)] = p
                degrees[i] = len(p) - 1
                is_poly[i] = True
        return table, degrees, is_poly

    def _check(self, word: Word):
        bad = [s for s in word.letters if not 0 <= s < len(self.generators)]
        if bad:
            raise WordError(f"invalid letters {bad}")

    def word_map(self, word) -> IntervalMap:
        w = Word.parse(word)
        self._check(w)
        node = WordNode([g.node for g in self.generators], w.application_order, self._poly_table(),
                        self._patches())
        rec = {"kind": "word", "semigroup": self.to_record(), "word": str(w)}
        m = IntervalMap(node, rec)
        if all(g.poly is not None for g in self.generators):
            # composition multiplies degrees
            m.degree = int(np.prod([len(np.trim_zeros(self.generators[s].poly, "b")) - 1
                                    for s in w.letters]))
        return m

    def _patches(self):
        """Patched-kernel data when every generator is a polynomial, possibly perturbed."""
        gens = self.generators
        if all(g.poly is not None for g in gens):
            return None
        if not all(g.poly is not None or getattr(g, "base_poly", None) is not None for g in gens):
            return None
        patched = np.array([g.poly is None for g in gens], dtype=np.int64)
        ivs = [iv for g in gens if g.poly is None for iv in g.patch.support]
        if not ivs:
            return None
        lo = np.array([a for a, _ in ivs], dtype=float)
        hi = np.array([b for _, b in ivs], dtype=float)
        nodes = {i: g.patch.node for i, g in enumerate(gens) if g.poly is None}
        table, degrees, _ = self._poly_table(base=True)
        return patched, lo, hi, nodes, table, degrees

    def apply(self, word, x):
        w = Word.parse(word)
        self._check(w)
        x = np.asarray(x, dtype=float)
        table, degrees, is_poly = self._poly_table()
        if is_poly.all():
            y, _ = kernels.word_orbit(table, degrees, np.asarray(w.application_order, dtype=np.int64),
                                      np.atleast_1d(x))
            return float(y[0]) if x.ndim == 0 else y.reshape(x.shape)
        return self.word_map(w)(x)

    def apply_jet(self, word, x: float, r: int = 3) -> Jet:
        return self.word_map(word).jet(x, r)

    def perturbed(self, h: IntervalMap) -> "Semigroup":
        """``rho_h = (h o f_0, f_1, ...)``."""
        gens = list(self.generators)
        gens[0] = compose_maps(h, gens[0])
        return Semigroup(gens, self.name + "+h", self.params)


def apply_word(rho: Semigroup, word, x):
    """``rho^omega(x)``; the empty word is the identity."""
    return rho.apply(word, x)


def apply_word_jet(rho: Semigroup, word, x: float, r: int = 3) -> Jet:
    return rho.apply_jet(word, x, r)


# ---------------------------------------------------------------- blender


@dataclass
class BlenderCertificate:
    J: tuple
    mode: str
    certified: bool
    witness: dict = field(default_factory=dict)
    reason: str = ""

    def to_dict(self) -> dict:
        return {"J": list(self.J), "mode": self.mode, "certified": self.certified,
                "witness": self.witness, "reason": self.reason}


def _grid_sup(f: IntervalMap, a: float, b: float, n: int = 4097) -> float:
    return float(np.max(np.abs(f.deriv(np.linspace(a, b, n)))))


def check_blender_criterion(f1: IntervalMap, f2: IntervalMap, a: float, b: float, J=None,
                            tol: float = 1e-12, grid: int = 4097) -> BlenderCertificate:
    """Contraction-overlap criterion on ``[a, b]``.

    Certified iff ``sup f1' < 1`` and ``sup f2' < 1`` on ``[a, b]``,
    ``f1(a) = a`` and ``f2(b) = b`` within ``tol``, and ``f1(b) > f2(a)``.
    The blender then lives on any closed ``J`` inside ``(a, b)``.
    """
    J = tuple(J) if J is not None else (a, b)
    s1, s2 = _grid_sup(f1, a, b, grid), _grid_sup(f2, a, b, grid)
    overlap = float(f1(b)) - float(f2(a))
    w = {"a": a, "b": b, "sup_f1_prime": s1, "sup_f2_prime": s2,
         "f1_a_minus_a": float(f1(a)) - a, "f2_b_minus_b": float(f2(b)) - b,
         "f1_b": float(f1(b)), "f2_a": float(f2(a)), "overlap_margin": overlap,
         "contraction_margin": 1.0 - max(s1, s2)}
    failures = []
    if not s1 < 1.0:
        failures.append("sup f1' < 1")
    if not s2 < 1.0:
        failures.append("sup f2' < 1")
    if abs(w["f1_a_minus_a"]) >= tol:
        failures.append("f1(a) = a")
    if abs(w["f2_b_minus_b"]) >= tol:
        failures.append("f2(b) = b")
    if not overlap > 0.0:
        failures.append("f1(b) > f2(a)")
    if not (a < J[0] <= J[1] < b) and J != (a, b):
        failures.append("J inside (a, b)")
    return BlenderCertificate(J, "criterion", not failures, w,
                              "" if not failures else "violated: " + ", ".join(failures))


def _contraction(maps_, J) -> float:
    return max(_grid_sup(f, J[0], J[1]) for f in maps_)


def backward_address(maps_: Sequence[IntervalMap], letters: Sequence[int], target, J, K: int,
                     prefer=None):
    """Backward inverse branches from ``target`` staying in ``J``.

    Vectorized over ``target``. At each step the admissible preimage closest
    to ``prefer`` (default: the midpoint of ``J``) is kept. Returns
    ``(codes, preimage, ok)`` where ``codes[:, k]`` is the index into ``letters``
    chosen at backward step ``k`` (so ``codes`` is already in written order).
    """
    y = np.atleast_1d(np.asarray(target, dtype=float)).copy()
    pref = np.broadcast_to(np.asarray(0.5 * (J[0] + J[1]) if prefer is None else prefer, dtype=float),
                           y.shape)
    codes = np.zeros((y.size, K), dtype=np.int64)
    ok = np.ones(y.size, dtype=bool)
    for k in range(K):
        cands = []
        for f in maps_:
            lo, hi = float(f(0.0)), float(f(1.0))
            pre = f.inverse(np.clip(y, lo, hi))
            valid = (y >= lo) & (y <= hi) & (pre >= J[0]) & (pre <= J[1])
            cands.append(np.where(valid, pre, np.nan))
        cands = np.array(cands)
        dist = np.abs(cands - pref[None, :])
        dist = np.where(np.isnan(dist), np.inf, dist)
        best = np.argmin(dist, axis=0)
        stuck = ~np.isfinite(dist[best, np.arange(y.size)])
        ok &= ~stuck
        codes[:, k] = best
        y = np.where(stuck, y, cands[best, np.arange(y.size)])
    return codes, y, ok


def _apply_codes(maps_, codes_row, x):
    """Apply ``maps_[codes_row[K-1]]`` first, ..., ``maps_[codes_row[0]]`` last."""
    y = np.asarray(x, dtype=float)
    for c in codes_row[::-1]:
        y = maps_[c](y)
    return y


def _apply_codes_fast(maps_, codes_row, x):
    polys = [m.poly for m in maps_]
    if any(p is None for p in polys):
        return _apply_codes(maps_, codes_row, x)
    deg = max(len(p) for p in polys)
    table = np.zeros((len(polys), max(deg, 2)))
    for i, p in enumerate(polys):
        table[i, : len(p)] = p
    degrees = np.array([len(p) - 1 for p in polys], dtype=np.int64)
    y, _ = kernels.word_orbit(table, degrees, np.asarray(codes_row[::-1], dtype=np.int64),
                              np.atleast_1d(np.asarray(x, dtype=float)))
    return y


def empirical_blender_density(maps_: Sequence[IntervalMap], J, eps: float, letters=None,
                              max_length: int = 5000) -> dict:
    """Check that forward orbits from an ``eps/2``-grid of ``J`` reach every grid target within ``eps``.

    One backward-address word per target is verified against every start.
    """
    letters = list(letters) if letters is not None else list(range(1, len(maps_) + 1))
    a, b = map(float, J)
    grid = np.arange(a, b + 1e-15, eps / 2.0)
    c = _contraction(maps_, J)
    if c < 1.0:
        K = max(1, math.ceil(math.log(eps / (2.0 * (b - a))) / math.log(c)))
    else:
        K = max_length
    K = min(K, max_length)
    codes, _, ok = backward_address(maps_, letters, grid, (a, b), K)
    worst, worst_pair, lengths = 0.0, None, []
    for j, target in enumerate(grid):
        if ok[j]:
            img = _apply_codes_fast(maps_, codes[j], grid)
        else:
            # no admissible backward address: fall back to plain iteration
            img = grid.copy()
            for _ in range(K):
                img = maps_[0](img)
        dist = np.abs(img - target)
        dist[np.isclose(grid, target, rtol=0, atol=1e-15)] = 0.0  # empty word
        k = int(np.argmax(dist))
        lengths.append(K)
        if dist[k] > worst:
            worst, worst_pair = float(dist[k]), (float(grid[k]), float(target))
    return {"J": [a, b], "eps": eps, "n_points": int(grid.size), "pairs": int(grid.size) ** 2,
            "word_length": K, "max_word_length": max(lengths) if lengths else 0,
            "contraction": c, "max_distance": worst, "worst_pair": worst_pair,
            "all_addresses_found": bool(ok.all()), "success": bool(worst < eps)}


def _blender_maps(rho: Semigroup, blender_letters):
    return [rho[s] for s in blender_letters]


def find_connecting_word(rho: Semigroup, p: float, p_target: float, eps: float, min_length: int = 0,
                         J=None, blender_letters=(1, 2), use_zero: bool = True):
    """Word ``omega`` with ``|rho^omega(p) - p'| < eps`` and ``|omega| >= min_length``.

    With ``use_zero`` the word is ``eta 0``: ``f_0`` acts once, then a
    backward-address word ``eta`` over the blender letters steers ``f_0(p)``
    to ``p'``.
    """
    if abs(p - p_target) < eps and min_length == 0:
        return Word(), abs(p - p_target)
    J = J or _default_J(rho)
    maps_ = _blender_maps(rho, blender_letters)
    start = float(rho[0](p)) if use_zero else float(p)
    c = _contraction(maps_, J)
    K = max(1, math.ceil(math.log(eps / (2.0 * (J[1] - J[0]))) / math.log(c)))
    K = max(K, min_length - (1 if use_zero else 0))
    codes, _, ok = backward_address(maps_, blender_letters, [p_target], J, K, prefer=start)
    if not ok[0]:
        raise WordError("no admissible backward address")
    eta = [blender_letters[c_] for c_ in codes[0]]
    w = Word(tuple(eta) + ((0,) if use_zero else ()))
    err = abs(float(rho.apply(w, p)) - p_target)
    if err >= eps:
        raise WordError(f"targeting error {err:.3e} exceeds eps")
    return w, err


def _default_J(rho: Semigroup):
    if "J" in rho.params:
        return tuple(rho.params["J"])
    return (0.0, 1.0)


def meet_in_middle(maps_, letters, start: float, target: float, J, n_forward: int = 16,
                   n_greedy: int | None = 0, n_enum: int = 8, max_greedy: int = 400):
    """Word ``w`` over ``letters`` with ``w(start)`` very close to ``target``.

    Forward images of ``start`` under all words of length ``n_forward`` are
    matched against backward preimages of ``target`` (``n_greedy`` greedy
    steps then all ``len(letters)**n_enum`` continuations inside ``J``).
    ``n_greedy=None`` takes greedy steps until the preimage falls inside the
    range of the forward images, at most ``max_greedy``.
    Returns ``(word, value_at_start, preimage)`` where ``preimage`` is the
    exact preimage of ``target`` under the backward part composed with the
    inverse of the forward part.
    """
    k = len(maps_)
    # forward enumeration; codes grow with the letter applied last as the lowest digit
    vals = np.array([float(start)])
    codes = np.array([0], dtype=np.int64)
    for _ in range(n_forward):
        vals = np.concatenate([m(vals) for m in maps_])
        codes = np.concatenate([codes * k + i for i in range(k)])
    order = np.argsort(vals)
    vals, codes = vals[order], codes[order]
    # backward part; with n_greedy=None, step back until the preimage lies among the forward images
    if n_greedy is None:
        for K in range(max_greedy + 1):
            greedy_codes, y, ok = backward_address(maps_, letters, [target], J, K, prefer=start)
            if not ok[0] or vals[0] < y[0] < vals[-1]:
                break
    else:
        greedy_codes, y, ok = backward_address(maps_, letters, [target], J, n_greedy, prefer=start)
    if not ok[0]:
        raise WordError("no admissible backward address")
    pts = y.copy()
    paths = np.zeros((1, 0), dtype=np.int64)
    for _ in range(n_enum):
        new_pts, new_paths = [], []
        for i, m in enumerate(maps_):
            lo, hi = float(m(0.0)), float(m(1.0))
            inside = (pts >= lo) & (pts <= hi)
            pre = m.inverse(np.clip(pts, lo, hi))
            keep = inside & (pre >= J[0]) & (pre <= J[1])
            new_pts.append(pre[keep])
            new_paths.append(np.hstack([paths[keep], np.full((keep.sum(), 1), i)]))
        pts = np.concatenate(new_pts)
        paths = np.vstack(new_paths)
        if pts.size == 0:
            raise WordError("backward enumeration left J")
    # nearest forward image for every backward point
    pos = np.clip(np.searchsorted(vals, pts), 1, len(vals) - 1)
    left, right = vals[pos - 1], vals[pos]
    pick = np.where(np.abs(pts - left) <= np.abs(pts - right), pos - 1, pos)
    gap = np.abs(pts - vals[pick])
    # the backward part contracts the gap; weight by its derivative
    scale = np.array([np.prod([maps_[c].deriv(0.5) for c in row]) for row in paths]) if paths.shape[1] else 1.0
    best = int(np.argmin(gap * scale))
    code = int(codes[pick[best]])
    fwd = []
    for _ in range(n_forward):
        fwd.append(code % k)
        code //= k
    # fwd lists letters from last applied to first applied, i.e. written order
    written = [letters[c] for c in greedy_codes[0]] + [letters[c] for c in paths[best]] + [letters[c] for c in fwd]
    return Word(tuple(written)), float(vals[pick[best]]), float(pts[best]), len(fwd)


def connect_exact(rho: Semigroup, p: float, p_target: float, U, J=None, blender_letters=(1, 2),
                  min_length: int = 0):
    """Word ``omega`` and correction ``h`` supported in ``U`` with ``rho_h^omega(p) = p'``.

    ``omega = w2 0 w1``: ``w1`` steers ``p`` so that ``u = f_0(w1(p))`` lies in the
    middle of ``U``; ``w2`` is found by :func:`meet_in_middle` so that
    ``v = w2^{-1}(p')`` is within a tiny distance of ``u``; ``h`` maps ``u`` to ``v``.
    """
    J = J or _default_J(rho)
    lo, hi = map(float, U)
    maps_ = _blender_maps(rho, blender_letters)
    f0 = rho[0]
    center = 0.5 * (lo + hi)
    u = float(f0(p))
    w1 = Word()
    if not (lo + 0.25 * (hi - lo) <= u <= hi - 0.25 * (hi - lo)):
        c = _contraction(maps_, J)
        K = max(1, math.ceil(math.log((hi - lo) / (8.0 * (J[1] - J[0]))) / math.log(c)))
        target = f0.inverse(center)
        codes, _, ok = backward_address(maps_, blender_letters, [target], J, K, prefer=p)
        if not ok[0]:
            raise WordError("cannot steer into U")
        w1 = Word(tuple(blender_letters[c_] for c_ in codes[0]))
        u = float(f0(rho.apply(w1, p)))
    if not lo < u < hi:
        raise WordError("steering into U failed")
    n_greedy = max(0, min_length - len(w1) - 1 - 24)
    w2, _, _, _ = meet_in_middle(maps_, blender_letters, u, p_target, J, n_forward=16,
                                 n_greedy=n_greedy, n_enum=8)
    v = _invert_word(rho, w2, p_target, J)
    h = make_local_diffeo([(u, v, 1.0)], (lo, hi))
    omega = w2 + Word((0,)) + w1
    rho_h = rho.perturbed(h)
    resid = abs(float(rho_h.apply(omega, p)) - p_target)
    return omega, h, {"u": u, "v": v, "residual": resid, "sigma": [v]}


def connect_with_germ(rho: Semigroup, p: float, p_target: float, target: Jet, U, V, anchor, r0: int = 1,
                      J=None, blender_letters=(1, 2), max_step: float = 0.25):
    """Word ``omega`` and corrections with ``rho_h^omega(p) = p'`` and prescribed ``r0``-jet at ``p``.

    ``omega = omega2 (0 gamma)^N omega1``: ``omega1`` connects ``p`` exactly to the
    anchor point ``p_hat`` (correction in ``U``), ``omega2`` connects ``p_hat`` to
    ``p'`` (correction in ``V``). With ``F1``, ``F2`` the jets of the two
    connections, the mismatch ``phi = F2^{-1} o target o F1^{-1}`` is split into
    ``N`` equal flow steps ``phi^{1/N}``, realized by a correction at ``p_hat``
    that acts once per pass of the ``r0``-flat anchor loop.

    Parameters
    ----------
    anchor : FlatPointCertificate
        Supplies ``p_hat``, the loop word ``0 gamma``, its corrections and germ.
    max_step : float
        ``N`` is the smallest count whose step jet deviates from the identity by
        at most this much.

    Returns
    -------
    (Word, list of IntervalMap, dict)
        The word, the corrections (outermost first, to be composed into
        generator 0 on top of the anchor's) and residuals.
    """
    J = J or _default_J(rho)
    if r0 < 1:
        raise WordError("r0 must be >= 1")
    if not is_flat(anchor.germ.truncate(max(r0, 1)), r0, tol=1e-8):
        raise WordError(f"anchor is not {r0}-flat")
    p_hat = float(anchor.p_hat)
    sa = tuple(anchor.details["support"])
    ivs = [tuple(map(float, U)), tuple(map(float, V)), sa]
    for i in range(3):
        for j in range(i + 1, 3):
            if ivs[i][0] < ivs[j][1] and ivs[j][0] < ivs[i][1]:
                raise WordError("U, V and the anchor support must be pairwise disjoint")
    if any(lo <= v <= hi for v in anchor.support_set for lo, hi in ivs[:2]):
        raise WordError("the anchor orbit meets U or V")
    rho_a = anchor.perturbed()
    omega1, h1, info1 = connect_exact(rho_a, p, p_hat, U, J, blender_letters)
    rho1 = rho_a.perturbed(h1)
    omega2, h2, info2 = connect_exact(rho1, p_hat, p_target, V, J, blender_letters)
    rho2 = rho1.perturbed(h2)
    F1 = rho2.word_map(omega1).jet(p, r0)
    F2 = rho2.word_map(omega2).jet(p_hat, r0)
    tgt = target.truncate(r0).to_float()
    phi = compose(invert(F2), compose(tgt, invert(F1)))
    loop = anchor.word
    for N in range(1, 10 ** 4):
        step = frac_iterate(phi, 1.0 / N)
        if step.distance_from_identity() <= max_step:
            break
    else:
        raise WordError("mismatch germ too far from the identity")
    half = 0.5 * min(p_hat - sa[0], sa[1] - p_hat)
    try:
        k = realize_germ_locally(step, p_hat, (p_hat - half, p_hat + half))
    except MapError as exc:
        raise WordError(f"realization violates monotonicity: {exc}") from None
    rho3 = rho2.perturbed(k)
    omega = omega2 + Word(loop.letters * N) + omega1
    t = rho3.word_map(omega).taylor(p, r0)
    got = Jet(tuple(float(v) for v in t[1:]))
    info = {"N": N, "p_hat": p_hat, "value_residual": abs(float(t[0]) - p_target),
            "jet_residual": max(abs(float(a) - float(b)) for a, b in zip(got.coeffs, tgt.coeffs)),
            "jet": [float(c) for c in got.coeffs], "step": [float(c) for c in step.coeffs],
            "omega1_length": len(omega1), "omega2_length": len(omega2), "connections": [info1, info2]}
    return omega, [k, h2, h1], info


def _invert_word(rho: Semigroup, word: Word, y: float, J) -> float:
    for s in word.letters:  # leftmost letter acts last, so it is inverted first
        y = float(rho[s].inverse(y))
    return y


# ---------------------------------------------------------------- census


@dataclass
class GrowthReport:
    rows: list  # (word, length, fix_count, fix_a_count, degree_bound)
    totals: dict  # n -> sum of fix_a counts
    wall_time: dict
    params: dict
    partial: bool = False

    def to_csv(self) -> str:
        out = ["word,length,fix_count,fix_a_count"]
        out += [f"{w},{n},{fc},{fa}" for w, n, fc, fa, _ in self.rows]
        return "\n".join(out) + "\n"

    def to_dict(self) -> dict:
        return {"totals": {str(k): v for k, v in self.totals.items()}, "params": self.params,
                "partial": self.partial,
                "rows": [{"word": w, "length": n, "fix_count": fc, "fix_a_count": fa, "degree_bound": d}
                         for w, n, fc, fa, d in self.rows]}


def _census_word(args):
    rec, word, resolution = args
    rho = Semigroup.from_record(rec) if isinstance(rec, dict) else rec
    m = rho.word_map(word)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = count_fixed_points(m, resolution=resolution)
    bound = None
    if hasattr(m, "degree"):
        bound = max(1, m.degree)
    return str(Word.parse(word)), len(Word.parse(word)), len(rep.points), rep.n_attracting, bound


def growth_census(rho: Semigroup, n_max: int, resolution: int = DEFAULT_RESOLUTION, workers: int = 1,
                  max_words: int = 10 ** 6) -> GrowthReport:
    """``sum_{|w| = n} #Fix_a(rho^w)`` for ``n = 1..n_max``; the empty word is excluded."""
    words = []
    for n in range(1, n_max + 1):
        words.extend("".join(map(str, t)) for t in itertools.product(rho.alphabet, repeat=n))
    partial = len(words) > max_words
    words = words[:max_words]
    t0 = time.perf_counter()
    jobs = [(rho, w, resolution) for w in words]
    if workers > 1:
        rec = rho.to_record()
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_census_word, [(rec, w, resolution) for w in words], chunksize=8))
    else:
        rows = [_census_word(j) for j in jobs]
    totals = {}
    for w, n, _, fa, _ in rows:
        totals[n] = totals.get(n, 0) + fa
    return GrowthReport(rows, totals, {"total_seconds": time.perf_counter() - t0},
                        {"n_max": n_max, "resolution": resolution, "workers": workers}, partial)


def brute_force_fix_a(m, n: int = 10 ** 6, neutral_tol: float = NEUTRAL_TOL) -> int:
    """Attracting fixed points of ``m`` from a dense sign scan."""
    roots = brute_force_roots(m, n)
    if roots.size == 0:
        return 0
    mult = np.atleast_1d(m.deriv(roots))
    return int(sum(classify(v, neutral_tol) == "attracting" for v in mult))


# ---------------------------------------------------------------- random words


def random_word_experiment(rho: Semigroup, n: int, trials: int, seed: int, grid: int = 2001,
                           resolution: int = 2 ** 12) -> dict:
    """Sup-derivative growth and final fixed-point counts along i.i.d. uniform words."""
    rng = np.random.default_rng(seed)
    k = len(rho)
    xs = np.linspace(0.0, 1.0, grid)
    sups = [_grid_sup(g, 0.0, 1.0) for g in rho.generators]
    bound = float(np.prod(sups)) ** (1.0 / k)
    out = []
    for _ in range(trials):
        app = rng.integers(0, k, size=n)
        w = Word(tuple(int(s) for s in app[::-1]))
        if n == 0:
            out.append({"word": "", "sup_derivative": 1.0, "root": 1.0, "fix_count": None})
            continue
        m = rho.word_map(w)
        d = np.abs(m.deriv(xs))
        sup = float(d.max())
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fc = len(count_fixed_points(m, resolution=resolution).points)
        out.append({"word": str(w), "sup_derivative": sup, "root": sup ** (1.0 / n), "fix_count": fc})
    return {"n": n, "trials": trials, "seed": seed, "generator_sups": sups, "bound": bound,
            "max_root": max((t["root"] for t in out), default=None), "trials_data": out}


# ---------------------------------------------------------------- genericity


def is_generic_point(maps_: Sequence[IntervalMap], x: float, J, eps: float, budget: int = 200000,
                     max_depth: int = 200, letters=None) -> dict:
    """Breadth-first search of inverse orbits of ``x`` for ``eps``-density in ``J``.

    Returns ``status`` ``"generic"`` when every point of an ``eps``-grid of ``J``
    has a preimage within ``eps``, ``"indeterminate"`` when the budget runs out.
    """
    letters = list(letters) if letters is not None else list(range(1, len(maps_) + 1))
    a, b = map(float, J)
    targets = np.arange(a, b + 1e-15, eps)
    covered = np.zeros(targets.size, dtype=bool)
    witness_pre = np.full(targets.size, np.nan)
    witness_word = [None] * targets.size
    pts = np.array([float(x)])
    words = [()]
    seen = 0
    bucket = eps / 8.0
    for depth in range(max_depth + 1):
        inJ = (pts >= a) & (pts <= b)
        if inJ.any():
            pos = np.clip(np.searchsorted(targets, pts[inJ]), 0, targets.size - 1)
            for cand in (pos - 1, pos):
                cand = np.clip(cand, 0, targets.size - 1)
                close = np.abs(targets[cand] - pts[inJ]) <= eps
                for t_i, pt, wi in zip(cand[close], pts[inJ][close], np.nonzero(inJ)[0][close]):
                    if not covered[t_i]:
                        covered[t_i] = True
                        witness_pre[t_i] = pt
                        witness_word[t_i] = words[wi]
        if covered.all():
            break
        seen += pts.size
        if seen > budget or pts.size == 0:
            break
        new_pts, new_words = [], []
        for i, m in enumerate(maps_):
            lo, hi = float(m(0.0)), float(m(1.0))
            ok = (pts >= lo) & (pts <= hi)
            if not ok.any():
                continue
            pre = m.inverse(pts[ok])
            new_pts.append(pre)
            idx = np.nonzero(ok)[0]
            # preimage word: the new letter acts first, so it goes on the right
            new_words.extend(words[j] + (letters[i],) for j in idx)
        if not new_pts:
            pts = np.array([])
            break
        pts = np.concatenate(new_pts)
        # keep one representative per bucket
        _, keep = np.unique(np.round(pts / bucket), return_index=True)
        keep.sort()
        pts = pts[keep]
        words = [new_words[j] for j in keep]
    status = "generic" if covered.all() else "indeterminate"
    return {"status": status, "generic": status == "generic", "covered": int(covered.sum()),
            "targets": int(targets.size), "depth": depth, "explored": int(seen),
            "witness": [{"target": float(t), "preimage": float(p), "word": "".join(map(str, w))}
                        for t, p, w in zip(targets, witness_pre, witness_word) if w is not None]}


def replay_witness(maps_, letters, witness: dict, x: float) -> float:
    """Apply the witness word to the preimage and return the distance to ``x``."""
    lut = {s: m for s, m in zip(letters, maps_)}
    y = witness["preimage"]
    for s in witness["word"][::-1]:
        y = float(lut[int(s)](y))
    return abs(y - x)


# ---------------------------------------------------------------- membership


def orbit_enters(rho: Semigroup, J, grid: int = 10 ** 4, depth: int = 1000) -> dict:
    """For every grid point of [0, 1], greedily steer an orbit into ``Int J``."""
    a, b = map(float, J)
    mid = 0.5 * (a + b)
    x = np.linspace(0.0, 1.0, grid)
    inside = (x > a) & (x < b)
    steps = np.zeros(grid, dtype=np.int64)
    y = x.copy()
    for k in range(depth):
        if inside.all():
            break
        todo = ~inside
        imgs = np.array([g(y[todo]) for g in rho.generators])
        best = np.argmin(np.abs(imgs - mid), axis=0)
        y[todo] = imgs[best, np.arange(todo.sum())]
        steps[todo] += 1
        inside = (y > a) & (y < b)
    return {"all_enter": bool(inside.all()), "max_steps": int(steps.max()),
            "failures": int((~inside).sum()), "grid": grid, "depth": depth}


def attracting_fixed_point(f: IntervalMap) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = count_fixed_points(f)
    att = rep.attracting
    if len(att) != 1:
        raise WordError(f"expected one attracting fixed point, found {len(att)}")
    return att[0][0]


def membership_report(rho: Semigroup, J, w_sharp_grid: int = 10 ** 4, w_sharp_depth: int = 1000,
                      blender_letters=(1, 2)) -> dict:
    """Flags ``W1``, ``SignI``, ``SignII``, ``W_att`` and ``W_sharp`` with evidence."""
    from .invariants import repeller_attractor_pairs, sign_condition_report

    J = tuple(map(float, J))
    f1, f2 = rho[blender_letters[0]], rho[blender_letters[1]]
    out = {"J": list(J)}
    try:
        a, b = attracting_fixed_point(f1), attracting_fixed_point(f2)
        cert = check_blender_criterion(f1, f2, a, b, J)
        blender = cert.to_dict()
    except WordError as exc:
        cert, blender = None, {"certified": False, "reason": str(exc)}
    try:
        pairs = [pr for pr in repeller_attractor_pairs(rho[0])
                 if J[0] < min(pr.p, pr.q) and max(pr.p, pr.q) < J[1]]
    except ValueError as exc:
        pairs = []
        blender["pair_error"] = str(exc)
    w1 = bool(cert is not None and cert.certified and pairs)
    out["W1"] = {"flag": w1, "blender": blender,
                 "pairs_in_J": [pr.to_dict() for pr in pairs]}
    if pairs:
        sc = sign_condition_report(rho[0], J)
        out["SignI"] = {"flag": sc["SignI"]["satisfied"], **sc["SignI"]}
        out["SignII"] = {"flag": sc["SignII"]["satisfied"], **sc["SignII"]}
    else:
        out["SignI"] = {"flag": False, "reason": "no repeller-attractor pair in Int J"}
        out["SignII"] = {"flag": False, "reason": "no repeller-attractor pair in Int J"}
    sups = [_grid_sup(g, 0.0, 1.0, 20001) for g in rho.generators]
    prod = float(np.prod(sups))
    out["W_att"] = {"flag": prod < 1.0, "sups": sups, "product": prod, "margin": 1.0 - prod}
    ent = orbit_enters(rho, J, w_sharp_grid, w_sharp_depth)
    out["W_sharp"] = {"flag": ent["all_enter"], **ent}
    out["all"] = all(out[k]["flag"] for k in ("W1", "SignI", "SignII", "W_att", "W_sharp"))
    return out
