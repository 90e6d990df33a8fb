"""Location and classification of fixed points of increasing maps.

The difference ``d(x) = f(x) - x`` is sampled on a grid, the grid is refined
where ``|d|`` is small compared with its local variation, sign changes are
bracketed and every bracket is polished by bisection followed by Newton.
Roots whose multiplier is within ``neutral_tol`` of 1 are flagged rather than
classified; stretches where ``d`` vanishes identically and touching zeros
without a sign change are reported as neutral with a warning.
"""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np

NEUTRAL_TOL = 1e-8
DEFAULT_RESOLUTION = 2 ** 14
DEFAULT_TOL = 1e-12

ATTRACTING = "attracting"
REPELLING = "repelling"
NEUTRAL = "neutral-flagged"


class FixedPointWarning(UserWarning):
    """Degenerate fixed points (identity stretches, tangencies) were found."""


@dataclass
class FixReport:
    points: list  # (location, multiplier, class)
    resolution: int
    tolerance: float
    interval: tuple = (0.0, 1.0)
    warnings: list = field(default_factory=list)
    identity_intervals: list = field(default_factory=list)

    @property
    def locations(self):
        return [p[0] for p in self.points]

    def of_class(self, cls: str):
        return [p for p in self.points if p[2] == cls]

    @property
    def attracting(self):
        return self.of_class(ATTRACTING)

    @property
    def n_attracting(self) -> int:
        return len(self.attracting)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "multiplier", "class"])
        for x, m, c in self.points:
            w.writerow([repr(float(x)), repr(float(m)), c])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "points": [{"x": float(x), "multiplier": float(m), "class": c} for x, m, c in self.points],
            "resolution": self.resolution,
            "tolerance": self.tolerance,
            "interval": list(self.interval),
            "warnings": list(self.warnings),
            "identity_intervals": [list(iv) for iv in self.identity_intervals],
        }


def classify(multiplier: float, neutral_tol: float = NEUTRAL_TOL) -> str:
    if multiplier < 1.0 - neutral_tol:
        return ATTRACTING
    if multiplier > 1.0 + neutral_tol:
        return REPELLING
    return NEUTRAL


def _polish(f, lo: float, hi: float, dlo: float, tol: float) -> float:
    """Bisection until the bracket is below ``64 tol``, then guarded Newton."""
    a, b = lo, hi
    sa = np.sign(dlo)
    while b - a > 64 * tol:
        m = 0.5 * (a + b)
        dm = float(f(m)) - m
        if dm == 0.0:
            return m
        if np.sign(dm) == sa:
            a = m
        else:
            b = m
    x = 0.5 * (a + b)
    for _ in range(8):
        t = f.taylor(x, 1)
        g, dg = float(t[0]) - x, float(t[1]) - 1.0
        if g == 0.0 or dg == 0.0:
            break
        xn = x - g / dg
        # the sampled sign can be off by rounding at a bracket end, so allow a
        # bracket width of slack
        if not a - (b - a) <= xn <= b + (b - a):
            break
        if abs(xn - x) <= tol:
            x = xn
            break
        x = xn
    return x


def count_fixed_points(f, resolution: int = DEFAULT_RESOLUTION, tolerance: float = DEFAULT_TOL,
                       interval=(0.0, 1.0), neutral_tol: float = NEUTRAL_TOL,
                       refine: int = 16, tangency_tol: float = 1e-13) -> FixReport:
    """Fixed points of ``f`` on ``interval``.

    Parameters
    ----------
    f : IntervalMap or any object with vectorized ``__call__`` and ``taylor``.
    resolution : int
        Number of base grid cells.
    tolerance : float
        Root polishing tolerance.
    refine : int
        Subdivision factor used in cells where ``|f(x) - x|`` is small.

    Returns
    -------
    FixReport
    """
    lo, hi = map(float, interval)
    x = np.linspace(lo, hi, resolution + 1)
    d = np.asarray(f(x)) - x

    # refine cells where two roots could hide between same-sign samples
    h = (hi - lo) / resolution
    lip = float(np.max(np.abs(np.diff(d)))) / h if resolution > 0 else 0.0
    small = np.minimum(np.abs(d[:-1]), np.abs(d[1:])) <= 2.0 * lip * h
    same = np.sign(d[:-1]) == np.sign(d[1:])
    cells = np.nonzero(small & same & (d[:-1] != 0.0))[0]
    if cells.size:
        sub = (x[cells, None] + (h / refine) * np.arange(1, refine)[None, :]).ravel()
        x = np.concatenate([x, sub])
        d = np.concatenate([d, np.asarray(f(sub)) - sub])
        order = np.argsort(x, kind="stable")
        x, d = x[order], d[order]

    warn = []
    ident = []
    roots = []
    zero = d == 0.0
    # runs of exact zeros
    i = 0
    n = len(x)
    while i < n:
        if zero[i]:
            j = i
            while j + 1 < n and zero[j + 1]:
                j += 1
            if j > i:
                ident.append((float(x[i]), float(x[j])))
                warn.append(f"f is the identity on [{x[i]:.6g}, {x[j]:.6g}]")
                roots.append((0.5 * (x[i] + x[j]), None, True))
            else:
                roots.append((float(x[i]), None, False))
            i = j + 1
        else:
            i += 1
    s = np.sign(d)
    idx = np.nonzero((s[:-1] * s[1:]) < 0)[0]
    for k in idx:
        roots.append((_polish(f, float(x[k]), float(x[k + 1]), float(d[k]), tolerance), None, False))

    # touching zeros: local minima of |d| below tangency_tol without sign change
    ad = np.abs(d)
    if n >= 3:
        interior = np.nonzero((ad[1:-1] <= ad[:-2]) & (ad[1:-1] <= ad[2:]) & (ad[1:-1] < tangency_tol)
                              & (ad[1:-1] > 0) & (s[:-2] == s[2:]))[0] + 1
        for k in interior:
            roots.append((float(x[k]), "tangency", False))
        if interior.size:
            warn.append(f"{interior.size} possible tangencies (|f(x) - x| < {tangency_tol:g} "
                        f"without sign change), first near {x[interior[0]]:.12g}")

    roots.sort(key=lambda r: r[0])
    points = []
    for loc, tag, is_run in roots:
        if points and abs(loc - points[-1][0]) <= max(tolerance, 1e-15):
            continue
        if is_run or tag == "tangency":
            mult = float(f.taylor(loc, 1)[1])
            points.append((float(loc), mult, NEUTRAL))
            continue
        mult = float(f.taylor(loc, 1)[1])
        points.append((float(loc), mult, classify(mult, neutral_tol)))
    if any(p[2] == NEUTRAL for p in points) and not warn:
        warn.append("near-neutral multipliers flagged")
    for msg in warn:
        warnings.warn(msg, FixedPointWarning, stacklevel=2)
    return FixReport(points=points, resolution=resolution, tolerance=tolerance,
                     interval=(lo, hi), warnings=warn, identity_intervals=ident)


def brute_force_roots(f, n: int = 10 ** 6, interval=(0.0, 1.0)) -> np.ndarray:
    """Sign-change scan of ``f(x) - x`` on ``n`` points, roots by linear interpolation."""
    lo, hi = interval
    x = np.linspace(lo, hi, n)
    d = np.asarray(f(x)) - x
    out = list(x[d == 0.0])
    k = np.nonzero(d[:-1] * d[1:] < 0)[0]
    out.extend(x[k] - d[k] * (x[k + 1] - x[k]) / (d[k + 1] - d[k]))
    return np.sort(np.asarray(out, dtype=float))
