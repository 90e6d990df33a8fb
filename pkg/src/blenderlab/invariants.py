"""Repeller-attractor pairs, Koenigs linearizations and heteroclinic sign invariants.

For a pair ``(p, q)`` with multipliers ``lam_p > 1 > lam_q`` and a point ``z0``
between them, let ``z_m = f^m(z0)`` and ``D_m = (f^m)'(z0)``. With
``P_n = lam_p**-n / D_{-n}`` the truncations::

    A_n = P_n    * sum_{m=-n}^{n-1} A(f)_{z_m} D_m
    S_n = P_n**2 * sum_{m=-n}^{n-1} S(f)_{z_m} D_m**2

converge geometrically to the nonlinearity and Schwarzian of the transition
map ``H = psi o phi^{-1}`` at ``u0 = phi(z0)``. ``u0 A`` and ``u0**2 S`` are
constant along the orbit of ``z0``; the signs are the invariants.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .fixpoints import ATTRACTING, NEUTRAL, REPELLING, count_fixed_points
from .jets import Jet, linearize
from .maps import IntervalMap, MapError, poly_bump

DEAD_BAND = 1e-6
SWITCH_RADIUS = 1e-3


class InvariantError(RuntimeError):
    """Convergence failure or invalid input; ``report`` holds partial data."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


@dataclass
class RepellerAttractorPair:
    p: float
    q: float
    lam_p: float
    lam_q: float
    heteroclinic_interval: tuple

    def to_dict(self) -> dict:
        d = asdict(self)
        d["heteroclinic_interval"] = list(self.heteroclinic_interval)
        return d

    @property
    def side(self) -> int:
        return 1 if self.q > self.p else -1


def repeller_attractor_pairs(f: IntervalMap, resolution: int = 2 ** 14) -> list:
    """Adjacent (repeller, attractor) pairs of ``f``, both orientations."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = count_fixed_points(f, resolution=resolution)
    if any(c == NEUTRAL for _, _, c in rep.points):
        raise ValueError("neutral fixed points present; invariants undefined")
    pts = rep.points
    out = []
    for i, (x, lam, c) in enumerate(pts):
        if c != REPELLING:
            continue
        for j in (i - 1, i + 1):
            if 0 <= j < len(pts) and pts[j][2] == ATTRACTING:
                q, lq = pts[j][0], pts[j][1]
                out.append(RepellerAttractorPair(x, q, lam, lq, (min(x, q), max(x, q))))
    return out


# ---------------------------------------------------------------- orbits


def _orbit(f: IntervalMap, z0: float, n: int, backward: bool, lo: float, hi: float) -> np.ndarray:
    """Rows ``[x, t1, t2, t3]`` along ``f^{+-k}(z0)``, ``k = 0..n``."""
    if f.pb is not None:
        c, b = f.pb
        c = np.ascontiguousarray(c, dtype=float)
        b = np.ascontiguousarray(np.asarray(b, dtype=float).reshape(-1, 3))
        if backward:
            return kernels.backward_orbit(c, b, z0, n, lo, hi)
        return kernels.forward_orbit(c, b, z0, n)
    out = np.empty((n + 1, 4))
    x = float(z0)
    for k in range(n + 1):
        t = f.taylor(x, 3)
        out[k] = (x, t[1], t[2], t[3])
        if k < n:
            x = float(f.inverse(x, lo, hi)) if backward else float(t[0])
    return out


def _poly_eval(jet: Jet, d):
    return sum(float(c) * d ** (k + 1) for k, c in enumerate(jet.coeffs))


class Linearization:
    """Normalized Koenigs coordinate ``phi`` with ``phi(f(x)) = lam phi(x)``.

    Points are iterated towards the fixed point (by ``f`` for attractors, by
    ``f^{-1}`` for repellers) until within ``switch`` of it, where the
    linearizing jet of order 4 finishes the job.
    """

    def __init__(self, f: IntervalMap, point: float, multiplier: float, lo: float, hi: float,
                 switch: float = SWITCH_RADIUS, max_iter: int = 10 ** 6):
        if multiplier <= 0 or multiplier == 1.0:
            raise InvariantError("multiplier must be positive and different from 1")
        self.f, self.point, self.lam = f, float(point), float(multiplier)
        self.lo, self.hi = lo, hi
        self.switch, self.max_iter = switch, max_iter
        self.local = linearize(f.jet(self.point, min(4, f.max_order)))
        self.kind = ATTRACTING if self.lam < 1 else REPELLING

    def _step(self, y):
        if self.kind == ATTRACTING:
            t = self.f.taylor(y, 1)
            return t[0], t[1]
        x = self.f.inverse(y, self.lo, self.hi)
        return x, 1.0 / self.f.taylor(x, 1)[1]

    def taylor1(self, x):
        """``(phi(x), phi'(x))``."""
        y = np.atleast_1d(np.asarray(x, dtype=float)).copy()
        dy = np.ones_like(y)
        logscale = np.zeros_like(y)
        step_log = -math.log(self.lam) if self.kind == ATTRACTING else math.log(self.lam)
        active = np.abs(y - self.point) > self.switch
        for _ in range(self.max_iter):
            if not active.any():
                break
            idx = np.nonzero(active)[0]
            yn, d = self._step(y[idx])
            y[idx] = yn
            dy[idx] *= d
            logscale[idx] += step_log
            active[idx] = np.abs(yn - self.point) > self.switch
        else:
            raise InvariantError("Koenigs iteration did not reach the fixed point")
        d = y - self.point
        L = np.array([_poly_eval(self.local, v) for v in d])
        dL = np.array([sum((k + 1) * float(c) * v ** k for k, c in enumerate(self.local.coeffs)) for v in d])
        s = np.exp(logscale)
        return s * L, s * dL * dy

    def __call__(self, x):
        v = self.taylor1(x)[0]
        return float(v[0]) if np.ndim(x) == 0 else v

    def deriv(self, x):
        v = self.taylor1(x)[1]
        return float(v[0]) if np.ndim(x) == 0 else v

    def equivariance_residual(self, xs) -> float:
        xs = np.asarray(xs, dtype=float)
        return float(np.max(np.abs(self(self.f(xs)) - self.lam * self(xs))))


def koenigs(f: IntervalMap, fixed_point: float, multiplier: float, side=None, interval=None) -> Linearization:
    """Linearization at ``fixed_point`` on the basin side ``side`` (+1 right, -1 left).

    ``interval`` bounds inverse branches; by default ``[0, 1]`` (or the side
    of the fixed point when ``side`` is given).
    """
    if interval is None:
        interval = (0.0, 1.0)
        if side == 1:
            interval = (fixed_point, 1.0)
        elif side == -1:
            interval = (0.0, fixed_point)
    return Linearization(f, fixed_point, multiplier, *interval)


# ---------------------------------------------------------------- invariants


@dataclass
class InvariantReport:
    z0: float
    A_value: float
    S_value: float
    tau_A: int
    tau_S: int
    n_used: int
    convergence_estimate: dict
    u0: float = float("nan")
    H_prime: float = float("nan")
    A_scale: float = 0.0
    S_scale: float = 0.0
    pair: dict = field(default_factory=dict)
    indeterminate: list = field(default_factory=list)

    @property
    def A_normalized(self) -> float:
        return self.A_value * self.u0

    @property
    def S_normalized(self) -> float:
        return self.S_value * self.u0 ** 2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["A_normalized"] = self.A_normalized
        d["S_normalized"] = self.S_normalized
        return d


def _sign(v: float, scale: float) -> int:
    if abs(v) <= DEAD_BAND * scale:
        return 0
    return 1 if v > 0 else -1


def _partial_values(fwd: np.ndarray, bwd: np.ndarray, lam_p: float):
    """Truncations ``A_n, S_n`` and scales for ``n = 1..N``."""
    t1f, t2f, t3f = fwd[:-1, 1], fwd[:-1, 2], fwd[:-1, 3]
    t1b, t2b, t3b = bwd[1:, 1], bwd[1:, 2], bwd[1:, 3]
    Af, Ab = 2 * t2f / t1f, 2 * t2b / t1b
    Sf = 6 * t3f / t1f - 6 * (t2f / t1f) ** 2
    Sb = 6 * t3b / t1b - 6 * (t2b / t1b) ** 2
    # log D_m, m = 0..N-1 (forward) and m = -1..-N (backward)
    logDf = np.concatenate([[0.0], np.cumsum(np.log(t1f))[:-1]])
    logDb = -np.cumsum(np.log(t1b))
    n = np.arange(1, len(t1b) + 1)
    logP = -n * math.log(lam_p) - logDb
    # sums over m = -n..n-1, evaluated with the common factor P_n folded in
    Df, Db = np.exp(logDf), np.exp(logDb)
    sumA = np.cumsum(Af * Df) + np.cumsum(Ab * Db)
    sumS = np.cumsum(Sf * Df ** 2) + np.cumsum(Sb * Db ** 2)
    absA = np.cumsum(np.abs(Af) * Df) + np.cumsum(np.abs(Ab) * Db)
    absS = np.cumsum((np.abs(6 * t3f / t1f) + 6 * (t2f / t1f) ** 2) * Df ** 2) \
        + np.cumsum((np.abs(6 * t3b / t1b) + 6 * (t2b / t1b) ** 2) * Db ** 2)
    P = np.exp(logP)
    return P * sumA, P * P * sumS, P * absA, P * P * absS, logP, logDf


def _tail(seq: np.ndarray, scale: float, window: int = 16):
    """Increment, geometric ratio and tail estimate at the end of ``seq``.

    The ratio is fitted on the last ``window`` increments that stand above the
    rounding floor ``1e-13 scale``.
    """
    inc = np.abs(np.diff(seq))
    last = float(inc[-1]) if inc.size else 0.0
    sig = inc[inc > 1e-13 * scale][-window:]
    if sig.size < 2:
        return last, 0.0, last
    ratio = float(np.exp(np.mean(np.diff(np.log(sig)))))
    ratio = min(ratio, 1.0 - 1e-12)
    return last, ratio, last * ratio / (1.0 - ratio)


def transition_invariants(f: IntervalMap, pair: RepellerAttractorPair, z0: float, tol: float = 1e-9,
                          n_start: int = 256, n_max: int = 2 ** 21) -> InvariantReport:
    """Nonlinearity and Schwarzian of the transition map at ``phi(z0)`` by cocycle sums.

    The truncation ``n`` doubles until the estimated tail of both sums is below
    ``tol`` times their accumulated scale.
    """
    lo, hi = pair.heteroclinic_interval
    if not lo < z0 < hi:
        raise InvariantError(f"z0={z0} is outside the heteroclinic interval ({lo}, {hi})")
    n = n_start
    while True:
        fwd = _orbit(f, z0, n, False, lo, hi)
        bwd = _orbit(f, z0, n, True, lo, hi)
        A, S, scA, scS, logP, logDf = _partial_values(fwd, bwd, pair.lam_p)
        incA, ratioA, tailA = _tail(A, scA[-1])
        incS, ratioS, tailS = _tail(S, scS[-1])
        ok = tailA <= tol * max(scA[-1], 1e-300) and tailS <= tol * max(scS[-1], 1e-300)
        ok = ok and incA <= tol * scA[-1] and incS <= tol * scS[-1]
        if ok or n >= n_max:
            break
        n *= 2
    # index of first truncation meeting the tolerance, for reporting
    incs_A = np.abs(np.diff(A))
    incs_S = np.abs(np.diff(S))
    good = np.nonzero((incs_A <= tol * scA[1:]) & (incs_S <= tol * scS[1:]))[0]
    n_used = int(good[0] + 2) if good.size else n
    # phi(z0) from the backward end, psi(z0) from the forward end
    # the first backward point within SWITCH_RADIUS keeps d_p well above rounding
    p = pair.p
    near = np.nonzero(np.abs(bwd[:, 0] - p) <= SWITCH_RADIUS)[0]
    m = int(near[0]) if near.size else n
    d_p = bwd[m, 0] - p
    Lp = linearize(f.jet(p, 8))
    u0 = math.copysign(math.exp(m * math.log(pair.lam_p) + math.log(abs(d_p))), d_p) \
        * (_poly_eval(Lp, d_p) / d_p) if d_p != 0 else float("nan")
    # H'(u0) = lim P_n D_n / lam_q**n
    logHp = logP[-1] + logDf[-1] + math.log(fwd[-2, 1]) - n * math.log(pair.lam_q)
    conv = {"last_increment_A": incA, "last_increment_S": incS, "ratio_A": ratioA, "ratio_S": ratioS,
            "tail_A": tailA, "tail_S": tailS, "n_computed": n, "converged": bool(ok),
            "rate_bound": max(pair.lam_q, 1.0 / pair.lam_p)}
    ind = []
    tA, tS = _sign(A[-1], scA[-1]), _sign(S[-1], scS[-1])
    if tA == 0:
        ind.append("tau_A")
    if tS == 0:
        ind.append("tau_S")
    rep = InvariantReport(float(z0), float(A[-1]), float(S[-1]), tA, tS, n_used, conv, float(u0),
                          float(math.exp(logHp)), float(scA[-1]), float(scS[-1]), pair.to_dict(), ind)
    if not ok:
        raise InvariantError("cocycle sums did not converge within n_max", rep)
    return rep


def increments(f: IntervalMap, pair: RepellerAttractorPair, z0: float, n: int) -> dict:
    """Raw truncations ``A_k, S_k`` for ``k = 1..n`` (used to inspect the convergence rate)."""
    lo, hi = pair.heteroclinic_interval
    fwd = _orbit(f, z0, n, False, lo, hi)
    bwd = _orbit(f, z0, n, True, lo, hi)
    A, S, scA, scS, _, _ = _partial_values(fwd, bwd, pair.lam_p)
    return {"A": A, "S": S, "A_scale": scA, "S_scale": scS}


# ---------------------------------------------------------------- sign conditions


def fundamental_domain_samples(f: IntervalMap, pair: RepellerAttractorPair, count: int = 33,
                               start=None) -> np.ndarray:
    """``count`` points log-spaced in distance from ``p`` across ``[z, f(z))``."""
    p, q = pair.p, pair.q
    z = 0.5 * (p + q) if start is None else start
    d0, d1 = abs(z - p), abs(float(f(z)) - p)
    k = np.arange(count) / count
    return p + np.sign(q - p) * d0 * (d1 / d0) ** k


def criterion_holds(f: IntervalMap, resolution: int = 2 ** 14):
    """Three consecutive fixed points ``q0 < p < q1`` with ``f'(q0) < 1/f'(p) < f'(q1) < 1 < f'(p)``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pts = count_fixed_points(f, resolution=resolution).points
    for i in range(1, len(pts) - 1):
        (x0, l0, _), (x1, l1, _), (x2, l2, _) = pts[i - 1], pts[i], pts[i + 1]
        if l0 < 1.0 / l1 < l2 < 1.0 < l1:
            return {"q0": x0, "p": x1, "q1": x2, "lam_q0": l0, "lam_p": l1, "lam_q1": l2,
                    "lam_p_lam_q0": l0 * l1, "lam_p_lam_q1": l1 * l2}
    return None


def _scan_pair(f, pair, count):
    rows = []
    for z in fundamental_domain_samples(f, pair, count):
        try:
            r = transition_invariants(f, pair, float(z))
            rows.append({"p": pair.p, "q": pair.q, "z": float(z), "A": r.A_value, "S": r.S_value,
                         "tau_A": r.tau_A, "tau_S": r.tau_S})
        except InvariantError as exc:
            rows.append({"p": pair.p, "q": pair.q, "z": float(z), "error": str(exc), "tau_A": 0, "tau_S": 0})
    return rows


def _witness(rows, key):
    pos = next((r for r in rows if r[key] > 0), None)
    neg = next((r for r in rows if r[key] < 0), None)
    if pos and neg:
        return {"satisfied": True, "witness": [pos, neg]}
    if all(r[key] == 0 for r in rows):
        return {"satisfied": False, "indeterminate": True, "reason": f"{key} indeterminate at all samples"}
    return {"satisfied": False, "indeterminate": False, "reason": f"{key} has a single sign on all samples"}


def sign_condition_report(f: IntervalMap, J, count: int = 33, use_criterion: bool = True) -> dict:
    """Witnesses for opposite ``tau_A`` (Sign I) and opposite ``tau_S`` (Sign II) inside ``Int J``."""
    a, b = map(float, J)
    pairs = [pr for pr in repeller_attractor_pairs(f) if a < min(pr.p, pr.q) and max(pr.p, pr.q) < b]
    if not pairs:
        return {"pairs": [], "SignI": {"satisfied": False, "reason": "no pair inside Int J"},
                "SignII": {"satisfied": False, "reason": "no pair inside Int J"}, "mode": "none"}
    crit = criterion_holds(f) if use_criterion else None
    out = {"pairs": [pr.to_dict() for pr in pairs], "criterion": crit}
    if crit is not None:
        # confirm at one point per pair: the middle of a fundamental domain
        rows = []
        for pr in pairs:
            z = float(fundamental_domain_samples(f, pr, 3)[1])
            r = transition_invariants(f, pr, z)
            rows.append({"p": pr.p, "q": pr.q, "z": z, "A": r.A_value, "S": r.S_value,
                         "tau_A": r.tau_A, "tau_S": r.tau_S,
                         "expected_tau_A": int(np.sign(pr.p - pr.q)),
                         "expected_tau_S": int(np.sign(pr.lam_p * pr.lam_q - 1.0))})
        confirmed = all(r["tau_A"] == r["expected_tau_A"] and r["tau_S"] == r["expected_tau_S"] for r in rows)
        if confirmed:
            out.update(mode="criterion", table=rows, SignI=_witness(rows, "tau_A"), SignII=_witness(rows, "tau_S"))
            if out["SignI"]["satisfied"] and out["SignII"]["satisfied"]:
                return out
    rows = [row for pr in pairs for row in _scan_pair(f, pr, count)]
    out.update(mode="scan", table=rows, SignI=_witness(rows, "tau_A"), SignII=_witness(rows, "tau_S"))
    return out


# ---------------------------------------------------------------- stability


def _c2_size(amplitude: float, width: float) -> float:
    # sup |beta| = 1, sup |beta'| < 2.6, sup |beta''| = 10 for beta(u) = (1 - u^2)^5
    return abs(amplitude) * max(1.0, 2.6 / width, 10.0 / width ** 2)


def random_perturbation(f: IntervalMap, scale: float, rng: np.random.Generator, n_bumps: int = 3) -> IntervalMap:
    """``f`` plus random bumps of total C^2 size at most ``scale``."""
    if f.pb is None:
        raise MapError("stability probe needs a polynomial or poly+bump map")
    coeffs, bumps = f.pb
    rows = []
    for _ in range(n_bumps):
        w = rng.uniform(0.05, 0.2)
        m = rng.uniform(0.05, 0.95)
        a = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.0) * scale / n_bumps
        rows.append((m, w, a / _c2_size(1.0, w)))
    b = np.vstack([np.asarray(bumps, dtype=float).reshape(-1, 3), np.array(rows)])
    g = poly_bump(coeffs, b)
    g.validate()
    return g


def _matching_pair(g: IntervalMap, pair: RepellerAttractorPair):
    best = None
    for pr in repeller_attractor_pairs(g):
        d = abs(pr.p - pair.p) + abs(pr.q - pair.q)
        if best is None or d < best[0]:
            best = (d, pr)
    if best is None:
        raise InvariantError("perturbed map lost the pair")
    return best[1]


def stability_probe(f: IntervalMap, pair: RepellerAttractorPair, z0, perturbation_scale: float,
                    trials: int, seed: int = 0) -> dict:
    """Sign agreement of ``tau_A``, ``tau_S`` under random C^2-small bump perturbations."""
    zs = [float(z) for z in np.atleast_1d(z0)]
    base = [transition_invariants(f, pair, z) for z in zs]
    if any(r.tau_A == 0 for r in base):
        raise InvariantError("tau_A vanishes at the base point")
    rng = np.random.default_rng(seed)
    agree_A = agree_S = 0
    dA = dS = 0.0
    for _ in range(trials):
        g = random_perturbation(f, perturbation_scale, rng) if perturbation_scale > 0 else f
        pr = _matching_pair(g, pair)
        ok_A = ok_S = True
        for z, r0 in zip(zs, base):
            r = transition_invariants(g, pr, z)
            ok_A &= r.tau_A == r0.tau_A
            ok_S &= r.tau_S == r0.tau_S
            dA = max(dA, abs(r.A_value - r0.A_value))
            dS = max(dS, abs(r.S_value - r0.S_value))
        agree_A += ok_A
        agree_S += ok_S
    return {"scale": perturbation_scale, "trials": trials, "seed": seed, "z0": zs,
            "tau_A_agreement": agree_A, "tau_S_agreement": agree_S,
            "max_delta_A": dA, "max_delta_S": dS,
            "base": [{"z": r.z0, "A": r.A_value, "S": r.S_value, "tau_A": r.tau_A, "tau_S": r.tau_S}
                     for r in base]}


# ---------------------------------------------------------------- power model


def power_model_check(lam: float, mu: float, grid=None, boundary_tol: float = 1e-12) -> dict:
    """Checks on ``F(x) = -x**b``, ``b = log(mu) / log(lam)``.

    ``F(lam**n) = -mu**n``, ``A(F) < 0``, ``sgn S(F) = sgn(lam mu - 1)`` and
    ``G'' = -1/2 (F')**(-1/2) S(F)`` for ``G = (F')**(-1/2)``.
    """
    if not mu < 1.0 < lam:
        raise ValueError("need mu < 1 < lam")
    b = math.log(mu) / math.log(lam)
    x = np.logspace(-2, 2, 401) if grid is None else np.asarray(grid, dtype=float)
    n = np.arange(-10, 11)
    Fn = -(lam ** n.astype(float)) ** b
    orbit_err = float(np.max(np.abs(Fn + mu ** n.astype(float)) / mu ** n.astype(float)))
    Fp = -b * x ** (b - 1)
    A = (b - 1.0) / x
    S = (1.0 - b * b) / (2.0 * x * x)
    G = lambda y: (-b * y ** (b - 1)) ** -0.5  # noqa: E731
    h = 1e-3 * x
    Gpp = (G(x + h) - 2 * G(x) + G(x - h)) / (h * h)
    rhs = -0.5 * Fp ** -0.5 * S
    boundary = abs(lam * mu - 1.0) < boundary_tol
    if boundary:
        g_err = float(np.max(np.abs(Gpp - rhs) / np.abs(G(x)) * x * x))
    else:
        g_err = float(np.max(np.abs(Gpp - rhs) / np.abs(rhs)))
    expected = 0 if boundary else int(np.sign(lam * mu - 1.0))
    signs = np.sign(np.where(np.abs(S) < 1e-12 / (x * x), 0.0, S)).astype(int)
    return {"lam": lam, "mu": mu, "b": b, "boundary": bool(boundary), "orbit_relative_error": orbit_err,
            "A_negative_at": float(x[np.argmax(A < 0)]) if np.any(A < 0) else None,
            "A_negative_everywhere": bool(np.all(A < 0)),
            "S_sign_expected": expected, "S_sign_matches": bool(np.all(signs == expected)),
            "S_min": float(S.min()), "S_max": float(S.max()),
            "G_identity_error": g_err, "G_identity_ok": g_err < 1e-5}
