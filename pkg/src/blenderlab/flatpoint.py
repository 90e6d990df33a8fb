"""Flat periodic points built through the blender, identity windows and attractor seeding.

The return word is ``0 eta' 0^(m+n) eta 0`` (rightmost letter first). Starting
at ``p_hat``, the first ``0`` lands on ``x = f0(p_hat)``; ``eta`` (blender
letters) carries ``x`` exactly onto ``z_{-m} = f0^{-m}(z*)`` near the repeller;
``0^(m+n)`` follows the heteroclinic orbit to ``z_n`` near the attractor;
``eta'`` brings ``z_n`` to within rounding of ``f0^{-1}(p_hat)``; the last ``0``
returns to ``y`` close to ``p_hat``. A local diffeomorphism ``h`` supported
near ``p_hat`` sends ``y`` to ``p_hat`` with slope ``e^s``, where ``s`` absorbs
the residual multiplier left after tuning ``(m, n)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .fixpoints import count_fixed_points
from .germs import CancellationError, two_flat_cancel
from .invariants import RepellerAttractorPair, koenigs, transition_invariants
from .jets import Jet, is_flat, nonlinearity, schwarzian, sign
from .maps import (IntervalMap, MapError, compose_maps, flatten_at, from_record, make_local_diffeo,
                   make_wiggle)
from .semigroup import (Semigroup, Word, _default_J, backward_address, is_generic_point,
                        meet_in_middle)

RESONANCE_DENOMINATOR = 1000
RESONANCE_TOL = 1e-9
SUPPORT_SHARE = 0.495


class FlatPointError(RuntimeError):
    """A stage of the flat-point pipeline could not be completed."""


@dataclass
class FlatPointCertificate:
    p_hat: float
    gamma: Word
    h: list  # corrections composed into generator 0, outermost first
    derivative_residual: float
    periodicity_residual: float
    germ: Jet
    signs: tuple  # (sgn A, sgn S) of the germ
    support_set: list
    semigroup: Semigroup  # the unperturbed semigroup
    details: dict = field(default_factory=dict)

    @property
    def word(self) -> Word:
        """The periodic word ``0 gamma``."""
        return Word((0,)) + self.gamma

    def perturbed(self) -> Semigroup:
        rho = self.semigroup
        for g in reversed(self.h):
            rho = rho.perturbed(g)
        return rho

    def return_map(self) -> IntervalMap:
        return self.perturbed().word_map(self.word)

    def residuals(self) -> dict:
        """Periodicity and derivative residuals recomputed from scratch."""
        t = self.return_map().taylor(self.p_hat, 1)
        return {"periodicity": abs(float(t[0]) - self.p_hat), "derivative": abs(float(t[1]) - 1.0)}

    def to_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "gamma": str(self.gamma),
            "word_length": len(self.word),
            "h": [g.record for g in self.h],
            "derivative_residual": self.derivative_residual,
            "periodicity_residual": self.periodicity_residual,
            "germ": [float(c) for c in self.germ.coeffs],
            "signs": list(self.signs),
            "support_set": [float(v) for v in self.support_set],
            "semigroup": self.semigroup.to_record(),
            "details": self.details,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FlatPointCertificate":
        return cls(p_hat=float(d["p_hat"]), gamma=Word.parse(d["gamma"]),
                   h=[from_record(r) for r in d["h"]],
                   derivative_residual=float(d["derivative_residual"]),
                   periodicity_residual=float(d["periodicity_residual"]),
                   germ=Jet(tuple(float(c) for c in d["germ"])), signs=tuple(d["signs"]),
                   support_set=list(d["support_set"]), semigroup=Semigroup.from_record(d["semigroup"]),
                   details=dict(d.get("details", {})))


# ---------------------------------------------------------------- helpers


def resonance_check(lam_p: float, lam_q: float, max_denominator: int = RESONANCE_DENOMINATOR,
                    tol: float = RESONANCE_TOL) -> dict:
    """Closest rational ``a/b`` (``b <= max_denominator``) to ``log lam_p / |log lam_q|``."""
    ratio = math.log(lam_p) / abs(math.log(lam_q))
    frac = Fraction(ratio).limit_denominator(max_denominator)
    gap = abs(ratio - frac.numerator / frac.denominator)
    return {"ratio": ratio, "nearest": f"{frac.numerator}/{frac.denominator}", "gap": gap,
            "resonant": bool(gap < tol)}


def _orbit_points(f0: IntervalMap, z: float, n: int, backward: bool, lo: float, hi: float) -> np.ndarray:
    if n == 0:
        return np.array([z])
    if f0.pb is not None:
        c, b = f0.pb
        c = np.ascontiguousarray(c, dtype=float)
        b = np.ascontiguousarray(np.asarray(b, dtype=float).reshape(-1, 3))
        rows = kernels.backward_orbit(c, b, z, n, lo, hi) if backward else kernels.forward_orbit(c, b, z, n)
        return rows[:, 0]
    out = [float(z)]
    for _ in range(n):
        out.append(float(f0.inverse(out[-1], lo, hi)) if backward else float(f0(out[-1])))
    return np.array(out)


def _most_displaced(f0: IntervalMap, lo: float, hi: float, grid: int = 20001) -> float:
    x = np.linspace(lo, hi, grid)[1:-1]
    return float(x[np.argmax(np.abs(f0(x) - x))])


def _word_taylor(rho: Semigroup, word: Word, x: float, K: int = 1) -> np.ndarray:
    return rho.word_map(word).taylor(float(x), K)


# ---------------------------------------------------------------- construction


def construct_one_flat(rho: Semigroup, pair: RepellerAttractorPair, z_star: float, U=None,
                       min_period: int = 0, target_log: float = 3.0, J=None,
                       blender_letters=(1, 2), max_adjust: int = 8, s_tol: float = 0.05, generic_eps: float = 0.05,
                       ) -> FlatPointCertificate:
    """1-flat periodic point ``p_hat`` of ``rho_h`` for the word ``0 gamma``.

    Parameters
    ----------
    rho : Semigroup
        Generator 0 carries the repeller-attractor pair, the ``blender_letters``
        form a blender on ``J``.
    pair : RepellerAttractorPair
        Fixed points of generator 0 joined through ``z_star``.
    U : (lo, hi), optional
        Where ``p_hat`` is placed; defaults to the side of ``p`` opposite to ``q``
        up to the next fixed point.
    min_period : int
        Lower bound for ``|0 gamma|``.
    target_log : float
        ``m`` is chosen so that the repeller stretch times the ``eta`` contraction
        is about ``exp(target_log)``; larger values push ``m`` up.

    Returns
    -------
    FlatPointCertificate
    """
    f0 = rho[0]
    J = tuple(J or _default_J(rho))
    p, q, lam_p, lam_q = pair.p, pair.q, pair.lam_p, pair.lam_q
    lo_h, hi_h = pair.heteroclinic_interval
    if not lo_h < z_star < hi_h:
        raise FlatPointError("z_star must lie strictly between the repeller and the attractor")
    res = resonance_check(lam_p, lam_q)
    if res["resonant"]:
        raise FlatPointError(f"multipliers resonant: log ratio {res['ratio']:.12g} ~ {res['nearest']}")
    inv = transition_invariants(f0, pair, z_star)
    if inv.tau_A == 0:
        raise FlatPointError("tau_A(z_star) vanishes")

    # p_hat region: where f0 moves points away from p, opposite to the heteroclinic side
    if U is None:
        U = (p, J[1]) if q < p else (J[0], p)
    U = (float(U[0]), float(U[1]))
    P0 = _most_displaced(f0, *U)
    maps_ = [rho[s] for s in blender_letters]
    contraction = max(float(np.max(m.deriv(np.linspace(J[0], J[1], 257)))) for m in maps_)

    K_eta = 20
    m = max(1, math.ceil((target_log - K_eta * math.log(contraction)) / math.log(lam_p)))
    n = max(1, math.ceil(m * math.log(lam_p) / abs(math.log(lam_q))))
    for attempt in range(4):
        cand = _build(rho, f0, maps_, blender_letters, J, pair, z_star, P0, U, m, n, K_eta, max_adjust, s_tol)
        if cand is None:
            raise FlatPointError("no (m, n) window found")
        length = cand["length"]
        if length >= min_period:
            break
        deficit = min_period - length
        ratio = math.log(lam_p) / abs(math.log(lam_q))
        dm = math.ceil(deficit / (1.0 + ratio))
        m, n = m + dm, cand["n"] + math.ceil(dm * ratio)
    else:
        raise FlatPointError("could not reach min_period")

    gamma, p_hat, y, s, D0 = cand["gamma"], cand["p_hat"], cand["y"], cand["s"], cand["D0"]
    # f0 must carry the whole support off itself, so its width stays below |f0(p_hat) - p_hat|
    d = abs(float(f0(p_hat)) - p_hat)
    support = (p_hat - SUPPORT_SHARE * d, p_hat + SUPPORT_SHARE * d)
    if not support[0] < y < support[1]:
        raise FlatPointError("return point misses the correction support")
    try:
        h = make_local_diffeo([(y, p_hat, math.exp(s))], support)
    except MapError as exc:
        raise FlatPointError(f"monotonicity violated by correction: {exc}") from None

    # orbit points visited right after each letter 0, other than the final one
    sigma = [float(f0(p_hat))] + list(cand["z_path"])
    hit = [v for v in sigma if support[0] <= v <= support[1]]
    if hit:
        raise FlatPointError(f"orbit meets the correction support at {hit[0]:.12g}")

    rho_h = rho.perturbed(h)
    word = Word((0,)) + gamma
    R = rho_h.word_map(word)
    t1 = R.taylor(p_hat, 1)
    germ_t = _germ(rho, h, cand, p_hat)
    germ = Jet(tuple(float(v) for v in germ_t[1:]))
    A_g, S_g = float(nonlinearity(germ)), float(schwarzian(germ))
    signs = (sign(A_g), sign(S_g))

    fac = _factorization(rho, pair, cand, p_hat, s, float(t1[1]))
    gen = is_generic_point(maps_, p_hat, J, generic_eps, budget=20000, max_depth=60,
                           letters=list(blender_letters))
    details = {
        "m": cand["m"], "n": cand["n"], "s": s, "D0": D0, "x": cand["x"], "y": y,
        "eta": str(cand["eta"]), "eta_prime": str(cand["eta_prime"]),
        "z_star": float(z_star), "U": list(U), "support": list(support),
        "A_germ": A_g, "S_germ": S_g, "tau_A": inv.tau_A, "tau_S": inv.tau_S,
        "signs_agree": [signs[0] == inv.tau_A, signs[1] == inv.tau_S],
        "resonance": res, "factorization": fac,
        "generic_check": {"status": gen["status"], "covered": gen["covered"], "targets": gen["targets"],
                          "eps": generic_eps},
        "pair": pair.to_dict(), "adjustments": cand["adjustments"],
    }
    return FlatPointCertificate(p_hat=p_hat, gamma=gamma, h=[h],
                                derivative_residual=abs(float(t1[1]) - 1.0),
                                periodicity_residual=abs(float(t1[0]) - p_hat),
                                germ=germ, signs=signs, support_set=sigma, semigroup=rho,
                                details=details)


def _build(rho, f0, maps_, letters, J, pair, z_star, P0, U, m, n, K_eta, max_adjust, s_tol):
    """Words and return point for the given ``(m, n)``, adjusting ``n`` until the multiplier is near 1."""
    lo_h, hi_h = pair.heteroclinic_interval
    back = _orbit_points(f0, z_star, m, True, lo_h, hi_h)
    z_m = float(back[-1])
    codes, x, ok = backward_address(maps_, letters, [z_m], J, K_eta, prefer=P0)
    if not ok[0]:
        return None
    x = float(x[0])
    eta = Word(tuple(letters[c] for c in codes[0]))
    p_hat = float(f0.inverse(x, *U))
    if not U[0] < p_hat < U[1]:
        return None
    target = float(f0.inverse(p_hat, *U))
    adjustments = []
    for _ in range(max_adjust):
        fwd = _orbit_points(f0, z_star, n, False, lo_h, hi_h)
        z_n = float(fwd[-1])
        eta_p, _, _, _ = meet_in_middle(maps_, letters, z_n, target, J, n_forward=16, n_greedy=None,
                                        n_enum=8)
        M = eta_p + Word((0,) * (m + n)) + eta
        tM = _word_taylor(rho, M, x)
        y_pre = float(tM[0])
        ty = f0.taylor(y_pre, 1)
        y = float(ty[0])
        D0 = float(ty[1]) * float(tM[1]) * float(f0.deriv(p_hat))
        adjustments.append({"n": n, "D0": D0, "eta_prime_length": len(eta_p)})
        if abs(math.log(D0)) <= s_tol:
            break
        n = max(1, n + round(math.log(D0) / abs(math.log(pair.lam_q))))
    else:
        return None
    s = -math.log(D0)
    z_path = np.concatenate([back[::-1], fwd[1:]])[1:]  # z_{-m+1} .. z_n
    gamma = eta_p + Word((0,) * (m + n)) + eta + Word((0,))
    return {"gamma": gamma, "eta": eta, "eta_prime": eta_p, "p_hat": p_hat, "x": x, "y": y, "s": s,
            "D0": D0, "m": m, "n": n, "z_path": [float(v) for v in z_path], "z_m": z_m, "z_n": z_n,
            "z_star": float(z_star), "y_pre": y_pre,
            "length": len(gamma) + 1, "adjustments": adjustments, "M": M}


def _germ(rho, h, cand, p_hat, order: int = 3) -> np.ndarray:
    """Taylor data of ``h o f0 o M o f0`` at ``p_hat`` (``h`` is the identity at ``f0(p_hat)``)."""
    f0 = rho[0]
    R = compose_maps(h, f0, rho.word_map(cand["M"]), f0)
    return R.taylor(p_hat, order)


def _factorization(rho, pair, cand, p_hat, s, direct) -> dict:
    """Return multiplier against ``e^s lam_p^m lam_q^n c H'``.

    ``H'`` is the derivative of the transition map at ``phi(z*)`` and ``c``
    gathers the connection derivatives and the linearization derivatives at
    ``z_{-m}`` and ``z_n``.
    """
    f0 = rho[0]
    lo_h, hi_h = pair.heteroclinic_interval
    phi = koenigs(f0, pair.p, pair.lam_p, interval=(lo_h, hi_h))
    psi = koenigs(f0, pair.q, pair.lam_q, interval=(lo_h, hi_h))
    m, n = cand["m"], cand["n"]
    z_m, z_star, z_n = cand["z_m"], cand["z_star"], cand["z_n"]
    H_prime = psi.deriv(z_star) / phi.deriv(z_star)
    d_eta = float(_word_taylor(rho, cand["eta"], cand["x"])[1])
    d_eta_p = float(_word_taylor(rho, cand["eta_prime"], z_n)[1])
    c = (float(f0.deriv(p_hat)) * d_eta * phi.deriv(z_m) * d_eta_p * float(f0.deriv(cand["y_pre"]))
         / psi.deriv(z_n))
    log_lam = m * math.log(pair.lam_p) + n * math.log(pair.lam_q)
    factored = math.exp(s + log_lam) * c * H_prime
    return {"direct": direct, "factored": factored, "relative_error": abs(factored / direct - 1.0),
            "log_lam_p^m_lam_q^n": log_lam, "c": c, "H_prime": H_prime}


# ---------------------------------------------------------------- identity window and seeding


@dataclass
class IdentityWindow:
    certificate: FlatPointCertificate  # corrections now include the flattening map
    window: tuple
    residual: float
    grid: int

    @property
    def width(self) -> float:
        return self.window[1] - self.window[0]

    def to_dict(self) -> dict:
        return {"window": list(self.window), "width": self.width, "residual": self.residual, "grid": self.grid}


def _window_residual(R: IntervalMap, window, grid: int) -> float:
    x = np.linspace(window[0], window[1], grid)
    return float(np.max(np.abs(R(x) - x)))


def identity_window(cert: FlatPointCertificate, inner: float = 0.9, grid: int = 4097) -> IdentityWindow:
    """Compose a flattening map ``g`` so that ``rho^{0 gamma}`` is the identity near ``p_hat``.

    ``g`` inverts the return map on a plateau around ``p_hat``; it is supported in
    the support of the last correction, which the orbit of ``p_hat`` avoids.
    """
    R = cert.return_map()
    lo, hi = cert.details["support"]
    if any(lo <= v <= hi for v in cert.support_set):
        raise FlatPointError("correction support collides with the orbit of p_hat")
    # wider plateaus give wider windows but steeper ramps; back off until g is monotone
    g = None
    for share in [inner] + [v for v in (0.8, 0.7, 0.6, 0.5) if v < inner]:
        try:
            g = flatten_at(R, cert.p_hat, (lo, hi), inner=share)
            inner = share
            break
        except MapError as exc:
            last = exc
    if g is None:
        raise FlatPointError(f"flattening failed: {last}")
    gs, ge = g.support[0]
    if any(gs <= v <= ge for v in cert.support_set):
        raise FlatPointError("correction support collides with the orbit of p_hat")
    new = FlatPointCertificate(**{**cert.__dict__, "h": [g] + list(cert.h),
                                  "details": dict(cert.details, flatten_inner=inner)})
    window = tuple(float(v) for v in g.inner_window)
    resid = _window_residual(new.return_map(), window, grid)
    t = new.return_map().taylor(cert.p_hat, 1)
    new.periodicity_residual = abs(float(t[0]) - cert.p_hat)
    new.derivative_residual = abs(float(t[1]) - 1.0)
    return IdentityWindow(new, window, resid, grid)


def seed_attractors(iw: IdentityWindow, count: int, resolution: int = 2 ** 12,
                    amplitude_safety: float = 0.4) -> tuple:
    """Wiggle inside the identity window so that ``rho^{0 gamma}`` has ``count`` attracting fixed points there.

    Returns ``(FixReport, certificate)``; the certificate's corrections include the wiggle.
    """
    try:
        wig = make_wiggle(iw.window, count, amplitude_safety=amplitude_safety)
    except MapError as exc:
        raise FlatPointError(f"window too narrow for {count} attractors: {exc}") from None
    # the root finder needs several samples per period, and the wiggle must stand above the residual
    lo, hi = iw.window
    per_period = resolution * (wig.params["plateau"][1] - wig.params["plateau"][0]) / (hi - lo) / (count + 1)
    floor = 100.0 * max(iw.residual, np.finfo(float).eps * max(abs(lo), abs(hi)))
    if per_period < 8 or wig.params["a"] < floor:
        raise FlatPointError(f"window too narrow for {count} attractors at resolution {resolution}")
    cert = iw.certificate
    new = FlatPointCertificate(**{**cert.__dict__, "h": [wig] + list(cert.h),
                                  "details": dict(cert.details, wiggle_count=int(count))})
    R = new.return_map()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = count_fixed_points(R, resolution=resolution, interval=iw.window)
    if rep.n_attracting < count:
        raise FlatPointError(f"only {rep.n_attracting} attracting fixed points, wanted {count}")
    return rep, new


# ---------------------------------------------------------------- higher flatness at jet level


def orchestrate_two_flat(cert1: FlatPointCertificate, cert2: FlatPointCertificate, order: int = 3):
    """Cancel the second-order terms of two certified 1-flat germs.

    The connector germs are taken to be the identity (``alpha = beta = 0``); the
    interval-level word surgery is not performed.
    """
    g1, g2 = cert1.germ.truncate(order), cert2.germ.truncate(order)
    table = {"germ1": {"A": float(nonlinearity(g1)), "S": float(schwarzian(g1))},
             "germ2": {"A": float(nonlinearity(g2)), "S": float(schwarzian(g2))}}
    # germs are 1-flat up to the certified derivative residual; snap the linear term
    F1 = Jet((1.0,) + tuple(g1.coeffs[1:]))
    F2 = Jet((1.0,) + tuple(g2.coeffs[1:]))
    try:
        res = two_flat_cancel(F1, F2)
    except CancellationError as exc:
        raise FlatPointError(f"sign preconditions unmet: {exc}; signs {table}") from None
    out = res.to_dict()
    out["sign_table"] = table
    out["A_composed"] = float(nonlinearity(res.composed))
    out["S_composed"] = float(schwarzian(res.composed))
    out["is_2_flat"] = bool(is_flat(res.composed, 2, tol=1e-9))
    return res, out
