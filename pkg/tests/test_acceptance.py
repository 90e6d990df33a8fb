import time
import warnings
from fractions import Fraction as Fr

import numpy as np

from blenderlab.examples import mobius_model, polynomial_example, quartic_f0
from blenderlab.fixpoints import count_fixed_points
from blenderlab.flatpoint import construct_one_flat, identity_window, seed_attractors
from blenderlab.germs import commutator, commutator_cancel, decompose_into_flows, next_order_cancel
from blenderlab.invariants import (RepellerAttractorPair, fundamental_domain_samples, power_model_check,
                                   repeller_attractor_pairs, stability_probe, transition_invariants)
from blenderlab.jets import Jet, cocycle_residuals, is_flat
from blenderlab.maps import poly_bump
from blenderlab.semigroup import Word, brute_force_fix_a, growth_census, membership_report, random_word_experiment


def start(acceptance, number, title):
    acceptance.update(number=number, title=title)
    return time.perf_counter()


def test_criterion_01_cocycles(acceptance):
    t0 = start(acceptance, 1, "cocycle identities on 1000 random jet pairs")
    rng = np.random.default_rng(20240601)
    worst_a = worst_s = 0.0
    for _ in range(1000):
        order = int(rng.integers(3, 9))
        f = Jet((float(rng.uniform(0.5, 2.0)),) + tuple(rng.uniform(-1, 1, order - 1)))
        g = Jet((float(rng.uniform(0.5, 2.0)),) + tuple(rng.uniform(-1, 1, order - 1)))
        ra, rs = cocycle_residuals(f, g)
        worst_a, worst_s = max(worst_a, abs(ra)), max(worst_s, abs(rs))
    exact_zero = True
    for k in range(50):
        f = Jet((Fr(k + 1, 7), Fr(k - 3, 5), Fr(2, k + 1), Fr(-1, 3)))
        g = Jet((Fr(3, k + 2), Fr(1, 4), Fr(k, 9), Fr(5, 11)))
        exact_zero &= cocycle_residuals(f, g) == (0, 0)
    dt = time.perf_counter() - t0
    acceptance["detail"] = f"A {worst_a:.1e}, S {worst_s:.1e}, exact zero {exact_zero}, {dt:.2f} s"
    assert worst_a < 1e-9 and worst_s < 1e-9 and exact_zero and dt < 5


def test_criterion_02_mobius(acceptance):
    t0 = start(acceptance, 2, "Mobius oracle 2x/(1+x) at z0 = 1/2")
    r = transition_invariants(mobius_model(2.0), RepellerAttractorPair(0.0, 1.0, 2.0, 0.5, (0.0, 1.0)), 0.5)
    dt = time.perf_counter() - t0
    ratio = r.convergence_estimate["ratio_A"]
    acceptance["detail"] = f"A {r.A_value:.12f}, S {r.S_value:.1e}, ratio {ratio:.3f}, {dt:.3f} s"
    assert abs(r.A_value + 2) < 1e-6 and abs(r.S_value) < 1e-6 and ratio <= 0.6 and dt < 1


def test_criterion_03_next_order(acceptance):
    start(acceptance, 3, "next-order cancellation, x+x^3 and x-x^3")
    got = []
    for alpha in (Fr(0), Fr(2), Fr(-1)):
        res = next_order_cancel(Jet.parse("1 0 1"), Jet.parse("1 0 -1"), alpha, 2)
        assert is_flat(res.composed, 2)
        got.append(res.composed[3])
        assert res.composed[3] == alpha and isinstance(res.composed[3], (int, Fr))
    acceptance["detail"] = "x^3 coefficients " + ", ".join(str(v) for v in got)


def test_criterion_04_commutator(acceptance):
    start(acceptance, 4, "commutator jets and commutator_cancel")
    worst = 0.0
    for r in (3, 4, 5, 6):
        for mu in (1, 2):
            for t in (0.25, 0.5):
                c = commutator(r, float(mu), t)
                want = np.zeros(r + 1)
                want[0], want[r] = 1.0, -(r - 2) * mu * t * t
                worst = max(worst, float(np.max(np.abs(np.array(c.coeffs[: r + 1], dtype=float) - want))))
    hit = 0.0
    for r in (3, 4, 5, 6):
        for alpha in (-1.0, 0.5, 2.0):
            F = [Jet((1.0,) + (0.0,) * (r - 1) + (a,)) for a in (0.3, -0.2, 0.1, 0.05)]
            res = commutator_cancel(F, alpha, r)
            assert is_flat(res.composed, r, tol=1e-9)
            hit = max(hit, abs(res.composed[r + 1] - alpha))
    acceptance["detail"] = f"jet deviation {worst:.1e}, target miss {hit:.1e}"
    assert worst < 1e-9 and hit < 1e-9


def test_criterion_05_membership(acceptance):
    t0 = start(acceptance, 5, "membership of the polynomial example")
    rho = polynomial_example(0.1, 0.5, 0.9, 1.2, 0.04, 0.01)
    rep = membership_report(rho, (0.08, 0.92))
    dt = time.perf_counter() - t0
    flags = {k: rep[k]["flag"] for k in ("W1", "SignI", "SignII", "W_att", "W_sharp")}
    margin = rep["W1"]["blender"]["witness"]["overlap_margin"]
    taus = sorted(w["tau_A"] for w in rep["SignI"]["witness"])
    prs = {round(p["q"], 6): p["lam_p"] * p["lam_q"] for p in rep["W1"]["pairs_in_J"]}
    acceptance["detail"] = (f"{flags}, margin {margin:.4f}, tau_A {taus}, lam_p lam_q {prs}, "
                            f"product {rep['W_att']['product']:.4f}, {dt:.1f} s")
    assert all(flags.values()) and rep["all"]
    assert abs(margin - 0.8464) < 1e-12
    assert taus == [-1, 1]
    eps = 0.01
    assert abs(prs[0.1] - (1 - 0.24 * eps)) < 1e-4 and prs[0.1] < 1
    assert abs(prs[0.9] - (1 + 0.016 * eps)) < 1e-5 and prs[0.9] > 1
    assert rep["W_att"]["product"] < 0.95
    assert dt < 60


def test_criterion_06_census(acceptance):
    t0 = start(acceptance, 6, "growth census n <= 4 against brute force")
    rho = polynomial_example()
    rep = growth_census(rho, 4)
    brute = {}
    over = 0
    for w, n, fc, fa, bound in rep.rows:
        brute[n] = brute.get(n, 0) + brute_force_fix_a(rho.word_map(Word.parse(w)))
        over += fc > bound
    dt = time.perf_counter() - t0
    acceptance["detail"] = f"totals {dict(rep.totals)}, brute force {brute}, over bound {over}, {dt:.1f} s"
    assert rep.totals[1] == 4
    assert brute == dict(rep.totals) and over == 0 and dt < 120


def test_criterion_07_random_words(acceptance):
    t0 = start(acceptance, 7, "random words, 100 trials of length 200")
    rep = random_word_experiment(polynomial_example(), 200, 100, seed=0)
    dt = time.perf_counter() - t0
    counts = {t["fix_count"] for t in rep["trials_data"]}
    acceptance["detail"] = (f"max root {rep['max_root']:.5f} vs bound {rep['bound']:.5f} + 0.02, "
                            f"fixed-point counts {sorted(counts)}, {dt:.1f} s")
    assert len(rep["trials_data"]) == 100
    assert all(t["sup_derivative"] ** (1 / 200) <= rep["bound"] + 0.02 for t in rep["trials_data"])
    assert counts == {1}


def test_criterion_08_flat_pipeline(acceptance):
    t0 = start(acceptance, 8, "flat-point pipeline")
    rho = polynomial_example()
    pair = next(pr for pr in repeller_attractor_pairs(rho[0]) if abs(pr.q - 0.1) < 1e-6)
    cert = construct_one_flat(rho, pair, 0.3)
    iw = identity_window(cert)
    fix, seeded = seed_attractors(iw, 50)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        check = count_fixed_points(seeded.return_map(), resolution=2 ** 12, interval=iw.window)
    dt = time.perf_counter() - t0
    acceptance["detail"] = (f"derivative {cert.derivative_residual:.1e}, periodicity "
                            f"{cert.periodicity_residual:.1e}, window {iw.residual:.1e} on width {iw.width:.2e}, "
                            f"attracting {check.n_attracting}, {dt:.1f} s")
    assert cert.derivative_residual < 1e-6 and cert.periodicity_residual < 1e-10
    assert iw.residual < 1e-9
    assert check.n_attracting >= 50 and dt < 300


def test_criterion_09_power_model(acceptance):
    start(acceptance, 9, "power model sign regimes")
    pos = power_model_check(2.0, 2 ** -0.5)
    neg = power_model_check(2.0, 0.25)
    bnd = power_model_check(2.0, 0.5)
    acceptance["detail"] = (f"S min {pos['S_min']:.3g}, S max {neg['S_max']:.3g}, boundary {bnd['boundary']}, "
                            f"G'' errors {pos['G_identity_error']:.1e} {neg['G_identity_error']:.1e} "
                            f"{bnd['G_identity_error']:.1e}")
    assert pos["S_min"] > 0 and neg["S_max"] < 0
    assert bnd["boundary"] and bnd["S_sign_expected"] == 0
    assert max(r["G_identity_error"] for r in (pos, neg, bnd)) < 1e-5


def test_criterion_10_stability(acceptance):
    start(acceptance, 10, "stability of tau_A, tau_S under small perturbations")
    f = quartic_f0()
    points = agree = 0
    monotone = True
    for pr in repeller_attractor_pairs(f):
        for z in fundamental_domain_samples(f, pr, 3):
            points += 1
            r = stability_probe(f, pr, float(z), 1e-4, 20, seed=points)
            agree += r["tau_A_agreement"] == 20 and r["tau_S_agreement"] == 20
            deltas = [stability_probe(f, pr, float(z), s, 20, seed=points)["max_delta_A"]
                      for s in (1e-3, 1e-4, 1e-5)]
            monotone &= deltas[0] > deltas[1] > deltas[2]
    acceptance["detail"] = f"{agree}/{points} points keep both signs, max dA monotone {monotone}"
    assert agree == points and monotone


def test_criterion_11_flows(acceptance):
    start(acceptance, 11, "decomposition into flows on [0.4, 0.6]")
    F = poly_bump([0.0, 1.0], [[0.5, 0.1, 0.03]])
    fp = decompose_into_flows(F, (0.4, 0.6))
    x = np.linspace(0.4, 0.6, 2001)
    dev = float(np.max(np.abs(fp.G(1.0, fp.H(1.0, x)) - F(x))))
    rng = np.random.default_rng(11)
    law = 0.0
    for s, t in rng.uniform(-1.0, 1.0, (10, 2)):
        law = max(law, float(np.max(np.abs(fp.G(s, fp.G(t, x)) - fp.G(s + t, x)))),
                  float(np.max(np.abs(fp.H(s, fp.H(t, x)) - fp.H(s + t, x)))))
    acceptance["detail"] = f"G o H deviation {dev:.1e}, group law {law:.1e}"
    assert dev < 1e-8 and law < 1e-10
