import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blenderlab.examples import mobius_model, quartic_f0
from blenderlab.invariants import (InvariantError, RepellerAttractorPair, fundamental_domain_samples, koenigs,
                                   power_model_check, repeller_attractor_pairs, sign_condition_report,
                                   stability_probe, transition_invariants)
from blenderlab.maps import affine, mobius, polynomial


@pytest.fixture(scope="module")
def single_pair_mobius():
    """Mobius map with repeller 0.2 and attractor 0.8; A < 0 and S = 0 on the gap."""
    return mobius(1.4, -0.16, 1.0, 0.4)


def mobius_pair(lam):
    return RepellerAttractorPair(0.0, 1.0, lam, 1.0 / lam, (0.0, 1.0))


# ------------------------------------------------------------ pairs


def test_pairs_f0():
    prs = repeller_attractor_pairs(quartic_f0())
    got = sorted((round(pr.p, 12), round(pr.q, 12)) for pr in prs)
    assert got == [(0.5, 0.1), (0.5, 0.9)]
    for pr in prs:
        assert pr.lam_p > 1 > pr.lam_q > 0


def test_pairs_single_attractor():
    assert repeller_attractor_pairs(affine(0.5, 0.1)) == []


def test_pairs_mobius_fixture(single_pair_mobius):
    prs = repeller_attractor_pairs(single_pair_mobius)
    assert len(prs) == 1
    assert prs[0].p == pytest.approx(0.2) and prs[0].q == pytest.approx(0.8)


def test_pairs_reject_neutral():
    # x + (x - 0.5)^2 / 10 touches the diagonal
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(ValueError):
            repeller_attractor_pairs(polynomial([0.025, 0.9, 0.1]), resolution=2 ** 12 - 1)


# ------------------------------------------------------------ Koenigs


def test_koenigs_affine():
    f = affine(0.96, 0.0016)
    phi = koenigs(f, 0.04, 0.96, side=1)
    x = np.linspace(0.05, 0.9, 11)
    assert np.max(np.abs(phi(x) - (x - 0.04))) < 1e-12


@pytest.mark.parametrize("lam", [1.5, 2.0, 3.0])
def test_koenigs_mobius(lam):
    f = mobius_model(lam)
    phi = koenigs(f, 0.0, lam, interval=(0.0, 0.999))
    x = np.linspace(0.05, 0.6, 12)
    assert np.max(np.abs(phi(x) - x / (1 - x))) < 1e-10
    assert phi.equivariance_residual(x[:6]) < 1e-10
    assert abs(phi.deriv(1e-9) - 1.0) < 1e-8


# ------------------------------------------------------------ transition invariants


def test_mobius_oracle():
    r = transition_invariants(mobius_model(2.0), mobius_pair(2.0), 0.5)
    assert abs(r.A_value + 2.0) < 1e-6 and abs(r.S_value) < 1e-6
    assert r.tau_A == -1 and r.tau_S == 0 and "tau_S" in r.indeterminate
    assert r.convergence_estimate["ratio_A"] <= 0.6


def test_mobius_phi_two():
    # phi(z) = z / (1 - z) = 2 at z = 2/3
    r = transition_invariants(mobius_model(2.0), mobius_pair(2.0), 2.0 / 3.0)
    assert abs(r.A_value + 1.0) < 1e-6


@pytest.mark.parametrize("lam", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("z", [0.3, 0.5, 0.7])
def test_mobius_family(lam, z):
    r = transition_invariants(mobius_model(lam), mobius_pair(lam), z)
    u0 = z / (1 - z)
    assert abs(r.A_value + 2.0 / u0) < 1e-6
    assert abs(r.S_value) < 1e-6


def test_outside_interval(pairs):
    pr = pairs[0]
    with pytest.raises(InvariantError):
        transition_invariants(quartic_f0(), pr, 0.95 if pr.q < pr.p else 0.05)


def test_orbit_invariance(pairs):
    f = quartic_f0()
    for pr in pairs:
        z = 0.5 * (pr.p + pr.q)
        reps = [transition_invariants(f, pr, z)]
        for _ in range(2):
            z = float(f(z))
            reps.append(transition_invariants(f, pr, z))
        assert len({r.tau_A for r in reps}) == 1
        assert len({r.tau_S for r in reps}) == 1
        a0 = reps[0].A_normalized
        for r in reps[1:]:
            assert abs(r.A_normalized - a0) < 1e-7 * abs(a0)
            assert abs(r.S_normalized - reps[0].S_normalized) < 1e-7 * abs(reps[0].S_normalized)


def test_geometric_rate(pairs):
    f = quartic_f0()
    for pr in pairs:
        r = transition_invariants(f, pr, 0.5 * (pr.p + pr.q))
        ce = r.convergence_estimate
        assert ce["converged"]
        assert ce["ratio_A"] <= ce["rate_bound"] + 0.1


def test_truncation_doubling(pairs):
    f = quartic_f0()
    pr = pairs[0]
    z = 0.5 * (pr.p + pr.q)
    a = transition_invariants(f, pr, z)
    b = transition_invariants(f, pr, z, n_start=2 * a.convergence_estimate["n_computed"])
    assert abs(a.A_value - b.A_value) < 1e-8 * max(1.0, abs(a.A_value))


def test_prop_tau_a_matches_orientation(pairs):
    f = quartic_f0()
    for pr in pairs:
        zs = fundamental_domain_samples(f, pr, 9)
        taus = {transition_invariants(f, pr, float(z)).tau_A for z in zs}
        assert int(np.sign(pr.p - pr.q)) in taus


# ------------------------------------------------------------ sign conditions


def test_sign_conditions_example():
    rep = sign_condition_report(quartic_f0(), (0.08, 0.92))
    assert rep["SignI"]["satisfied"] and rep["SignII"]["satisfied"]
    taus = {round(r["q"], 6): r["tau_A"] for r in rep["table"]}
    assert taus == {0.1: 1, 0.9: -1}


def test_sign_conditions_scan_without_criterion():
    rep = sign_condition_report(quartic_f0(), (0.08, 0.92), count=5, use_criterion=False)
    assert rep["mode"] == "scan"
    assert rep["SignI"]["satisfied"] and rep["SignII"]["satisfied"]


def test_sign_one_fails_single_pair(single_pair_mobius):
    rep = sign_condition_report(single_pair_mobius, (0.1, 0.9), count=9)
    assert not rep["SignI"]["satisfied"]
    assert {r["tau_A"] for r in rep["table"]} == {-1}
    # lam_p lam_q = 1: the Schwarzian sign is reported as indeterminate, not guessed
    assert rep["SignII"].get("indeterminate") is True
    assert {r["tau_S"] for r in rep["table"]} == {0}


def test_sign_conditions_no_pair():
    rep = sign_condition_report(quartic_f0(), (0.2, 0.4))
    assert rep["mode"] == "none" and not rep["SignI"]["satisfied"]


# ------------------------------------------------------------ stability


def test_stability_zero_scale(pairs):
    pr = pairs[0]
    rep = stability_probe(quartic_f0(), pr, 0.5 * (pr.p + pr.q), 0.0, 2)
    assert rep["max_delta_A"] == 0.0 and rep["tau_A_agreement"] == 2


def test_stability_small_scale(pairs):
    pr = pairs[0]
    rep = stability_probe(quartic_f0(), pr, 0.5 * (pr.p + pr.q), 1e-4, 4, seed=1)
    assert rep["tau_A_agreement"] == 4 and rep["tau_S_agreement"] == 4


# ------------------------------------------------------------ power model


def test_power_model_positive():
    rep = power_model_check(2.0, 2 ** -0.5)
    assert rep["b"] == pytest.approx(-0.5)
    assert rep["S_sign_expected"] == 1 and rep["S_sign_matches"]
    x = np.logspace(-2, 2, 401)
    assert rep["S_min"] == pytest.approx(np.min(0.375 / x ** 2))
    assert rep["A_negative_everywhere"] and rep["G_identity_ok"]
    assert rep["orbit_relative_error"] < 1e-12


def test_power_model_negative():
    rep = power_model_check(2.0, 0.25)
    assert rep["S_sign_expected"] == -1 and rep["S_sign_matches"]
    x = np.logspace(-2, 2, 401)
    assert rep["S_max"] == pytest.approx(np.max(-1.5 / x ** 2))
    assert rep["G_identity_ok"]


def test_power_model_boundary():
    rep = power_model_check(2.0, 0.5)
    assert rep["boundary"] and rep["S_sign_expected"] == 0 and rep["S_sign_matches"]
    assert rep["G_identity_ok"]


def test_power_model_pre():
    with pytest.raises(ValueError):
        power_model_check(0.5, 0.25)


@settings(max_examples=30, deadline=None)
@given(st.floats(1.1, 5.0), st.floats(0.05, 0.95))
def test_power_model_sign_rule(lam, mu):
    rep = power_model_check(lam, mu)
    if not rep["boundary"]:
        assert rep["S_sign_expected"] == int(math.copysign(1, lam * mu - 1))
        assert rep["S_sign_matches"]
