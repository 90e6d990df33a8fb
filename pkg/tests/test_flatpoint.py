import json
import warnings

import numpy as np
import pytest

from blenderlab.fixpoints import count_fixed_points
from blenderlab.flatpoint import (FlatPointCertificate, FlatPointError, construct_one_flat, identity_window,
                                  orchestrate_two_flat, resonance_check, seed_attractors)
from blenderlab.invariants import transition_invariants
from blenderlab.jets import nonlinearity


def test_certificate_residuals(cert):
    assert cert.derivative_residual < 1e-8
    assert cert.periodicity_residual < 1e-10
    r = cert.residuals()
    assert r["derivative"] < 1e-8 and r["periodicity"] < 1e-10


def test_p_hat_off_support_set(cert):
    assert cert.p_hat not in cert.support_set
    lo, hi = cert.details["support"]
    assert not any(lo <= v <= hi for v in cert.support_set)
    assert lo < cert.p_hat < hi


def test_word_shape(cert):
    assert cert.word.letters[-1] == 0
    assert len(cert.word) == len(cert.gamma) + 1


def test_serialization_roundtrip(cert):
    d = json.loads(json.dumps(cert.to_dict()))
    back = FlatPointCertificate.from_dict(d)
    r0, r1 = cert.residuals(), back.residuals()
    for k in r0:
        assert abs(r0[k] - r1[k]) < 1e-12
    assert str(back.gamma) == str(cert.gamma)
    assert back.germ.coeffs == pytest.approx(cert.germ.coeffs, rel=1e-12)


def test_factorization(cert):
    assert cert.details["factorization"]["relative_error"] < 1e-6


def test_signs_agree_with_invariants(cert, cert_high):
    for c in (cert, cert_high):
        assert c.details["signs_agree"] == [True, True]


def test_signs_match_transition_invariants(cert, pair_low, rho):
    inv = transition_invariants(rho[0], pair_low, 0.3)
    assert cert.signs == (inv.tau_A, inv.tau_S)


def test_germ_is_one_flat(cert):
    assert abs(cert.germ.coeffs[0] - 1.0) < 1e-8
    assert np.sign(float(nonlinearity(cert.germ))) == cert.signs[0]


def test_min_period(rho, pair_low, cert):
    target = len(cert.word) + 500
    c = construct_one_flat(rho, pair_low, 0.3, min_period=target)
    assert len(c.word) >= target
    assert c.derivative_residual < 1e-6 and c.periodicity_residual < 1e-10


def test_z_star_outside(rho, pair_low):
    with pytest.raises(FlatPointError):
        construct_one_flat(rho, pair_low, 0.7)


def test_resonance_check():
    assert resonance_check(2.0, 0.25)["resonant"]
    assert resonance_check(4.0, 0.5)["nearest"] == "2/1"
    rep = resonance_check(1.00112, 0.99648)
    assert not rep["resonant"] and rep["gap"] > 0


# ------------------------------------------------------------ identity window


def test_identity_window(window, cert):
    assert window.residual < 1e-9
    assert window.width >= 1e-4
    assert window.window[0] < cert.p_hat < window.window[1]
    c = window.certificate
    assert c.derivative_residual < 1e-8 and c.periodicity_residual < 1e-10


def test_window_disjoint_from_orbit(window, cert):
    lo, hi = window.window
    assert not any(lo <= v <= hi for v in cert.support_set)


def test_window_idempotent(window):
    again = identity_window(window.certificate)
    assert abs(again.residual - window.residual) < 1e-12


def test_window_keeps_generators_valid(window):
    rho = window.certificate.perturbed()
    for g in rho.generators:
        g.validate()


# ------------------------------------------------------------ seeding


@pytest.fixture(scope="module")
def seeded(window):
    return seed_attractors(window, 50)


def test_seed_fifty(seeded, window):
    rep, c = seeded
    assert rep.n_attracting >= 50
    lo, hi = window.window
    pts = [x for x, _, _ in rep.attracting]
    assert all(lo <= x <= hi for x in pts)


def test_seed_validators(seeded):
    _, c = seeded
    for g in c.perturbed().generators:
        g.validate()


def test_seed_one(window):
    rep, _ = seed_attractors(window, 1)
    assert rep.n_attracting >= 1


def test_seed_resolution_stable(window):
    rep, c = seed_attractors(window, 10, resolution=2 ** 10)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep2 = count_fixed_points(c.return_map(), resolution=2 ** 11, interval=window.window)
    assert rep2.n_attracting == rep.n_attracting


@pytest.mark.parametrize("count", [1000, 10 ** 7])
def test_seed_too_many(window, count):
    with pytest.raises(FlatPointError, match="too narrow"):
        seed_attractors(window, count)


# ------------------------------------------------------------ two-flat orchestration


def test_orchestrate(cert, cert_high):
    assert cert.signs[0] == -cert_high.signs[0]
    res, out = orchestrate_two_flat(cert, cert_high)
    assert abs(out["A_composed"]) < 1e-9 * max(1.0, abs(out["S_composed"]))
    assert np.sign(out["S_composed"]) == np.sign(out["sign_table"]["germ1"]["S"])
    assert out["is_2_flat"]


def test_orchestrate_wrong_ratio(cert, cert_high):
    with pytest.raises(FlatPointError, match="signs"):
        orchestrate_two_flat(cert_high, cert)


def test_orchestrate_same_sign(cert):
    with pytest.raises(FlatPointError):
        orchestrate_two_flat(cert, cert)
