import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blenderlab.examples import polynomial_example
from blenderlab.jets import Jet
from blenderlab.maps import affine, compose_maps
from blenderlab.semigroup import (Semigroup, Word, WordError, apply_word, apply_word_jet, brute_force_fix_a,
                                  check_blender_criterion, connect_exact, connect_with_germ,
                                  empirical_blender_density, find_connecting_word, growth_census,
                                  is_generic_point, membership_report, orbit_enters, random_word_experiment,
                                  replay_witness)

words = st.lists(st.integers(0, 2), max_size=12).map(lambda v: Word(tuple(v)))


# ------------------------------------------------------------ words


def test_empty_word_is_identity(rho):
    assert apply_word(rho, Word(), 0.37) == 0.37
    assert apply_word(rho, "", 0.37) == 0.37


def test_word_21_affine(rho):
    assert apply_word(rho, "21", 0.0) == pytest.approx(0.0399360, abs=1e-15)


def test_invalid_letter(rho):
    with pytest.raises(WordError):
        apply_word(rho, "3", 0.5)


def test_word_order_convention():
    w = Word.parse("21")
    assert w.application_order == (1, 2)
    assert str(Word.parse("0") + Word.parse("12")) == "012"


@settings(max_examples=60, deadline=None)
@given(words, words, st.floats(0.0, 1.0))
def test_homomorphism(w2, w1, x):
    rho = polynomial_example()
    assert apply_word(rho, w2 + w1, x) == apply_word(rho, w2, apply_word(rho, w1, x))


@settings(max_examples=30, deadline=None)
@given(words, st.floats(0.05, 0.95))
def test_derivative_is_product_along_orbit(w, x):
    rho = polynomial_example()
    y, prod = x, 1.0
    for s in w.application_order:
        prod *= rho[s].deriv(y)
        y = rho[s](y)
    assert apply_word_jet(rho, w, x, 1).coeffs[0] == pytest.approx(prod, rel=1e-12)


def test_record_round_trip(rho):
    back = Semigroup.from_record(rho.to_record())
    assert back.apply("0120", 0.3) == rho.apply("0120", 0.3)


# ------------------------------------------------------------ blender


def test_blender_criterion_example(rho):
    cert = check_blender_criterion(rho[1], rho[2], 0.04, 0.96, (0.08, 0.92))
    assert cert.certified
    assert cert.witness["f1_b"] == pytest.approx(0.9232)
    assert cert.witness["f2_a"] == pytest.approx(0.0768)
    assert cert.witness["overlap_margin"] == pytest.approx(0.8464)


def test_blender_criterion_boundary():
    cert = check_blender_criterion(affine(0.5, 0.0), affine(0.5, 0.5), 0.0, 1.0)
    assert not cert.certified and "f1(b) > f2(a)" in cert.reason


@pytest.mark.parametrize("delta", [0.3, 0.45, 0.499])
def test_blender_margin_closed_form(delta):
    f1, f2 = affine(1 - delta, delta ** 2), affine(1 - delta, delta * (1 - delta))
    cert = check_blender_criterion(f1, f2, delta, 1 - delta)
    assert cert.witness["overlap_margin"] == pytest.approx((1 - 2 * delta) ** 2, abs=1e-12)
    assert cert.certified


def test_blender_margin_vanishes_at_half():
    cert = check_blender_criterion(affine(0.5, 0.25), affine(0.5, 0.25), 0.5, 0.5)
    assert not cert.certified


def test_density_example(rho):
    rep = empirical_blender_density([rho[1], rho[2]], (0.08, 0.92), 1e-3)
    assert rep["success"] and rep["max_distance"] < 1e-3
    assert rep["max_word_length"] > 0


def test_density_single_contraction_fails(rho):
    rep = empirical_blender_density([rho[1]], (0.08, 0.92), 1e-2)
    assert not rep["success"]


# ------------------------------------------------------------ connections


def test_connecting_word_trivial(rho):
    w, err = find_connecting_word(rho, 0.4, 0.4, 1e-3)
    assert len(w) == 0 and err == 0


def test_connecting_word_example(rho):
    w, err = find_connecting_word(rho, 0.3, 0.7, 1e-6, min_length=30)
    assert err < 1e-6 and len(w) >= 30
    assert w.count(0) == 1
    assert abs(apply_word(rho, w, 0.3) - 0.7) < 1e-6


def test_connect_exact(rho):
    U = (0.6, 0.62)
    w, h, info = connect_exact(rho, 0.3, 0.7, U)
    rho_h = rho.perturbed(h)
    assert abs(rho_h.apply(w, 0.3) - 0.7) < 1e-12
    x = np.linspace(0, 1, 2001)
    outside = (x <= U[0]) | (x >= U[1])
    assert np.array_equal(h(x[outside]), x[outside])


def test_connect_with_germ_identity(rho, cert):
    w, hs, info = connect_with_germ(rho, 0.3, 0.7, Jet((1.0,)), (0.75, 0.78), (0.8, 0.83), cert)
    assert info["value_residual"] < 1e-12
    assert abs(info["jet"][0] - 1.0) < 1e-8
    assert str(w).count(str(cert.word)) == info["N"]


def test_connect_with_germ_derivative(rho, cert):
    target = Jet((2.5,))
    w, hs, info = connect_with_germ(rho, 0.3, 0.7, target, (0.75, 0.78), (0.8, 0.83), cert)
    rho_h = cert.perturbed()
    for h in reversed(hs):
        rho_h = rho_h.perturbed(h)
    assert abs(rho_h.apply(w, 0.3) - 0.7) < 1e-12
    assert abs(rho_h.word_map(w).deriv(0.3) - 2.5) < 1e-8


def test_connect_with_germ_rejects(rho, cert):
    with pytest.raises(WordError):
        connect_with_germ(rho, 0.3, 0.7, Jet((1.0, 0.0)), (0.75, 0.78), (0.8, 0.83), cert, r0=2)
    sa = cert.details["support"]
    with pytest.raises(WordError):
        connect_with_germ(rho, 0.3, 0.7, Jet((1.0,)), tuple(sa), (0.8, 0.83), cert)


# ------------------------------------------------------------ membership


def test_membership_example(rho):
    rep = membership_report(rho, rho.params["J"])
    for k in ("W1", "SignI", "SignII", "W_att", "W_sharp"):
        assert rep[k]["flag"], k
    assert rep["all"]


def test_membership_eps_zero():
    rho0 = polynomial_example(eps=0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = membership_report(rho0, rho0.params["J"])
    assert not rep["W1"]["flag"]


def test_membership_steep_f0():
    rho1 = polynomial_example(eps=1.0)
    rep = membership_report(rho1, rho1.params["J"])
    assert rep["W_att"]["product"] > 1 and not rep["W_att"]["flag"]


def test_w_sharp_direct(rho):
    ent = orbit_enters(rho, rho.params["J"], grid=1000, depth=200)
    assert ent["all_enter"] and ent["failures"] == 0


# ------------------------------------------------------------ census


def test_census_length_one(rho):
    rep = growth_census(rho, 1)
    assert rep.totals == {1: 4}
    per = {w: fa for w, _, _, fa, _ in rep.rows}
    assert per == {"0": 2, "1": 1, "2": 1}
    assert rep.to_csv().splitlines()[0] == "word,length,fix_count,fix_a_count"


def test_census_excludes_empty_word(rho):
    rep = growth_census(rho, 0)
    assert rep.totals == {} and rep.rows == []


def test_census_totals_match_rows(rho):
    rep = growth_census(rho, 3)
    for n, total in rep.totals.items():
        assert total == sum(fa for _, m, _, fa, _ in rep.rows if m == n)


def test_census_brute_force_and_degree(rho):
    rep = growth_census(rho, 2)
    for w, n, fc, fa, bound in rep.rows:
        assert fa == brute_force_fix_a(rho.word_map(w))
        assert fc <= bound


def test_census_workers_deterministic(rho):
    a = growth_census(rho, 2)
    b = growth_census(rho, 2, workers=2)
    assert a.rows == b.rows and a.totals == b.totals


def test_census_resolution_monotone(rho):
    a = growth_census(rho, 2, resolution=2 ** 10)
    b = growth_census(rho, 2, resolution=2 ** 11)
    assert all(rb[2] >= ra[2] for ra, rb in zip(a.rows, b.rows))


def test_census_partial_flag(rho):
    rep = growth_census(rho, 2, max_words=5)
    assert rep.partial and len(rep.rows) == 5


# ------------------------------------------------------------ random words


def test_random_words_small(rho):
    rep = random_word_experiment(rho, 50, 10, seed=7)
    assert rep["max_root"] <= rep["bound"] + 0.02
    assert all(t["fix_count"] == 1 for t in rep["trials_data"])


def test_random_words_seeded(rho):
    a = random_word_experiment(rho, 20, 5, seed=3)
    b = random_word_experiment(rho, 20, 5, seed=3)
    assert a == b


def test_random_words_zero_length(rho):
    rep = random_word_experiment(rho, 0, 3, seed=0)
    assert all(t["sup_derivative"] == 1.0 and t["fix_count"] is None for t in rep["trials_data"])


# ------------------------------------------------------------ genericity


def test_generic_point(rho):
    maps_ = [rho[1], rho[2]]
    rep = is_generic_point(maps_, 0.5, (0.08, 0.92), 1e-2)
    assert rep["generic"]
    for wit in rep["witness"][::7]:
        assert replay_witness(maps_, [1, 2], wit, 0.5) < 1e-9
        assert abs(wit["preimage"] - wit["target"]) <= 1e-2


def test_generic_point_indeterminate(rho):
    # preimages of a point near 0 leave [0, 1] under both inverse branches
    rep = is_generic_point([rho[1], rho[2]], 1e-4, (0.08, 0.92), 1e-2, budget=1000)
    assert rep["status"] == "indeterminate" and not rep["generic"]


def test_perturbation_locality(rho):
    h = compose_maps(affine(1.0, 0.0))
    assert rho.perturbed(h).apply("0120", 0.3) == pytest.approx(rho.apply("0120", 0.3), abs=1e-16)
