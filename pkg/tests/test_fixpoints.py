import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blenderlab.examples import polynomial_example, quartic_f0
from blenderlab.fixpoints import FixedPointWarning, brute_force_roots, classify, count_fixed_points
from blenderlab.maps import affine, compose_maps, identity, make_wiggle, poly_bump


def test_affine_single_attractor():
    rep = count_fixed_points(affine(0.5, 0.1))
    assert len(rep.points) == 1
    x, m, c = rep.points[0]
    assert x == pytest.approx(0.2, abs=1e-12) and m == 0.5 and c == "attracting"


def test_f0_fixed_points():
    rep = count_fixed_points(quartic_f0())
    assert rep.locations == pytest.approx([0.1, 0.5, 0.9], abs=1e-12)
    assert [p[0] for p in rep.attracting] == pytest.approx([0.1, 0.9], abs=1e-12)
    mults = [p[1] for p in rep.points]
    assert mults == pytest.approx([1 - 0.00352, 1 + 0.00112, 1 - 0.00096], abs=1e-12)


def test_classify_bands():
    assert classify(0.5) == "attracting"
    assert classify(1.5) == "repelling"
    assert classify(1.0 + 1e-9) == "neutral-flagged"


def test_identity_stretch_is_flagged():
    with pytest.warns(FixedPointWarning):
        rep = count_fixed_points(identity(), resolution=64)
    assert rep.identity_intervals and rep.n_attracting == 0


def test_tangency_flagged_not_dropped():
    # x + (x - 0.5)^2 / 10 touches the diagonal at 0.5
    from blenderlab.maps import polynomial
    f = polynomial([0.025, 0.9, 0.1])
    with pytest.warns(FixedPointWarning):
        rep = count_fixed_points(f, resolution=2 ** 12 - 1)
    assert any(c == "neutral-flagged" for _, _, c in rep.points)


def test_wiggle_five():
    w = make_wiggle((0.2, 0.8), 5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = count_fixed_points(w)
    assert rep.n_attracting >= 5


def test_report_sorted_and_separated():
    rho = polynomial_example()
    m = rho.word_map("0102")
    rep = count_fixed_points(m)
    xs = rep.locations
    assert xs == sorted(xs)
    assert all(b - a > rep.tolerance for a, b in zip(xs, xs[1:]))


def test_csv_and_dict():
    rep = count_fixed_points(quartic_f0())
    rows = rep.to_csv().strip().splitlines()
    assert rows[0] == "x,multiplier,class" and len(rows) == 4
    assert rep.to_dict()["points"][0]["class"] == "attracting"


def _oracle_agrees(f):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = count_fixed_points(f)
    roots = brute_force_roots(f, 10 ** 6)
    assert len(rep.points) == len(roots)
    assert np.max(np.abs(np.array(rep.locations) - roots), initial=0.0) < 1e-8


@pytest.mark.parametrize("word", ["0", "1", "2", "01", "102", "0120", "2200", "0000"])
def test_brute_force_oracle_words(word):
    _oracle_agrees(polynomial_example().word_map(word))


@settings(max_examples=15, deadline=None)
@given(st.lists(st.tuples(st.floats(0.1, 0.9), st.floats(0.05, 0.2), st.floats(-0.004, 0.004)),
                min_size=1, max_size=3),
       st.floats(0.9, 0.99), st.floats(0.001, 0.05))
def test_brute_force_oracle_random(bumps, slope, shift):
    f = compose_maps(affine(slope, shift), poly_bump([0.0, 1.0], bumps))
    f2 = compose_maps(quartic_f0(), f)
    _oracle_agrees(f2)


def test_resolution_doubling_never_loses_roots():
    rho = polynomial_example()
    for w in ["0", "01", "0012", "2100"]:
        m = rho.word_map(w)
        a = len(count_fixed_points(m, resolution=2 ** 10).points)
        b = len(count_fixed_points(m, resolution=2 ** 11).points)
        assert b >= a
