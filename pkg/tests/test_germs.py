import math
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blenderlab.germs import (CancellationError, commutator, commutator_cancel, decompose_into_flows,
                              next_order_cancel, two_flat_cancel)
from blenderlab.jets import Jet, is_flat, nonlinearity, power, schwarzian
from blenderlab.maps import identity, poly_bump

F1 = Jet.parse("1 1 0")
F2 = Jet.parse("1 -1/2 7/12")


def test_two_flat_fixture_values():
    assert (nonlinearity(F1), schwarzian(F1)) == (2, -6)
    assert (nonlinearity(F2), schwarzian(F2)) == (-1, 2)


@pytest.mark.parametrize("alpha", [Fr(0), Fr(1), Fr(-1, 3)])
def test_two_flat_cancel_exact(alpha):
    res = two_flat_cancel(F1, F2, alpha, 0)
    H = res.correction_jets[0]
    c = -H[2]
    assert H == Jet((1, -c, c * c))
    assert schwarzian(H) == 0
    a_sum = nonlinearity(power(F2, res.n)) + nonlinearity(power(H @ F1, res.m))
    assert a_sum == -alpha
    assert res.residuals["A_identity"] == 0
    assert schwarzian(F1) * res.residuals["S_expression"] > 0
    assert is_flat(res.composed, 1)
    assert nonlinearity(res.composed) == -alpha


def test_two_flat_cancel_increasing_beta():
    # larger beta pushes the S-expression further; the sign certificate persists
    prev = None
    for beta in [Fr(0), Fr(-10), Fr(-40)]:
        res = two_flat_cancel(F1, F2, 0, beta)
        assert schwarzian(F1) * res.residuals["S_expression"] > 0
        if prev is not None:
            assert res.m >= prev
        prev = res.m


def test_two_flat_cancel_nbhd_monotone():
    ms = [two_flat_cancel(F1, F2, 1, 0, nbhd=b).m for b in (1.0, 0.1, 0.01)]
    assert ms == sorted(ms)
    res = two_flat_cancel(F1, F2, 1, 0, nbhd=0.01)
    assert res.correction_jets[0].distance_from_identity() <= 0.01


def test_two_flat_cancel_float():
    res = two_flat_cancel(F1.to_float(), F2.to_float(), 0.5, 0.0)
    assert abs(res.residuals["A_identity"]) < 1e-9


def test_two_flat_cancel_preconditions():
    with pytest.raises(CancellationError):
        two_flat_cancel(F1, F1, 0, 0)  # same signs
    with pytest.raises(CancellationError):
        two_flat_cancel(F2, F1, 0, 0)  # ratio condition reversed
    with pytest.raises(CancellationError):
        two_flat_cancel(Jet.parse("2 1 0"), F2, 0, 0)  # not 1-flat


def test_two_flat_budget_exhausted():
    with pytest.raises(CancellationError):
        two_flat_cancel(F1, F2, 1, 0, nbhd=1e-9, budget=5)


def test_next_order_examples():
    G1, G2 = Jet.parse("1 0 1"), Jet.parse("1 0 -1")
    r0 = next_order_cancel(G1, G2, 0, 2)
    assert (r0.m, r0.n) == (1, 1)
    assert r0.correction_jets[0] == Jet.identity(3)
    assert r0.composed == Jet.identity(3)
    r2 = next_order_cancel(G1, G2, 2, 2)
    assert (r2.m, r2.n) == (1, 1)
    assert r2.correction_jets[0] == Jet.parse("1 0 2")
    assert r2.composed[3] == 2


@pytest.mark.parametrize("alpha", [Fr(0), Fr(2), Fr(-1), Fr(5, 7)])
def test_next_order_exact(alpha):
    res = next_order_cancel(Jet.parse("1 0 1"), Jet.parse("1 0 -1"), alpha, 2)
    assert is_flat(res.composed, 2)
    assert res.composed[3] == alpha
    assert res.residuals["coefficient_residual"] == 0


def test_next_order_higher_r():
    G1, G2 = Jet.parse("1 0 0 0 3"), Jet.parse("1 0 0 0 -1/2")
    res = next_order_cancel(G1, G2, Fr(1, 3), 4)
    assert is_flat(res.composed, 4) and res.composed[5] == Fr(1, 3)


def test_next_order_same_sign_rejected():
    with pytest.raises(CancellationError):
        next_order_cancel(Jet.parse("1 0 1"), Jet.parse("1 0 2"), 0, 2)
    with pytest.raises(CancellationError):
        next_order_cancel(Jet.parse("1 0 1"), Jet.parse("1 0 -1"), 0, 1)


def test_commutator_examples():
    assert commutator(3, 2, Fr(1, 2)) == Jet((1, 0, 0, Fr(-1, 2)))
    assert commutator(4, 1, 0) == Jet.identity(5)


@pytest.mark.parametrize("r", [3, 4, 5, 6])
@pytest.mark.parametrize("mu", [1, 2])
@pytest.mark.parametrize("t", [Fr(1, 4), Fr(1, 2)])
def test_commutator_identity(r, mu, t):
    c = commutator(r, mu, t)
    want = Jet((1,) + (0,) * (r - 1) + (-(r - 2) * mu * t * t,))
    assert c == want


def test_commutator_cancel_identities():
    ids = [Jet.identity(4)] * 4
    res = commutator_cancel(ids, -1, 3)
    assert is_flat(res.composed, 3, tol=1e-9)
    assert abs(res.composed[4] + 1) < 1e-9
    assert res.residuals["mu"] == pytest.approx(1.0 / res.n)


def test_commutator_cancel_nbhd():
    F = [Jet((1.0, 0.0, 0.0, 0.3)), Jet((1.0, 0.0, 0.0, -0.1)), Jet((1.0, 0.0, 0.0, 0.2)), Jet.identity(4, False)]
    res = commutator_cancel(F, 0.7, 3, nbhd=0.05)
    assert max(h.distance_from_identity() for h in res.correction_jets) <= 0.05
    assert abs(res.composed[4] - 0.7) < 1e-9


def test_commutator_cancel_r_below_three():
    with pytest.raises(CancellationError):
        commutator_cancel([Jet.identity(3)] * 4, 1, 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 6), st.lists(st.floats(-1, 1), min_size=4, max_size=4), st.floats(-2, 2))
def test_commutator_cancel_property(r, lead, alpha):
    F = [Jet((1.0,) + (0.0,) * (r - 1) + (a,)) for a in lead]
    res = commutator_cancel(F, alpha, r)
    assert is_flat(res.composed, r, tol=1e-9)
    assert abs(res.composed[r + 1] - alpha) < 1e-9


def test_decompose_identity():
    fp = decompose_into_flows(identity(), (0.4, 0.6))
    x = np.linspace(0.4, 0.6, 101)
    for t in (0.3, 1.0, -0.7):
        assert np.max(np.abs(fp.G(t, fp.H(t, x)) - x)) < 1e-12


def test_decompose_bump():
    F = poly_bump([0.0, 1.0], [[0.5, 0.1, 0.03]])
    fp = decompose_into_flows(F, (0.4, 0.6))
    x = np.linspace(0.4, 0.6, 1000)
    assert np.max(np.abs(fp.G(1.0, fp.H(1.0, x)) - F(x))) < 1e-8
    assert fp.support == (0.4, 0.6)
    assert np.max(np.abs(fp.G(0.3, fp.G(0.7, x)) - fp.G(1.0, x))) < 1e-10


def test_decompose_rejects_decreasing():
    class Flip:
        def deriv(self, x):
            return -np.ones_like(x)

        def __call__(self, x):
            return -np.asarray(x)

    with pytest.raises(ValueError):
        decompose_into_flows(Flip(), (0.4, 0.6))


def test_result_serializes():
    d = two_flat_cancel(F1, F2, 0, 0).to_dict()
    assert set(d) >= {"correction_jets", "m", "n", "composed", "residuals"}
    assert math.isfinite(float(Fr(d["residuals"]["A_identity"])))
