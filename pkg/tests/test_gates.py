import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cascadenet.errors import ContractError
from cascadenet.gates import (
    FailureCurve,
    effective_rate,
    eval_and,
    eval_or,
    eval_pand_numeric,
    eval_voting,
    eval_voting_curves,
    eval_wsp,
    eval_wsp_fold,
    hours,
    pand_analytic,
    wsp_spare_cdf,
)

rates = st.floats(1e-4, 0.2)
alphas = st.floats(0.0, 1.0)
T = hours()


def expo(lam):
    return FailureCurve.exponential(lam)


def symmetric_spare_cdf(lam, alpha, t):
    # closed form with primary and spare rates equal, simplified by hand
    e = np.exp(-lam * t)
    E = np.exp(-(1 + alpha) * lam * t)
    return alpha * (1 - E) / (1 + alpha) + ((1 + alpha) * (1 - e) + E - 1) / (alpha * (1 + alpha))


# --- FailureCurve -------------------------------------------------------------

def test_curve_rejects_out_of_range():
    with pytest.raises(ContractError):
        FailureCurve(np.full(24, 1.5))
    with pytest.raises(ContractError):
        FailureCurve(np.linspace(0.5, 0.1, 24))


def test_effective_rate_examples():
    assert effective_rate(expo(0.01)) == pytest.approx(0.01, rel=1e-12)
    assert effective_rate(FailureCurve.zeros()) == 0.0
    p = 1 - math.exp(-0.24)
    curve = FailureCurve(np.linspace(p / 24, p, 24))
    assert effective_rate(curve) == pytest.approx(0.01, rel=1e-12)
    # saturated curves hit the cap instead of infinity
    assert math.isfinite(effective_rate(FailureCurve.ones()))


# --- AND / OR ---------------------------------------------------------------

def test_and_value():
    assert eval_and(expo(0.003), expo(0.007)).final == pytest.approx(0.010743, abs=5e-6)


def test_or_value():
    assert eval_or(expo(0.003), expo(0.007)).final == pytest.approx(1 - math.exp(-0.24), abs=1e-12)


def test_and_or_absorbing():
    a = expo(0.02)
    assert np.all(eval_and(a, FailureCurve.zeros()).probs == 0)
    assert np.all(eval_or(a, FailureCurve.ones()).probs == 1)


def test_mismatched_horizon():
    with pytest.raises(ContractError):
        eval_and(FailureCurve.exponential(0.01, 24), FailureCurve.exponential(0.01, 12))


@given(rates, rates, rates)
def test_and_or_commutative_associative(a, b, c):
    A, B, C = expo(a), expo(b), expo(c)
    for op in (eval_and, eval_or):
        assert op(A, B).allclose(op(B, A))
        assert op(op(A, B), C).allclose(op(A, op(B, C)))


# --- WSP --------------------------------------------------------------------

def test_wsp_value():
    assert eval_wsp(0.005, 0.008, 0.5).final == pytest.approx(0.0109016, abs=1e-7)
    assert wsp_spare_cdf(0.005, 0.008, 0.5, 24.0) == pytest.approx(0.0964069, abs=1e-7)


def test_wsp_full_dormancy_is_and():
    got = eval_wsp(0.01, 0.01, 1.0).probs
    want = eval_and(expo(0.01), expo(0.01)).probs
    assert np.max(np.abs(got - want)) <= 1e-12


@pytest.mark.parametrize("lam", [0.002, 0.005, 0.01, 0.05])
@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.8, 1.0])
def test_wsp_equal_rates_match_symmetric_form(lam, alpha):
    got = wsp_spare_cdf(lam, lam, alpha, T)
    assert np.max(np.abs(got - symmetric_spare_cdf(lam, alpha, T))) <= 1e-12


@pytest.mark.parametrize("lb,alpha", [(0.01, 0.5), (0.009, 0.3), (0.02, 0.75)])
def test_wsp_singular_limit_is_continuous(lb, alpha):
    la = (1 - alpha) * lb
    limit = wsp_spare_cdf(la, lb, alpha, T)
    for off in (1e-7, -1e-7):
        near = wsp_spare_cdf(la - off, lb, alpha, T)
        assert np.max(np.abs(near - limit)) < 1e-6


def test_wsp_singular_value():
    assert wsp_spare_cdf(0.005, 0.01, 0.5, 24.0) == pytest.approx(0.1189768, abs=1e-7)


@settings(max_examples=60)
@given(rates, rates)
def test_wsp_monotone_in_dormancy(la, lb):
    grid = np.linspace(0, 1, 11)
    curves = np.array([eval_wsp(la, lb, a).probs for a in grid])
    assert np.all(np.diff(curves, axis=0) >= -1e-12)


@given(rates, rates, alphas)
def test_wsp_is_valid_curve(la, lb, alpha):
    c = eval_wsp(la, lb, alpha)
    assert np.all((c.probs >= 0) & (c.probs <= 1))
    assert np.all(np.diff(c.probs) >= -1e-12)


def test_wsp_errors():
    with pytest.raises(ContractError):
        eval_wsp(0.0, 0.01)
    with pytest.raises(ContractError):
        eval_wsp(0.01, 0.01, 1.5)


def test_wsp_fold_single_and_pair():
    a, b = expo(0.005), expo(0.008)
    assert eval_wsp_fold([a]) is a
    assert eval_wsp_fold([a, b], 0.5).allclose(eval_wsp(0.005, 0.008, 0.5), atol=1e-12)


def test_wsp_fold_zero_rate_collapses():
    out = eval_wsp_fold([expo(0.01), FailureCurve.zeros()], 0.5)
    assert np.all(out.probs == 0)


# --- PAND -------------------------------------------------------------------

def test_pand_value():
    assert eval_pand_numeric(0.003, 0.007).final == pytest.approx(0.005285, abs=1e-5)
    assert pand_analytic(0.003, 0.007, 24.0) == pytest.approx(0.0052857, abs=1e-7)


def test_pand_numeric_converges():
    exact = pand_analytic(0.02, 0.05, T)
    errs = [np.max(np.abs(eval_pand_numeric(0.02, 0.05, steps=s).probs - exact))
            for s in (10, 100, 1000, 10000)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= 1e-4


def test_pand_vanishing_first_input():
    assert eval_pand_numeric(1e-12, 0.01).final < 1e-10


def test_pand_zero_steps():
    with pytest.raises(ContractError):
        eval_pand_numeric(0.01, 0.01, steps=0)


# --- VOTING -----------------------------------------------------------------

def test_voting_examples():
    assert eval_voting([0.5, 0.5, 0.5], 2) == pytest.approx(0.5, abs=1e-15)
    assert eval_voting([1.0, 0.2], 1) == 1.0
    with pytest.raises(ContractError):
        eval_voting([0.1, 0.2], 3)


def brute_force_voting(p, k):
    total = 0.0
    for mask in range(1 << len(p)):
        bits = [(mask >> i) & 1 for i in range(len(p))]
        if sum(bits) >= k:
            total += np.prod([q if b else 1 - q for q, b in zip(p, bits)])
    return total


@given(st.lists(st.floats(0, 1), min_size=1, max_size=7), st.data())
def test_voting_matches_enumeration(p, data):
    k = data.draw(st.integers(1, len(p)))
    assert eval_voting(p, k) == pytest.approx(brute_force_voting(p, k), abs=1e-12)


@given(st.lists(rates, min_size=2, max_size=5))
def test_voting_extremes_are_or_and(rs):
    curves = [expo(r) for r in rs]
    or_fold, and_fold = curves[0], curves[0]
    for c in curves[1:]:
        or_fold, and_fold = eval_or(or_fold, c), eval_and(and_fold, c)
    assert eval_voting_curves(curves, 1).allclose(or_fold, atol=1e-12)
    assert eval_voting_curves(curves, len(curves)).allclose(and_fold, atol=1e-12)
