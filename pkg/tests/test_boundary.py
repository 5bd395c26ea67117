"""Boundary-law solvers and the three verification oracles."""
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from sosgibbs.boundary import (
    InvalidParameters, Params, PeriodicBoundaryLaw, Tolerances, ab_residual,
    critical_tau, enumerate_laws, extend_periodic, fixed_point_residual,
    full_symmetric_polynomial, mp, norm_identity_residual, recursion_residual,
    series_sums, solve_asymmetric, solve_symmetric, symmetric_polynomial,
)
from oracles import asymmetric_pairs_common_value, asymmetric_pairs_k2, symmetric_roots_k2

GOLD = (3 + math.sqrt(5)) / 2
K2_TAU8 = Params.from_tau(2, 8)

ks = st.integers(2, 12)
taus = st.floats(2.05, 20.0)


# -- parameters and laws ---------------------------------------------------

def test_params_roundtrip():
    p = Params.from_theta(3, 0.25)
    assert abs(p.tau - 4.25) < 1e-30
    q = Params.from_tau(3, p.tau)
    assert abs(q.theta - 0.25) < 1e-30
    assert abs(K2_TAU8.theta - (4 - mp.sqrt(15))) < 1e-30


@pytest.mark.parametrize("k, theta", [(1, 0.5), (2, 1.0), (2, 0.0), (2, -0.3), (2, 1.5)])
def test_params_rejects(k, theta):
    with pytest.raises(InvalidParameters):
        Params.from_theta(k, theta)


def test_params_rejects_small_tau():
    with pytest.raises(InvalidParameters):
        Params.from_tau(2, 2.0)


def test_from_coupling():
    p = Params.from_coupling(2, -1.0, 0.5)
    assert abs(p.theta - math.exp(-0.5)) < 1e-15


@pytest.mark.parametrize("a, b, family", [
    (1, 1, "trivial"), (2.618034, 2.618034, "symmetric"), (6.5685373, 0.2598899, "asymmetric"),
])
def test_family(a, b, family):
    assert extend_periodic(a, b).family == family


@pytest.mark.parametrize("a, b", [(0, 1), (1, -2)])
def test_law_rejects_nonpositive(a, b):
    with pytest.raises(ValueError):
        extend_periodic(a, b)


def test_u_sequence():
    law = extend_periodic(3, 5)
    assert [float(law.u(n)) for n in range(-4, 5)] == [1, 5, 1, 3, 1, 5, 1, 3, 1]
    assert law.swapped().a == law.b


def test_validity_flag():
    assert extend_periodic(1, 1).is_valid(K2_TAU8)
    assert not extend_periodic(5, 5).is_valid(K2_TAU8)


# -- symmetric family -------------------------------------------------------

@pytest.mark.parametrize("k, tau, coeffs", [(2, 8, (2, -6, 2)), (3, 4, (2, -2, -2, 2))])
def test_symmetric_polynomial_coefficients(k, tau, coeffs):
    Q = symmetric_polynomial(Params.from_tau(k, tau))
    assert tuple(float(c) for c in Q.coeffs) == coeffs


@given(ks, taus)
def test_q_at_one(k, tau):
    Q = symmetric_polynomial(Params.from_tau(k, tau))
    assert Q.is_palindromic()
    assert math.isclose(Q(1.0), 4 + (2 - tau) * (k - 1), rel_tol=1e-12, abs_tol=1e-12)
    assert full_symmetric_polynomial(Params.from_tau(k, tau))(1.0) == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("tau", [2.5, 5, 5.9, 6.1, 8, 12, 30])
def test_symmetric_roots_k2_match_quadratic_formula(tau):
    got = [float(r.value) for r in solve_symmetric(Params.from_tau(2, tau))]
    assert got == pytest.approx(symmetric_roots_k2(tau), abs=1e-10)


def test_symmetric_k2_tau8_exact():
    got = [r.value for r in solve_symmetric(K2_TAU8)]
    want = [(3 - mp.sqrt(5)) / 2, 1, (3 + mp.sqrt(5)) / 2]
    assert all(abs(g - w) < 1e-30 for g, w in zip(got, want))


@pytest.mark.parametrize("k", [2, 3, 4, 5, 9])
def test_critical_point_is_a_triple_root_at_one(k):
    roots = solve_symmetric(Params.from_tau(k, 2 + 4 / (k - 1)))
    assert [(float(r.value), r.multiplicity) for r in roots] == [(1.0, 3)]


@given(ks, taus)
@settings(max_examples=80, deadline=None)
def test_symmetric_roots_reciprocal_and_descartes(k, tau):
    p = Params.from_tau(k, tau)
    roots = solve_symmetric(p)
    values = [r.value for r in roots]
    assert any(v == 1 for v in values)
    nontrivial = [v for v in values if v != 1]
    assert len(nontrivial) in (0, 2)
    for v in nontrivial:
        assert min(abs(w - 1 / v) for w in values) < 1e-9
    assert values == sorted(values)
    Q = full_symmetric_polynomial(p)
    for v in values:
        assert abs(Q.monic_residual(v)) < 1e-12
    # count matches the side of the critical point
    tc = 2 + 4 / (k - 1)
    if abs(tau - tc) > 1e-6:
        assert len(values) == (3 if tau > tc else 1)


# -- critical curve ---------------------------------------------------------

@pytest.mark.parametrize("k, tc", [(2, 6), (3, 4), (5, 3)])
def test_critical_tau_examples(k, tc):
    assert abs(critical_tau(k) - tc) < 1e-9


def test_critical_tau_decreasing():
    vals = [critical_tau(k) for k in range(2, 11)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_critical_tau_rejects_k1():
    with pytest.raises(InvalidParameters):
        critical_tau(1)


# -- asymmetric family ------------------------------------------------------

@pytest.mark.parametrize("tau", [2.5, 3, 3.99, 4.01, 5, 6, 8, 12, 40])
def test_asymmetric_k2_matches_s_elimination(tau):
    got = [(float(a), float(b)) for a, b in solve_asymmetric(Params.from_tau(2, tau))]
    want = asymmetric_pairs_k2(tau)
    assert len(got) == len(want)
    assert np.allclose(got, want, atol=1e-10, rtol=0)


def test_asymmetric_k2_tau8_listed_values():
    got = {(round(float(a), 7), round(float(b), 7)) for a, b in solve_asymmetric(K2_TAU8)}
    assert got == {(6.5685356, 0.2598915), (0.2598915, 6.5685356),
                   (0.8099572, 0.3616157), (0.3616157, 0.8099572)}


def test_k2_tau5_single_pair():
    got = solve_asymmetric(Params.from_tau(2, 5))
    assert len(got) == 2
    a, b = max(got)
    assert (float(a), float(b)) == pytest.approx((3.1601, 0.4580), abs=1e-4)


def test_no_spurious_pairs_at_bifurcation():
    # the pairs branch off the trivial law at tau = 2k/(k-1)
    assert solve_asymmetric(Params.from_tau(2, 4)) == []
    assert len(solve_asymmetric(Params.from_tau(2, 4 + 1e-9))) == 2


@pytest.mark.parametrize("k, tau", [(3, 3.5), (3, 7), (4, 5), (5, 12), (7, 9)])
def test_asymmetric_general_k_matches_common_value_oracle(k, tau):
    got = [(float(a), float(b)) for a, b in solve_asymmetric(Params.from_tau(k, tau))]
    want = asymmetric_pairs_common_value(k, tau, n=4000)
    assert len(got) == len(want)
    assert np.allclose(got, want, rtol=1e-8, atol=1e-10)


@given(ks, taus)
@settings(max_examples=25, deadline=None)
def test_asymmetric_properties(k, tau):
    p = Params.from_tau(k, tau)
    pairs = solve_asymmetric(p)
    assert set(pairs) == {(b, a) for a, b in pairs}
    for a, b in pairs:
        assert a != b and a > 0 and b > 0
        assert max(abs(r) for r in ab_residual(a, b, p)) < 1e-10
        law = extend_periodic(a, b)
        assert law.is_valid(p)
        assert recursion_residual(law, p) < 1e-9
        assert fixed_point_residual(law, p) < 1e-9


# -- oracles ----------------------------------------------------------------

@given(ks, taus, st.integers(4, 200))
@settings(max_examples=30)
def test_trivial_law_recursion_exact(k, tau, N):
    assert recursion_residual(extend_periodic(1, 1), Params.from_tau(k, tau), N) == 0


def test_recursion_examples():
    law = extend_periodic(GOLD, GOLD)
    assert recursion_residual(law, K2_TAU8, 100) < 1e-9
    assert recursion_residual(extend_periodic(2.628034, 2.618034), K2_TAU8, 8) > 1e-4
    with pytest.raises(ValueError):
        recursion_residual(law, K2_TAU8, 3)


@given(ks, taus, st.floats(0.05, 5), st.floats(0.05, 5))
@settings(max_examples=60)
def test_recursion_residual_vanishes_iff_ab_holds(k, tau, a, b):
    p = Params.from_tau(k, tau)
    law = extend_periodic(a, b)
    ab = max(abs(r) for r in ab_residual(law.a, law.b, p))
    rec = recursion_residual(law, p)
    # the one-step defects at odd sites are exactly the two equations
    assert rec == pytest.approx(float(ab), rel=1e-14, abs=1e-30)


def test_series_examples():
    s = series_sums(extend_periodic(1, 1), Params.from_theta(2, 0.5))
    assert abs(s.l0 - 1) < 1e-30 and abs(s.r0 - 1) < 1e-30
    s = series_sums(extend_periodic(GOLD, GOLD), K2_TAU8)
    assert float(s.l0) == pytest.approx(0.901258, abs=1e-6)
    assert s.l0 == s.r0


@given(ks, st.floats(0.05, 0.95), st.floats(0.1, 4), st.floats(0.1, 4))
@settings(max_examples=40, deadline=None)
def test_series_swap_and_direct_sum(k, theta, a, b):
    p = Params.from_theta(k, theta)
    s = series_sums(extend_periodic(a, b), p)
    t = series_sums(extend_periodic(b, a), p)
    assert s.l0 == t.r0 and s.r0 == t.l0
    assert s.direct_gap < 1e-12


def test_identity_examples():
    res = norm_identity_residual(extend_periodic(1, 1), Params.from_theta(2, 0.5))
    assert res.ok and abs(res.lhs - 3) < 1e-12 and res.residual < 1e-12
    res = norm_identity_residual(extend_periodic(GOLD, GOLD), K2_TAU8)
    closed = 2 * mp.sqrt(15) / (5 - mp.sqrt(5))
    assert abs(res.lhs - closed) < 1e-10 and abs(res.rhs - closed) < 1e-10
    assert res.residual < 1e-10
    assert norm_identity_residual(extend_periodic(5, 5), K2_TAU8).status == "sign_contradiction"
    assert norm_identity_residual(extend_periodic(4, 4), K2_TAU8).status == "singular"


def test_fixed_point_examples():
    assert fixed_point_residual(extend_periodic(1, 1), Params.from_theta(3, 0.3)) < 1e-12
    assert fixed_point_residual(extend_periodic(GOLD, GOLD), K2_TAU8) < 1e-10
    assert fixed_point_residual(extend_periodic(3.0, 3.0), K2_TAU8) > 1e-3


def test_fixed_point_against_direct_bi_infinite_sum():
    # brute-force the sums over |j| <= 400 in plain floats
    a, b = 0.8099572022, 0.3616156730
    p = K2_TAU8
    th, k = float(p.theta), p.k
    js = np.arange(-400, 401)
    z = np.where(js % 2 == 0, 1.0, np.where(js % 4 == 1, b, a)) ** k
    den = 1 + np.sum(th ** np.abs(js[js != 0]) * z[js != 0])
    worst = 0.0
    for i in (-2, -1, 1, 2):
        m = js != 0
        num = th ** abs(i) + np.sum(th ** np.abs(i - js[m]) * z[m])
        worst = max(worst, abs(z[js == i][0] - (num / den) ** k))
    assert worst < 1e-8
    assert fixed_point_residual(extend_periodic(a, b), p) < 1e-8


# -- enumeration ------------------------------------------------------------

def test_enumerate_k2_tau8():
    recs = enumerate_laws(K2_TAU8)
    assert len(recs) == 7
    assert [r.law.family for r in recs[:3]] == ["symmetric", "trivial", "symmetric"]
    assert all(r.valid for r in recs)
    assert all(Tolerances().passes(r.residuals) for r in recs)


def test_enumerate_below_critical():
    recs = enumerate_laws(Params.from_tau(2, 3))
    assert len(recs) == 1 and recs[0].law.family == "trivial"


def test_enumerate_critical_multiplicity():
    recs = enumerate_laws(Params.from_tau(3, 4))
    trivial = [r for r in recs if r.law.family == "trivial"]
    assert trivial[0].multiplicity == 3
    assert all(r.law.family != "symmetric" for r in recs)


def test_extreme_branch_needs_extended_precision():
    # a^k ~ 2e5 against a + b - tau ~ -6e-4: double rounding of (a, b) alone breaks 1e-10
    p = Params.from_tau(5, 12)
    recs = [r for r in enumerate_laws(p) if r.law.family == "asymmetric"]
    big = max(recs, key=lambda r: max(r.law.a, r.law.b))
    assert big.residuals.norm_identity < 1e-10
    rounded = extend_periodic(float(big.law.a), float(big.law.b))
    assert norm_identity_residual(rounded, p).residual > 1e-10
