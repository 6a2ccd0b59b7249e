import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsgauss import cantor as C
from nsgauss.rng import substream

EX = C.PSequence.example83()
P0 = C.PSequence.const(0.0)
P1 = C.PSequence.const(1.0)

p_lists = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=14)


# -- r-terms ---------------------------------------------------------------------


def test_r_terms_trivial_sequences():
    assert np.all(C.r_terms(P1, 50) == 0.0)
    r = C.r_terms(P0, 50)
    assert r[0] == 9.0 and np.all(r[1:] == 0.0)
    assert C.r_term(P0, 1) == 9.0


def test_r_terms_example_squares():
    r = C.r_terms(EX, 400)
    for n in range(1, 21):
        m = n * n
        assert r[m - 1] == pytest.approx(9.0 / n * EX.one_minus(m), rel=1e-12)
    squares = {n * n for n in range(1, 21)}
    assert all(r[m - 1] == 0.0 for m in range(1, 401) if m not in squares)


def test_r_terms_half_is_geometric():
    p = C.PSequence.const(0.5)
    r = C.r_terms(p, 30)
    for m in range(1, 31):
        assert r[m - 1] == pytest.approx(9.0**m * 2.0 ** -(m - 1) / 2, rel=1e-12)


def test_r_terms_large_index_stays_finite():
    lr = C.log_r_terms(C.PSequence.const(0.2), 2000)
    assert np.all(np.isfinite(lr))


# -- certificates ----------------------------------------------------------------


def test_coboundary_reports():
    rep = C.coboundary_report(P0, 100)
    assert rep.rows[-1][2] == 9.0 and rep.verdict == C.HOLDS
    rep = C.coboundary_report(P1, 100)
    assert rep.rows[-1][2] == 0.0 and rep.verdict == C.HOLDS


def test_coboundary_example_is_harmonic():
    rep = C.coboundary_report(EX, 900)
    s = rep.column("partial_sum")
    for K in (5, 10, 30):
        HK = math.fsum(1.0 / k for k in range(1, K + 1))
        assert s[K * K - 1] == pytest.approx(9 * HK, rel=1e-3)
    assert rep.verdict == C.FAILS


def test_coboundary_geometric_model():
    assert C.coboundary_report(C.PSequence.const(0.1), 50).verdict == C.HOLDS
    assert C.coboundary_report(C.PSequence.const(0.2), 50).verdict == C.FAILS
    assert C.coboundary_report(C.PSequence.from_callable(lambda n: 0.3), 50).verdict == C.UNDETERMINED


def test_condition_ratio_example():
    rep = C.condition_ratio(EX, 0.5, 900)
    byn = {r[0]: r for r in rep.rows}
    mins = [byn[k * k][3] for k in range(1, 31)]
    assert all(b < a for a, b in zip(mins, mins[1:]))
    for K in (10, 20, 30):
        HK = math.fsum(1.0 / k for k in range(1, K + 1))
        assert byn[K * K][2] == pytest.approx(9 * HK / K, rel=1e-3)
    assert mins[-1] < 3.0 and rep.verdict == C.HOLDS


def test_condition_ratio_half_fails():
    rep = C.condition_ratio(C.PSequence.const(0.5), 0.5, 200)
    assert rep.verdict == C.FAILS
    assert rep.column("ratio")[-1] > 1e100


def test_condition_ratio_trivial_undetermined():
    rep = C.condition_ratio(P1, 0.5, 200)
    assert rep.verdict == C.UNDETERMINED and not rep.rows


def test_near_one_window():
    assert C.near_one_window(P1, 0.3, 4, 100) == 1
    assert C.near_one_window(P0, 0.3, 4, 100) is None
    # between the squares 4 and 9 the run 5..8 is the first of length 4
    assert C.near_one_window(EX, 0.5, 3, 100) == 5
    # 10..15 is one short for k = 6; 17..24 is long enough
    assert C.near_one_window(EX, 0.5, 6, 100) == 17


# -- correlations ----------------------------------------------------------------


def test_correlation_trivial():
    assert C.correlation(EX, 0, 1) == (1.0, 0.0)
    for a in (1, 5, 81, 1000):
        assert C.correlation(P1, a, 20)[0] == 1.0


def test_correlation_p0_a1_product():
    direct = math.prod(math.cos(2 * math.pi * 3.0**-m) for m in range(1, 40))
    val, tail = C.correlation(P0, 1, 40)
    assert val == pytest.approx(direct, abs=1e-15)
    assert val == pytest.approx(-0.371437, abs=1e-6)
    assert tail < 1e-30


def test_correlation_refuses_short_products():
    with pytest.raises(ValueError):
        C.correlation(P0, 3**10, 8)


@pytest.mark.parametrize("a", [1, 3, 9, 27])
def test_correlation_vs_mc_example(a):
    val, tail = C.correlation(EX, a, 40)
    est = C.correlation_mc(EX, a, 10**6, 100 + a)
    assert est.within(val, 3.0, tail)


def test_correlation_vs_mc_random_sequences():
    """60 seeded checks at 3 sigma each: a couple of chance misses are expected,
    so at most 2 may exceed 3 sigma and none may exceed 4.5 sigma."""
    rng = substream(21, 0)
    misses = 0
    for i in range(20):
        p = C.PSequence.from_list(rng.uniform(0, 1, 12), float(rng.uniform(0, 1)))
        for a in (int(v) for v in rng.integers(-100, 101, 3)):
            val, tail = C.correlation(p, a, 40)
            est = C.correlation_mc(p, a, 50_000, 1000 * i + a + 200)
            misses += not est.within(val, 3.0, tail)
            assert est.within(val, 4.5, tail), (i, a)
    assert misses <= 2


@settings(max_examples=60, deadline=None)
@given(p_lists, st.integers(-300, 300), st.integers(2, 9))
def test_correlation_shift_identity(vals, a, level):
    """``corr_p(3a)`` equals ``corr_{shifted p}(a)``: the first digit drops out."""
    p = C.PSequence.from_list(vals, 0.5)
    lhs = C.truncate_to_spectral(p, level).correlation(3 * a)
    rhs = C.truncate_to_spectral(p.shifted(1), level - 1).correlation(a)
    assert abs(lhs - rhs) < 1e-12
    full = C.correlation(p, 3 * a, 45)[0] - C.correlation(p.shifted(1), a, 45)[0]
    assert abs(full) < 1e-12


# -- spectral truncation ---------------------------------------------------------


def test_truncation_level_one():
    q = 0.3
    at = C.truncate_to_spectral(C.PSequence.const(q), 1)
    assert list(at.t) == [0.0, pytest.approx(1 / 3)]
    assert at.w[0] == pytest.approx(q) and at.w[1] == pytest.approx((1 - q) / 2)


def test_truncation_level_two_p0():
    at = C.truncate_to_spectral(P0, 2)
    assert sorted(at.t.tolist()) == pytest.approx([2 / 9, 4 / 9])
    assert np.allclose(at.w, 0.25)


@settings(max_examples=60, deadline=None)
@given(p_lists, st.integers(0, 10))
def test_truncation_mass(vals, level):
    at = C.truncate_to_spectral(C.PSequence.from_list(vals, 0.4), level)
    assert abs(C.SpectralAtomSet.total_mass(at.t, at.w) - 1.0) <= 1e-12


def test_truncation_correlation_matches_product():
    p = C.PSequence.from_list([0.1, 0.7, 0.3, 0.0, 0.9], 1.0)
    at = C.truncate_to_spectral(p, 5)
    for a in (1, 2, 7, 40, 242):
        assert at.correlation(a) == pytest.approx(C.correlation(p, a, 30)[0], abs=1e-12)


# -- cocycle norms ---------------------------------------------------------------


def test_cocycle_norm_trivial_elements():
    z = C.cocycle_norm(EX, 0, 6, 1000, 1)
    assert z.truncated == 0.0 and z.mc.value == 0.0 and z.bracket == (0.0, 0.0)
    one = C.cocycle_norm(C.PSequence.const(0.4), 1, 6, 1000, 1)
    assert one.truncated == 1.0 and one.mc.value == 1.0


def test_cocycle_norm_p0_a3():
    cn = C.cocycle_norm(P0, 3, 10, 10**6, 5)
    assert cn.mc_agrees(3.0)
    assert cn.in_bracket(cn.truncated)
    assert cn.in_bracket(cn.mc.value, 3 * cn.mc.stderr)


def test_cocycle_norm_bracket_omitted_for_large_a():
    cn = C.cocycle_norm(P0, 2 * 3**4 + 1, 4, 100, 1)
    assert cn.bracket is None and cn.notes


@settings(max_examples=40, deadline=None)
@given(p_lists, st.integers(-200, 200), st.integers(5, 10))
def test_truncated_norm_in_bracket(vals, a, level):
    p = C.PSequence.from_list(vals, 0.3)
    cn = C.cocycle_norm(p, a, level, 2, 1)
    if cn.bracket is not None:
        assert cn.in_bracket(cn.truncated, 1e-12 * max(1.0, cn.truncated))


@settings(max_examples=40, deadline=None)
@given(p_lists, st.floats(0.05, 0.95), st.integers(0, 2**32 - 1))
def test_delta_bound(vals, delta, seed):
    p = C.PSequence.from_list(vals, 0.2)
    level = 9
    at = C.truncate_to_spectral(p, level)
    r = C.r_terms(p, level)
    rng = substream(seed, 0)
    for n in range(1, 7):
        if p.value(n) > 1 - delta:
            continue
        bound = 4.0 / delta * math.fsum(r[:n])
        amax = 2 * 3**n
        for a in {1, amax, *(int(v) for v in rng.integers(-amax, amax + 1, 10))}:
            assert at.cocycle_norm_sq(a) <= bound + 1e-9


def test_delta_estimate_first_admissible():
    est = C.delta_estimate(P0, 5, 0.5)
    assert est == pytest.approx(4 / 0.5 * 9.0)
    assert C.delta_estimate(P1, 5, 0.5) is None


def test_pseq_validation():
    with pytest.raises(ValueError):
        C.PSequence.const(1.5)
    with pytest.raises(ValueError):
        C.PSequence.from_config({"rule": "nope"})
    assert C.PSequence.from_config({"rule": "list", "values": [0.2], "tail": 0.0}).value(2) == 0.0
