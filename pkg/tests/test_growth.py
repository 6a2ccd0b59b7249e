import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsgauss import growth as Gr

F2 = Gr.FreeGroupModel(2)


def test_ball_sizes():
    assert Gr.ball_size(F2, 0) == 1
    assert Gr.ball_size(F2, 1) == 5
    assert Gr.ball_size(F2, 3) == 1 + 4 + 12 + 36


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.integers(0, 60))
def test_ball_increments_exact(n, r):
    m = Gr.FreeGroupModel(n)
    assert Gr.ball_size(m, r + 1) - Gr.ball_size(m, r) == 2 * n * (2 * n - 1) ** r


def test_poincare_tree():
    est = Gr.poincare_exponent(Gr.tree_profile(F2, 12))
    assert abs(est.estimate - math.log(3)) < 1e-6
    assert est.crude < est.estimate + 0.2


@pytest.mark.parametrize("delta", [0.1, 1.0, 2.0])
def test_poincare_synthetic_exponential(delta):
    s = [0.5 * k for k in range(40)]
    prof = Gr.GrowthProfile(s, [math.exp(delta * v) for v in s])
    assert abs(Gr.poincare_exponent(prof).estimate - delta) < 1e-6


def test_poincare_polynomial_tends_to_zero():
    s = [2.0**k for k in range(4, 30)]
    prof = Gr.GrowthProfile(s, [v**3 for v in s])
    assert Gr.poincare_exponent(prof).estimate < 1e-5


def test_profile_csv_roundtrip(tmp_path):
    prof = Gr.tree_profile(Gr.FreeGroupModel(3), 6)
    prof.to_csv(tmp_path / "p.csv")
    back = Gr.GrowthProfile.from_csv(tmp_path / "p.csv")
    assert back == prof


def test_profile_validation():
    with pytest.raises(ValueError):
        Gr.GrowthProfile([0, 1], [3, 2])
    with pytest.raises(ValueError):
        Gr.GrowthProfile([1, 0], [1, 2])


def test_tdiss_windows():
    w0 = Gr.tdiss_window(0.0)
    assert (w0.lo, w0.hi) == (0.0, 0.0)
    wh = Gr.tdiss_window(0.5)
    assert (wh.lo, wh.hi) == pytest.approx((1.0, 2.0))
    w = Gr.tdiss_window(math.log(3), tree=True, free_group=True)
    assert abs(w.lo - 1.4823) < 1e-4 and abs(w.hi - 2.9646) < 1e-4
    assert w.tree_exact == w.hi
    assert w.strong_erg_bound == pytest.approx(2 * math.sqrt(math.log(3)))


def test_koopman_flip():
    assert Gr.koopman_l2_report(F2, 2.0, 40).verdict == "diverges"
    conv = Gr.koopman_l2_report(F2, 2.2, 40)
    assert conv.verdict == "converges" and conv.shell_ratio < 1
    ps = conv.partial_sums
    assert abs(ps[-1] - ps[-2]) < 1e-2 * ps[-1]
    assert Gr.koopman_l2_report(F2, 0.0, 10).verdict == "diverges"


def test_koopman_on_profile_matches_model():
    prof = Gr.tree_profile(F2, 30)
    assert Gr.koopman_l2_report(prof, 2.2, 30).verdict == "converges"
    assert Gr.koopman_l2_report(prof, 2.0, 30).verdict == "diverges"


def test_radial_walk_first_step():
    for n in (2, 3, 4):
        w = Gr.radial_entropy_drift(Gr.FreeGroupModel(n), 3)
        assert float(w.entropy[0]) == pytest.approx(math.log(2 * n), abs=1e-15)
        assert float(w.drift[0]) == 1.0


def test_radial_walk_limits():
    w = Gr.radial_entropy_drift(F2, 400)
    assert abs(float(w.entropy_rate[-1]) - 0.54931) <= 0.03
    assert abs(float(w.drift_rate[-1]) - 0.5) <= 0.01
    assert w.row_sum_error < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_entropy_rate_decreasing(n):
    w = Gr.radial_entropy_drift(Gr.FreeGroupModel(n), 400)
    rate = np.asarray(w.entropy_rate[1:], dtype=float)     # k >= 2
    assert np.all(np.diff(rate) <= 1e-9)


def test_radial_walk_step_limits():
    with pytest.raises(ValueError):
        Gr.radial_entropy_drift(F2, 0)
    with pytest.raises(ValueError):
        Gr.radial_entropy_drift(F2, Gr.MAX_STEPS + 1)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_guivarch_equality_on_trees(n):
    g = Gr.guivarch_check(Gr.FreeGroupModel(n), 400)
    assert g.holds(1e-9)
    h_exact = (1 - 1 / n) * math.log(2 * n - 1)
    assert abs(g.h_est - h_exact) < 0.05
    assert abs(g.slack) < 0.05


def test_guivarch_degenerate_point_model():
    g = Gr.guivarch_check(Gr.PointModel(), 10, drift_override=0.0)
    assert g.h_est == 0.0 and g.slack == 0.0 and g.holds()


def test_skew_delta_on_z():
    ss = [2.0**j for j in range(1, 21)]
    d1, v1 = Gr.skew_delta(Gr.z_profile("linear", ss))
    d2, v2 = Gr.skew_delta(Gr.z_profile("sqrt", ss))
    assert v1 == "boundary" and abs(d1 - 1) < 1e-3
    assert v2 == "conservative" and abs(d2 - 2) < 0.05


def test_tower_is_dissipative():
    tw = Gr.locally_finite_cocycle([2**k for k in range(9)], 8)
    assert tw.checks["lower_bound_holds"]
    assert float(tw.norms[0]) ** 2 == pytest.approx(float(tw.alpha[0]) ** 2 * 2 * 1)
    assert float(tw.norms[0]) >= 2                     # lambda(K_1)^1
    assert tw.profile.s[0] == 0.0 and tw.profile.counts[0] == 1   # c(e) = 0
    d, v = Gr.skew_delta(tw.profile)
    assert d < 0.2 and v == "dissipative"


def test_tower_rejects_bad_chain():
    with pytest.raises(ValueError):
        Gr.locally_finite_cocycle([1, 2, 3], 2)


def test_edge_indicator_validation():
    ev = Gr.edge_indicator_validation(2, 4)
    assert ev["norm_identity"] and ev["cocycle_identity"]
    assert ev["elements"] == ev["expected_elements"] == 161


def test_reduce_word():
    # generators are +-1, +-2; a letter next to its inverse cancels
    assert Gr.reduce_word((1, -1, 2)) == (2,)
    assert Gr.reduce_word((1, 2, -2, -1)) == ()
