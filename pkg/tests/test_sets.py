import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from concop.sets import (
    IntervalSet,
    Thinness,
    ball_estimate_sup,
    comb_family,
    comb_set,
    empty_family,
    eta,
    family_E1,
    family_E2,
    from_intervals,
    full_line_family,
    intersect_ball,
    is_eps_thin,
    measure,
    rho,
    scale_set,
    sup_ratio,
    tail,
    thin_profile,
    thinness_ratio,
    truncate,
)

# frozen values (see notes in each test)
E1_WINDOW_110 = 2.0 + 2.0 * sum(1.0 / n**2 for n in range(2, 11))  # 3.0995354623330815
E2_THETA_10 = 0.43672711888396504
E2_THETA_100 = 0.21716423868362095


def brute_sup(S, a, b, n=200001):
    x = np.linspace(a, b, n)
    vals = np.maximum(thinness_ratio(S, x), thinness_ratio(S, -x))
    return float(vals.max())


# -- interval algebra --------------------------------------------------------


def test_canonical_form_merges_and_sorts():
    S = IntervalSet([(2, 4), (0, 1), (0.5, 1.5), (4, 5)])
    assert S.to_list() == [[0.0, 1.5], [2.0, 5.0]]
    assert measure(S) == 4.5


def test_empty_and_degenerate():
    assert measure(IntervalSet()) == 0.0
    assert not IntervalSet()
    assert measure(IntervalSet([(1, 1)])) == 0.0


def test_intersect_ball_exact():
    S = IntervalSet([(0, 1), (2, 4)])
    assert intersect_ball(S, 1.5, 1.0) == pytest.approx(1.0)
    assert intersect_ball(S, 3.0, 1.0) == pytest.approx(2.0)
    assert intersect_ball(S, 10.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        intersect_ball(S, 0.0, 0.0)


def test_complement_and_difference():
    S = IntervalSet([(0, 1), (2, 3)])
    C = S.complement()
    assert measure(C.clip(-5, 5)) == pytest.approx(8.0)
    assert measure(S.difference(IntervalSet([(0.5, 2.5)]))) == pytest.approx(1.0)


def test_rho():
    assert rho(0.3) == 1.0
    assert rho(-4.0) == 0.25
    np.testing.assert_array_equal(rho([1.0, 2.0]), [1.0, 0.5])


# -- thinness ratio ------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4])
def test_E1_ratio_is_one_on_centres(n):
    S = family_E1().window(100.0)
    assert thinness_ratio(S, float(n * n)) == 1.0


def test_E1_window_measure():
    # sum of ball lengths 2 rho(n^2) with n^2 + rho(n^2) <= 110
    assert measure(family_E1().window(110.0)) == pytest.approx(E1_WINDOW_110, abs=1e-12)


def test_bounded_set_ratio_vanishes_far_away():
    S = IntervalSet([(-1, 1)])
    assert thinness_ratio(S, 3.0) == 0.0
    assert thinness_ratio(S, 0.0) == 1.0


def test_ratio_vectorised():
    S = IntervalSet([(-1, 1)])
    out = thinness_ratio(S, np.array([0.0, 1.0, 3.0]))
    np.testing.assert_allclose(out, [1.0, 0.5, 0.0])


@pytest.mark.parametrize("items", [[(0, 1)], [(2.2, 2.3), (5, 5.1)], [(-3, -2.5), (1.7, 1.75), (4, 4.2)]])
def test_sup_ratio_matches_brute_force(items):
    S = IntervalSet(items)
    val, xm = sup_ratio(S, 0.0, 8.0)
    bf = brute_sup(S, 0.0, 8.0)
    assert bf <= val + 1e-12
    assert val - bf <= 2e-3
    assert thinness_ratio(S, xm) == pytest.approx(val, abs=1e-12)


def test_sup_ratio_E2_oracle():
    S = family_E2().window(40.0)
    val, _ = sup_ratio(S, 10.0, 30.0)
    bf = brute_sup(S, 10.0, 30.0, n=400001)
    assert bf <= val + 1e-12
    assert val - bf <= 1e-4
    assert val == pytest.approx(E2_THETA_10, abs=1e-12)


# -- families and profiles ---------------------------------------------------


def test_eta():
    assert eta(2.0) == pytest.approx(min(1.0, 1 / (2 * math.log(2))))
    assert eta(100.0) == pytest.approx(1 / (100 * math.log(100)))


def test_profile_E2_frozen():
    prof = thin_profile(family_E2(), [10, 100])
    np.testing.assert_allclose(prof.theta, [E2_THETA_10, E2_THETA_100], atol=1e-12)
    assert np.all(prof.err <= 1e-3)


def test_profile_E1_is_one():
    prof = thin_profile(family_E1(), [3, 50, 400])
    np.testing.assert_array_equal(prof.theta, 1.0)


def test_profile_bounded_set_is_zero():
    prof = thin_profile(from_intervals(IntervalSet([(-1, 1)])), [3])
    assert prof.theta[0] == 0.0


def test_profile_rejects_bad_R():
    with pytest.raises(ValueError):
        thin_profile(family_E2(), [10, 5])
    with pytest.raises(ValueError):
        thin_profile(family_E2(), [10], tol=0.0)


def test_profile_serialisation():
    prof = thin_profile(family_E2(), [10, 100])
    lines = prof.to_csv().splitlines()
    assert lines[0] == "R,theta,err"
    assert float(lines[1].split(",")[1]) == prof.theta[0]
    d = prof.to_dict()
    assert d["entries"][1]["R"] == 100.0


def test_e2_tail_bound_dominates_window_sup():
    F = family_E2()
    for R in (10.0, 30.0, 100.0):
        val, _ = sup_ratio(F.window(4 * R), R, 3 * R)
        assert val <= F.tail_bound(R) + 1e-12


def test_is_eps_thin_verdicts():
    assert is_eps_thin(comb_family(0.1, 64), 0.5).verdict is Thinness.THIN
    r = is_eps_thin(family_E1(), 0.5)
    assert r.verdict is Thinness.NOT_THIN and r.sup == 1.0
    assert is_eps_thin(empty_family(), 0.01).verdict is Thinness.THIN
    assert is_eps_thin(full_line_family(), 0.5).verdict is Thinness.NOT_THIN


def test_comb_structure():
    S = comb_set(0.25, 8)
    assert S.bounds[0] >= -8 and S.bounds[1] <= 8
    # each unit cell in [0, 2) keeps a quarter
    assert S.measure_in(0.0, 1.0) == pytest.approx(0.25)
    assert S.measure_in(4.0, 5.0) == pytest.approx(0.25)
    assert S == S.mirror()
    with pytest.raises(ValueError):
        comb_set(1.5, 8)


def test_ball_estimate():
    est = ball_estimate_sup(family_E2(), 10.0, 64.0)
    assert 0 <= est.value <= 2.0
    assert est.thinness > 0


# -- properties ----------------------------------------------------------------

coords = st.floats(-20, 20, allow_nan=False)
interval_sets = st.lists(st.tuples(coords, coords).map(sorted), max_size=6).map(IntervalSet)


@settings(max_examples=60, deadline=None)
@given(interval_sets, st.floats(-30, 30))
def test_ratio_in_unit_interval(S, x):
    r = thinness_ratio(S, x)
    assert 0.0 <= r <= 1.0


@settings(max_examples=60, deadline=None)
@given(interval_sets, st.floats(0.5, 25))
def test_truncate_tail_partition(S, R):
    assert measure(truncate(S, R)) + measure(tail(S, R)) == pytest.approx(measure(S), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(interval_sets, st.floats(0.1, 10))
def test_scaling_homogeneity(S, lam):
    assert measure(scale_set(S, lam)) == pytest.approx(lam * measure(S), rel=1e-12, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(interval_sets)
def test_sup_ratio_dominates_samples(S):
    val, _ = sup_ratio(S, 0.0, 25.0)
    x = np.linspace(0, 25, 5001)
    assert np.max(thinness_ratio(S, x)) <= val + 1e-12
    assert np.max(thinness_ratio(S, -x)) <= val + 1e-12


@settings(max_examples=30, deadline=None)
@given(interval_sets)
def test_profile_monotone_and_zero_beyond_bounded_set(S):
    prof = thin_profile(from_intervals(S), [1.0, 4.0, 16.0, 64.0])
    assert np.all(np.diff(prof.theta) <= 1e-12)
    assert prof.theta[-1] == 0.0
