import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from seamqec._validation import ValidationError
from seamqec.bounds import (
    BOUND_COLUMNS,
    BoundParams,
    DivergentSeriesError,
    bound_row,
    connectivity_constants,
    decoupled_model,
    equal_ratio_threshold,
    excursion_bracket,
    f_equal_ratio,
    homogeneous_bound,
    pfail_cross_bound,
    sag_single_seam,
    sag_two_seam,
    seam_factor,
    seam_factor_series,
    threshold_bound,
    two_seam_factor,
    two_seam_factor_series,
)

P = BoundParams()


def test_default_constants():
    c = connectivity_constants(2, 3)
    assert (c["mu_s"], c["mu_b"], c["mu_c"], c["alpha_c"]) == (3, 5, 8, 64)
    assert c["p_s_star"] == Fraction(1, 36) and c["p_b_star"] == Fraction(1, 100)
    assert P.alpha_2c == 32.0


@pytest.mark.parametrize("D_s, D_b", [(1, 2), (2, 3), (1, 3)])
def test_corner_identity(D_s, D_b):
    c = connectivity_constants(D_s, D_b)
    # alpha_c sqrt(p_s*) = 8 mu_c / (2 mu_s) exactly
    assert c["alpha_c"] * Fraction(1, 2 * c["mu_s"]) == 4 * c["a"]
    assert c["alpha_c"] ** 2 * c["p_s_star"] == (4 * c["a"]) ** 2


def test_constant_rejections():
    with pytest.raises(ValidationError):
        connectivity_constants(3, 3)
    with pytest.raises(ValidationError):
        BoundParams(D_s=0)


def test_homogeneous_examples():
    assert threshold_bound(3) == Fraction(1, 100)
    assert float(threshold_bound(2)) == pytest.approx(0.0278, abs=1e-4)
    assert homogeneous_bound(0.01, 3, 7) == pytest.approx(1.0)
    assert homogeneous_bound(0.0025, 3, 10) == pytest.approx(1 / 1024)
    assert homogeneous_bound(0.02, 3, 4) == pytest.approx(4.0)  # vacuous, not clamped


def test_seam_factor_limits():
    assert seam_factor(0.01, 0.0, P) == pytest.approx(math.sqrt(0.01 * 36))
    assert seam_factor(1 / 36, 0.0, P) == pytest.approx(1.0)
    assert sag_single_seam(0.0, P) == pytest.approx(1 / 36)


@pytest.mark.parametrize("p_s, p_b", [(1 / 36, 0.005), (0.01, 0.001), (0.02, 0.0099), (0.005, 1e-6)])
def test_seam_series_matches_closed_form(p_s, p_b):
    series = seam_factor_series(p_s, p_b, P)
    # the series carries the raw mu_s 2 sqrt(p_s) = sqrt(p_s / p_s*) normalisation
    assert series == pytest.approx(seam_factor(p_s, p_b, P), rel=1e-12)


@pytest.mark.parametrize("h", [2, 3, 5])
def test_two_seam_series_matches_closed_form(h):
    p_b = P.p_b_star / 2
    p1 = sag_single_seam(p_b, P)
    for p_s in (p1, 0.3 * p1):
        assert two_seam_factor_series(p_s, p_b, h, P, p1) == pytest.approx(two_seam_factor(p_s, p_b, h, P, p1), rel=1e-12)


def test_fixed_point_of_single_seam_sag():
    for p_b in (0.001, 0.004, 0.009):
        assert seam_factor(sag_single_seam(p_b, P), p_b, P) == pytest.approx(1.0, rel=1e-12)


def test_divergence_rejected():
    with pytest.raises(DivergentSeriesError):
        seam_factor(0.01, 0.01, P)
    with pytest.raises(DivergentSeriesError):
        seam_factor_series(0.01, 0.02, P)
    with pytest.raises(ValidationError):
        sag_two_seam(0.001, 1, P)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 0.0099))
def test_sag_ordering_and_monotonicity(p_b):
    p1 = sag_single_seam(p_b, P)
    assert sag_two_seam(p_b, 2, P) <= p1 <= P.p_s_star
    assert sag_single_seam(min(p_b + 1e-4, 0.00999), P) <= p1


def test_two_seam_increasing_in_h_and_limit():
    prm = P.relaxed(alpha_2c=6.1)
    p_b = P.p_b_star / 2
    vals = [sag_two_seam(p_b, h, prm) for h in range(2, 100)]
    assert all(a < b for a, b in zip(vals[:20], vals[1:21]))
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(sag_single_seam(p_b, prm), rel=1e-9)


def test_cross_bound_limits():
    L = 10
    total, parts = pfail_cross_bound(0.0, 0.004, L, P, terms=True)
    assert parts["seam"] == 0 and total == pytest.approx(homogeneous_bound(0.004, 3, L))
    assert pfail_cross_bound(0.01, 0.0, L, P) == pytest.approx((0.01 * 36) ** 5)
    # on the equal-ratio line the gamma_S = L cross term plus the pure terms stay below f up to poly(L)
    p_b = P.p_b_star / 2
    p_s = P.p_s_star / 2
    total = pfail_cross_bound(p_s, p_b, L, P)
    f = f_equal_ratio(p_b, P.alpha_c, L, P)
    assert f <= total <= (L + 2) * f


def test_equal_ratio_function():
    assert f_equal_ratio(0.0, 64, 5, P) == 0.0
    assert f_equal_ratio(0.004, 0.0, 6, P) == pytest.approx(homogeneous_bound(0.004, 3, 6))
    root = equal_ratio_threshold(P)
    assert 0 < root < 0.01
    assert f_equal_ratio(root, P.alpha_c, 4, P) == pytest.approx(1.0)
    assert equal_ratio_threshold(P, alpha_c=1.4) > root


def test_decoupled_model():
    assert decoupled_model(0.01, 0.0, 8) == pytest.approx(1.0)
    a = (0.003 / 0.01) ** 4
    assert decoupled_model(0.003, 0.03, 8) == pytest.approx(2 * a)
    vals = [decoupled_model(0.004, 0.05, L) for L in range(2, 30, 2)]
    assert all(x > y for x, y in zip(vals, vals[1:]))


def test_bound_row_columns():
    row = bound_row(0.004, 0.01, 20, P)
    assert tuple(row) == BOUND_COLUMNS[:5] + ("eq4", "eq6", "p_1s_star", "p_2s_star", "eq7")
    assert set(row) == set(BOUND_COLUMNS)
    assert row["eq2_bulk"] == pytest.approx(0.4**10)
    div = bound_row(0.02, 0.01, 20, P)
    assert div["eq4"] == math.inf and div["p_1s_star"] == 0.0


def test_excursion_bracket_override():
    assert excursion_bracket(0.0025, P, alpha_c=0) == 1.0
    relaxed = P.relaxed(p_s_star=0.1, p_b_star=0.03, alpha_c=1.4)
    assert relaxed.alpha_c == 1.4 and relaxed.mu_c == 8 and relaxed.p_s_star_derived == Fraction(1, 36)
    assert excursion_bracket(0.0075, relaxed) == pytest.approx(1 + 1.4 * 0.0075 * math.sqrt(0.1) / 0.5)
