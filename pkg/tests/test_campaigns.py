import pytest

from seamqec._validation import ValidationError
from seamqec.bounds import BoundParams, sag_single_seam, sag_two_seam
from seamqec.campaigns import (
    Frontier,
    FrontierPoint,
    TwoSeamResult,
    fit_alpha_2c,
    is_monotone_nonincreasing,
    least_squares_alpha,
    minimal_bounding_alpha,
    threshold_campaign,
    two_seam_experiment,
)

P_S, P_B = 0.11, 0.03  # measured-style anchors, edge rates


def _curve_points(alpha, p_b_values):
    prm = BoundParams().relaxed(p_s_star=P_S, p_b_star=P_B, alpha_c=alpha)
    return [(pb, sag_single_seam(pb, prm)) for pb in p_b_values]


def test_bounding_alpha_recovers_exact_curve():
    pts = _curve_points(1.4, [0.006, 0.012, 0.018, 0.024])
    assert minimal_bounding_alpha(pts, P_S, P_B) == pytest.approx(1.4, rel=1e-9)
    assert least_squares_alpha(pts, P_S, P_B) == pytest.approx(1.4, rel=1e-4)


def test_bounding_alpha_is_set_by_lowest_point():
    pts = _curve_points(1.0, [0.006, 0.012]) + _curve_points(2.5, [0.018])
    need = minimal_bounding_alpha(pts, P_S, P_B)
    assert need == pytest.approx(2.5, rel=1e-9)
    prm = BoundParams().relaxed(p_s_star=P_S, p_b_star=P_B, alpha_c=need)
    assert all(sag_single_seam(pb, prm) <= ps * (1 + 1e-12) for pb, ps in pts)
    # anchors and points beyond p_b* carry no constraint
    assert minimal_bounding_alpha([(0.0, P_S), (P_B, 0.0), (0.04, 0.01)], P_S, P_B) == 0.0


def test_monotone_check_is_ci_aware():
    pts = [
        FrontierPoint(0.0, 0.11, 0.0, 0.002, "p_seam"),
        FrontierPoint(0.0075, 0.0, 0.0003, 0.0, "p_bulk"),
        FrontierPoint(0.0078, 0.02, 0.0003, 0.0, "p_bulk"),
    ]
    ok, bad = is_monotone_nonincreasing(pts)
    assert ok and not bad
    tight = pts[:2] + [FrontierPoint(0.0095, 0.02, 0.0002, 0.0001, "p_bulk")]
    tight[1] = FrontierPoint(0.0075, 0.0, 0.0002, 0.0001, "p_bulk")
    ok, bad = is_monotone_nonincreasing(tight)
    assert not ok and len(bad) == 1


def test_frontier_curve_and_rows():
    fr = Frontier(
        points=[FrontierPoint(0.0, 0.11, 0, 0.002, "p_seam"), FrontierPoint(0.0075, 0.0, 0.0003, 0, "p_bulk")],
        p_bulk_star=0.0075,
        p_seam_star=0.11,
        alpha_c_bounding=1.2,
    )
    assert fr.curve([0.0])[0] == pytest.approx(0.11)
    assert fr.curve([0.0075])[0] == 0.0  # diverging excursions at p_bulk*
    rigorous = fr.curve([0.003], alpha_c=64)[0]
    assert rigorous < fr.curve([0.003])[0]
    assert [r["swept"] for r in fr.rows()] == ["p_seam", "p_bulk"]


def test_alpha_2c_fit_recovers_synthetic_value():
    p_bulk, p_b_star, p1 = 0.004, 0.032, 0.105
    prm = BoundParams().relaxed(p_b_star=p_b_star, alpha_2c=6.1)
    rows = [{"h": h, "p_c": sag_two_seam(4 * p_bulk, h, prm, p1), "sigma": 0.002} for h in (2, 3, 4, 5)]
    assert fit_alpha_2c(rows, p_bulk, p_b_star, p1) == pytest.approx(6.1, rel=1e-3)
    res = TwoSeamResult(p_bulk, p_b_star, {"p_c": p1}, rows, [], alpha_2c=6.1)
    assert res.is_nondecreasing()
    assert res.curve([2, 3]) == pytest.approx([rows[0]["p_c"], rows[1]["p_c"]])
    dipped = rows + [{"h": 6, "p_c": rows[0]["p_c"] - 0.02, "sigma": 0.002}]
    assert not TwoSeamResult(p_bulk, p_b_star, {"p_c": p1}, dipped, []).is_nondecreasing()


def test_campaign_rejections():
    with pytest.raises(ValidationError):
        threshold_campaign("bulk", [4, 6, 8], (0.005, 0.01), 5, 10, 0, p_seam=0.05)
    with pytest.raises(ValidationError):
        threshold_campaign("diagonal", [4, 6, 8], (0.005, 0.01), 5, 10, 0)
    with pytest.raises(ValidationError):
        two_seam_experiment([2, 6], [6, 8, 10], 10, 0)
    with pytest.raises(ValidationError):
        two_seam_experiment([1], [6, 8, 10], 10, 0)
