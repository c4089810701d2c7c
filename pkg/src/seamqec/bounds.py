"""Closed-form walk-counting bounds for a noisy seam embedded in a bulk.

All probabilities here are per-edge flip rates (``p_b``, ``p_s``).  The
unknown polynomial prefactors are set to one, so only shapes and
threshold locations are meaningful.  Evaluators return values above one
unclamped.
"""

import math
import sys
from dataclasses import dataclass
from fractions import Fraction

from ._validation import ValidationError, check_int


class DivergentSeriesError(ValidationError):
    """Bulk rate at or above the bulk threshold: the excursion series diverges."""

    def __init__(self, p_b, p_b_star):
        super().__init__("p_b", f"excursion series diverges for p_b={p_b} >= p_b*={p_b_star}")


def connectivity_constants(D_s, D_b):
    """Exact walk-extension counts and threshold bounds for integer dimensions."""
    D_s = check_int(D_s, "D_s", minimum=1)
    D_b = check_int(D_b, "D_b", minimum=1)
    if D_s >= D_b:
        raise ValidationError("D_s", f"seam dimension must be below bulk dimension ({D_s} >= {D_b})")
    mu_s = 2 * D_s - 1
    mu_b = 2 * D_b - 1
    mu_c = 4 * D_s * (D_b - D_s)
    return {
        "mu_s": mu_s,
        "mu_b": mu_b,
        "mu_c": mu_c,
        "a": Fraction(mu_c, mu_s),
        "p_s_star": Fraction(1, 4 * mu_s**2),
        "p_b_star": Fraction(1, 4 * mu_b**2),
        "alpha_c": 8 * mu_c,
    }


@dataclass(frozen=True)
class BoundParams:
    """Dimensions plus optional empirical overrides.

    Overrides only affect curve and sag evaluation; the ``mu_*`` constants
    and the ``*_derived`` thresholds always come from the dimensions.
    """

    D_s: int = 2
    D_b: int = 3
    mu_2c: int = 4
    p_s_star_override: float = None
    p_b_star_override: float = None
    alpha_c_override: float = None
    alpha_2c_override: float = None

    def __post_init__(self):
        connectivity_constants(self.D_s, self.D_b)

    @property
    def constants(self):
        return connectivity_constants(self.D_s, self.D_b)

    mu_s = property(lambda self: self.constants["mu_s"])
    mu_b = property(lambda self: self.constants["mu_b"])
    mu_c = property(lambda self: self.constants["mu_c"])
    p_s_star_derived = property(lambda self: self.constants["p_s_star"])
    p_b_star_derived = property(lambda self: self.constants["p_b_star"])
    alpha_c_derived = property(lambda self: self.constants["alpha_c"])

    @property
    def alpha_2c_derived(self):
        return 8 * self.mu_2c

    @property
    def p_s_star(self):
        return float(self.p_s_star_derived if self.p_s_star_override is None else self.p_s_star_override)

    @property
    def p_b_star(self):
        return float(self.p_b_star_derived if self.p_b_star_override is None else self.p_b_star_override)

    @property
    def alpha_c(self):
        return float(self.alpha_c_derived if self.alpha_c_override is None else self.alpha_c_override)

    @property
    def alpha_2c(self):
        return float(self.alpha_2c_derived if self.alpha_2c_override is None else self.alpha_2c_override)

    def relaxed(self, p_s_star=None, p_b_star=None, alpha_c=None, alpha_2c=None):
        """Copy with empirical values substituted (``None`` keeps the current one)."""
        return BoundParams(
            self.D_s,
            self.D_b,
            self.mu_2c,
            self.p_s_star_override if p_s_star is None else p_s_star,
            self.p_b_star_override if p_b_star is None else p_b_star,
            self.alpha_c_override if alpha_c is None else alpha_c,
            self.alpha_2c_override if alpha_2c is None else alpha_2c,
        )


def threshold_bound(D):
    """``1 / (4 (2D - 1)^2)`` as an exact fraction."""
    D = check_int(D, "D", minimum=1)
    return Fraction(1, 4 * (2 * D - 1) ** 2)


def homogeneous_bound(p, D, L):
    """``(p / p*)^(L/2)`` for a single homogeneous lattice of dimension ``D``."""
    if p < 0:
        raise ValidationError("p", "must be >= 0")
    return (p / float(threshold_bound(D))) ** (L / 2)


def _bulk_ratio_root(p_b, params):
    if p_b < 0:
        raise ValidationError("p_b", "must be >= 0")
    p_b_star = params.p_b_star
    if p_b >= p_b_star:
        raise DivergentSeriesError(p_b, p_b_star)
    return math.sqrt(p_b / p_b_star)


def excursion_bracket(p_b, params, alpha_c=None):
    """``1 + alpha_c p_b sqrt(p_s*) / (1 - sqrt(p_b / p_b*))``."""
    r = _bulk_ratio_root(p_b, params)
    alpha = params.alpha_c if alpha_c is None else alpha_c
    return 1.0 + alpha * p_b * math.sqrt(params.p_s_star) / (1.0 - r)


def seam_factor(p_s, p_b, params):
    """Per-seam-edge factor including bulk excursions (closed form)."""
    if p_s < 0:
        raise ValidationError("p_s", "must be >= 0")
    return math.sqrt(p_s / params.p_s_star) * excursion_bracket(p_b, params)


def seam_factor_series(p_s, p_b, params, rtol=1e-17, max_terms=1_000_000):
    """Same factor by summing the excursion series term by term.

    Uses the raw counting constants, so it checks the closed form against
    ``mu_s 2 sqrt(p_s) + sum_l mu_c 2 sqrt(p_s) (2 sqrt(p_b))^2 (mu_b 2 sqrt(p_b))^l``.
    """
    _bulk_ratio_root(p_b, params)
    step = params.mu_b * 2.0 * math.sqrt(p_b)
    lead = params.mu_c * 2.0 * math.sqrt(p_s) * 4.0 * p_b
    terms = [params.mu_s * 2.0 * math.sqrt(p_s)]
    term = lead
    for _ in range(max_terms):
        terms.append(term)
        if term <= rtol * terms[0] or term == 0.0:
            break
        term *= step
    return math.fsum(terms)


def sag_single_seam(p_b, params):
    """Seam threshold bound lowered by bulk excursions."""
    return params.p_s_star / excursion_bracket(p_b, params) ** 2


def pfail_cross_bound(p_s, p_b, L, params, terms=False):
    """Pure-seam, pure-bulk and excursion cross terms of the failure bound.

    The cross term for ``gamma_S`` seam edges keeps only chains with at
    least one excursion, ``(1 + x)^gamma_S - 1`` out of the binomial sum,
    and clamps the bulk exponent ``(L - gamma_S)/2`` at zero.
    """
    L = check_int(L, "L", minimum=1)
    if p_s < 0:
        raise ValidationError("p_s", "must be >= 0")
    bracket = excursion_bracket(p_b, params)
    rs = p_s / params.p_s_star
    rb = p_b / params.p_b_star
    cross = []
    for g in range(1, L + 1):
        cross.append(rs ** (g / 2) * rb ** (max(L - g, 0) / 2) * (bracket**g - 1.0))
    seam_term = rs ** (L / 2)
    bulk_term = rb ** (L / 2)
    total = math.fsum([seam_term, bulk_term, *cross])
    if terms:
        return total, {"seam": seam_term, "bulk": bulk_term, "cross": cross}
    return total


def f_equal_ratio(p_b, alpha_c, L, params):
    """Failure bound along the line ``p_s / p_s* = p_b / p_b*``."""
    bracket = excursion_bracket(p_b, params, alpha_c=alpha_c)
    return (p_b / params.p_b_star * bracket**2) ** (L / 2)


def equal_ratio_threshold(params, alpha_c=None):
    """Root in ``p_b`` of ``(p_b / p_b*) * bracket^2 = 1`` on ``(0, p_b*)``."""
    from scipy.optimize import brentq

    def g(p_b):
        return p_b / params.p_b_star * excursion_bracket(p_b, params, alpha_c=alpha_c) ** 2 - 1.0

    hi = params.p_b_star * (1 - 1e-15)
    return brentq(g, 0.0, hi, xtol=1e-18, rtol=4 * sys.float_info.epsilon)


def decoupled_model(p_bulk, p_seam, L, p_bulk_star=0.01, p_seam_star=0.10):
    """Failure model with bulk and seam acting independently."""
    return (p_bulk / p_bulk_star) ** (L / 2) + (p_seam / p_seam_star) ** (L / 2)


def _check_h(h):
    return check_int(h, "h", minimum=2)


def two_seam_bracket(p_b, h, params, p_1s_star):
    r = _bulk_ratio_root(p_b, params)
    h = _check_h(h)
    return 1.0 + params.alpha_2c * math.sqrt(p_1s_star) * p_b * r ** (h - 2) / (1.0 - r)


def sag_two_seam(p_b, h, params, p_1s_star=None):
    """Seam threshold with a second seam at distance ``h``.

    ``p_1s_star`` may be an externally measured single-seam threshold;
    by default it is :func:`sag_single_seam`.
    """
    if p_1s_star is None:
        p_1s_star = sag_single_seam(p_b, params)
    return p_1s_star / two_seam_bracket(p_b, h, params, p_1s_star) ** 2


def two_seam_factor(p_s, p_b, h, params, p_1s_star):
    """Closed-form per-edge factor including inter-seam hops."""
    return math.sqrt(p_s / p_1s_star) * two_seam_bracket(p_b, h, params, p_1s_star)


def two_seam_factor_series(p_s, p_b, h, params, p_1s_star, rtol=1e-17, max_terms=1_000_000):
    """Inter-seam hop term summed directly, added to ``sqrt(p_s / p_1s*)``."""
    _bulk_ratio_root(p_b, params)
    h = _check_h(h)
    step = params.mu_b * math.sqrt(4.0 * p_b)
    mu_2c = params.alpha_2c / 8.0
    term = mu_2c * math.sqrt(4.0 * p_s) * 4.0 * p_b * step ** (h - 2)
    base = math.sqrt(p_s / p_1s_star)
    terms = [base]
    for _ in range(max_terms):
        terms.append(term)
        if term <= rtol * base or term == 0.0:
            break
        term *= step
    return math.fsum(terms)


def bound_row(p_b, p_s, L, params, h=3):
    """One CSV row of bound evaluations at ``(p_b, p_s, L)``."""
    row = {
        "p_b": p_b,
        "p_s": p_s,
        "L": L,
        "eq2_seam": homogeneous_bound(p_s, params.D_s, L),
        "eq2_bulk": homogeneous_bound(p_b, params.D_b, L),
    }
    try:
        row["eq4"] = pfail_cross_bound(p_s, p_b, L, params)
        row["eq6"] = f_equal_ratio(p_b, params.alpha_c, L, params)
        row["p_1s_star"] = sag_single_seam(p_b, params)
        row["p_2s_star"] = sag_two_seam(p_b, h, params)
    except DivergentSeriesError:
        row.update(eq4=math.inf, eq6=math.inf, p_1s_star=0.0, p_2s_star=0.0)
    row["eq7"] = decoupled_model(p_b / 4.0, p_s, L)
    return row


BOUND_COLUMNS = ("p_b", "p_s", "L", "eq2_seam", "eq2_bulk", "eq4", "eq6", "eq7", "p_1s_star", "p_2s_star")
