"""Multi-sweep campaigns: thresholds, the (p_bulk, p_seam) frontier and two seams.

User-facing rates are ``p_bulk`` and ``p_seam``; the bound formulas take
edge rates ``p_b = 4 p_bulk`` and ``p_s = p_seam``.
"""

import logging
import math
from dataclasses import dataclass, field

from scipy.optimize import minimize_scalar

from ._validation import ValidationError, check_int
from .bounds import BoundParams, DivergentSeriesError, sag_single_seam, sag_two_seam
from .experiments import grid_points, linear_grid, ratio_locked_points, sweep
from .noise import NoiseParams
from .threshold import NoCrossingError, fit_threshold

log = logging.getLogger(__name__)

BULK_WINDOW = (0.005, 0.010)
SEAM_WINDOW = (0.07, 0.14)


def _grid(window, count):
    return linear_grid(window[0], window[1], count)


def threshold_campaign(mode, Ls, window, count, shots, seed, p_bulk=0.0, p_seam=0.0, ratio=14.0,
                       n_seams=None, h=None, engine="pymatching", workers=None):
    """Sweep one variable over ``window`` for every size and fit the crossing.

    ``p_bulk``/``p_seam`` fix the variable that is not swept.  Returns the
    sweep table and the fit.
    """
    grid = _grid(window, count)
    if mode in ("bulk", "bulk-only"):
        seams = 0 if n_seams is None else n_seams
        if seams == 0 and p_seam:
            raise ValidationError("p_seam", "bulk-only mode with no seam cannot take p_seam > 0")
        pts = grid_points(Ls, grid, [p_seam], n_seams=seams, h=h)
    elif mode in ("seam", "seam-only"):
        pts = grid_points(Ls, [p_bulk], grid, n_seams=1 if n_seams is None else n_seams, h=h)
    elif mode in ("ratio", "ratio-locked"):
        pts = ratio_locked_points(Ls, grid, ratio, n_seams=1 if n_seams is None else n_seams, h=h)
    else:
        raise ValidationError("mode", f"unknown mode {mode!r}")
    table = sweep(pts, shots, seed, engine=engine, workers=workers)
    return table, fit_threshold(table, mode)


@dataclass(frozen=True)
class FrontierPoint:
    p_bulk: float
    p_seam: float
    sigma_bulk: float
    sigma_seam: float
    swept: str  # "p_bulk" or "p_seam"
    fitted: bool = True

    @property
    def p_b(self):
        return 4.0 * self.p_bulk


@dataclass
class Frontier:
    points: list
    omitted: list = field(default_factory=list)  # slices without a crossing
    p_bulk_star: float = None
    p_seam_star: float = None
    alpha_c_bounding: float = None
    alpha_c_lsq: float = None

    def bound_params(self, alpha_c=None):
        return BoundParams().relaxed(
            p_s_star=self.p_seam_star,
            p_b_star=4.0 * self.p_bulk_star,
            alpha_c=self.alpha_c_bounding if alpha_c is None else alpha_c,
        )

    def curve(self, p_bulk_values, alpha_c=None):
        """Sag curve ``p_1s*(p_b)`` with measured thresholds substituted."""
        params = self.bound_params(alpha_c)
        out = []
        for pb in p_bulk_values:
            try:
                out.append(sag_single_seam(4.0 * pb, params))
            except DivergentSeriesError:
                out.append(0.0)
        return out

    def rows(self):
        return [
            {
                "p_bulk": p.p_bulk,
                "p_seam": p.p_seam,
                "sigma_bulk": p.sigma_bulk,
                "sigma_seam": p.sigma_seam,
                "swept": p.swept,
                "bound_relaxed": self.curve([p.p_bulk])[0],
            }
            for p in self.points
        ]


def is_monotone_nonincreasing(points, z=2.0):
    """CI-aware check that larger ``p_bulk`` never comes with larger ``p_seam``.

    A pair is a violation only if both coordinate differences exceed ``z``
    combined standard errors.
    """
    violations = []
    for i, a in enumerate(points):
        for b in points[i + 1:]:
            lo, hi = (a, b) if a.p_bulk <= b.p_bulk else (b, a)
            db = hi.p_bulk - lo.p_bulk
            ds = hi.p_seam - lo.p_seam
            if db > z * math.hypot(lo.sigma_bulk, hi.sigma_bulk) and ds > z * math.hypot(lo.sigma_seam, hi.sigma_seam):
                violations.append((lo, hi))
    return not violations, violations


def minimal_bounding_alpha(points, p_s_star, p_b_star):
    """Smallest ``alpha_c`` whose sag curve stays at or below every point.

    ``p_b_star`` and the point coordinates passed here are edge rates.
    Points at ``p_b = 0`` or beyond ``p_b*`` do not constrain ``alpha_c``.
    """
    need = 0.0
    for p_b, p_s in points:
        if p_b <= 0 or p_b >= p_b_star or p_s <= 0:
            continue
        if p_s >= p_s_star:
            continue
        alpha = (math.sqrt(p_s_star / p_s) - 1.0) * (1.0 - math.sqrt(p_b / p_b_star)) / (p_b * math.sqrt(p_s_star))
        need = max(need, alpha)
    return need


def least_squares_alpha(points, p_s_star, p_b_star, upper=200.0):
    params = BoundParams().relaxed(p_s_star=p_s_star, p_b_star=p_b_star)
    usable = [(pb, ps) for pb, ps in points if 0 < pb < p_b_star]
    if not usable:
        return None

    def loss(alpha):
        prm = params.relaxed(alpha_c=alpha)
        return sum((sag_single_seam(pb, prm) - ps) ** 2 for pb, ps in usable)

    return float(minimize_scalar(loss, bounds=(0.0, upper), method="bounded").x)


def threshold_frontier(Ls, shots, seed, seam_slices=(0.0, 0.02, 0.04, 0.06), bulk_slices=(0.0, 0.0015, 0.003, 0.0045, 0.006),
                       count=9, bulk_window=BULK_WINDOW, seam_window=SEAM_WINDOW, engine="pymatching", workers=None,
                       progress=None):
    """Bulk thresholds at fixed ``p_seam`` and seam thresholds at fixed ``p_bulk``.

    The slice ``p_seam = 0`` supplies the measured bulk threshold and the
    slice ``p_bulk = 0`` the measured seam threshold; both must be present.
    """
    if 0.0 not in seam_slices or 0.0 not in bulk_slices:
        raise ValidationError("slices", "frontier needs the p_seam = 0 and p_bulk = 0 slices")
    points, omitted = [], []
    p_bulk_star = p_seam_star = None
    for ps in seam_slices:
        try:
            _, fit = threshold_campaign("bulk", Ls, bulk_window, count, shots, seed, p_seam=ps, n_seams=1,
                                        engine=engine, workers=workers)
        except NoCrossingError as exc:
            omitted.append({"swept": "p_bulk", "fixed": ps, "reason": str(exc)})
            continue
        points.append(FrontierPoint(fit.p_c, ps, fit.sigma, 0.0, "p_bulk"))
        if ps == 0.0:
            p_bulk_star = fit.p_c
        if progress:
            progress(points[-1])
    for pb in bulk_slices:
        try:
            _, fit = threshold_campaign("seam", Ls, seam_window, count, shots, seed, p_bulk=pb,
                                        engine=engine, workers=workers)
        except NoCrossingError as exc:
            omitted.append({"swept": "p_seam", "fixed": pb, "reason": str(exc)})
            continue
        points.append(FrontierPoint(pb, fit.p_c, 0.0, fit.sigma, "p_seam"))
        if pb == 0.0:
            p_seam_star = fit.p_c
        if progress:
            progress(points[-1])
    if p_bulk_star is None or p_seam_star is None:
        raise NoCrossingError("frontier anchors (p_bulk*, p_seam*) could not be measured")
    points.sort(key=lambda q: (q.p_bulk, -q.p_seam))
    edge_pts = [(q.p_b, q.p_seam) for q in points]
    p_b_star = 4.0 * p_bulk_star
    return Frontier(
        points=points,
        omitted=omitted,
        p_bulk_star=p_bulk_star,
        p_seam_star=p_seam_star,
        alpha_c_bounding=minimal_bounding_alpha(edge_pts, p_seam_star, p_b_star),
        alpha_c_lsq=least_squares_alpha(edge_pts, p_seam_star, p_b_star),
    )


@dataclass
class TwoSeamResult:
    p_bulk: float
    p_b_star: float
    single: dict  # threshold fit summary for one seam at the same p_bulk
    rows: list  # per h: {"h", "p_c", "sigma"}
    omitted: list
    alpha_2c: float = None

    def curve(self, hs, alpha_2c=None):
        params = BoundParams().relaxed(p_b_star=self.p_b_star, alpha_2c=self.alpha_2c if alpha_2c is None else alpha_2c)
        return [sag_two_seam(4.0 * self.p_bulk, h, params, p_1s_star=self.single["p_c"]) for h in hs]

    def is_nondecreasing(self, z=2.0):
        rows = sorted(self.rows, key=lambda r: r["h"])
        for a, b in zip(rows, rows[1:]):
            if a["p_c"] - b["p_c"] > z * math.hypot(a["sigma"], b["sigma"]):
                return False
        return True


def fit_alpha_2c(rows, p_bulk, p_b_star, p_1s_star, upper=200.0):
    """Weighted least-squares ``alpha_2c`` of the two-seam sag against measured thresholds."""
    p_b = 4.0 * p_bulk
    base = BoundParams().relaxed(p_b_star=p_b_star)

    def loss(alpha):
        prm = base.relaxed(alpha_2c=alpha)
        total = 0.0
        for r in rows:
            resid = sag_two_seam(p_b, r["h"], prm, p_1s_star=p_1s_star) - r["p_c"]
            total += (resid / max(r["sigma"], 1e-12)) ** 2
        return total

    return float(minimize_scalar(loss, bounds=(0.0, upper), method="bounded").x)


def two_seam_experiment(hs, Ls, shots, seed, p_b_ratio=0.5, p_bulk_star=0.0075, count=9, window=SEAM_WINDOW,
                        engine="pymatching", workers=None, progress=None):
    """Seam threshold for two seams ``h`` apart at ``p_b / p_b* = p_b_ratio``."""
    hs = [check_int(h, "h", minimum=2) for h in hs]
    for h in hs:
        if h >= min(Ls):
            raise ValidationError("h", f"h={h} must be below every L (min L = {min(Ls)})")
        if h > min(Ls) - 3:
            # an outer-column seam changes the geometry from one size to the next
            log.warning("h=%d puts a seam on an outer column for L=%d; its crossing is unreliable", h, min(Ls))
    p_bulk = p_b_ratio * p_bulk_star
    NoiseParams(p_bulk, 0.0)
    _, single = threshold_campaign("seam", Ls, window, count, shots, seed, p_bulk=p_bulk, n_seams=1,
                                   engine=engine, workers=workers)
    rows, omitted = [], []
    for h in hs:
        try:
            _, fit = threshold_campaign("seam", Ls, window, count, shots, seed, p_bulk=p_bulk, n_seams=2, h=h,
                                        engine=engine, workers=workers)
        except NoCrossingError as exc:
            omitted.append({"h": h, "reason": str(exc)})
            continue
        rows.append({"h": h, "p_c": fit.p_c, "sigma": fit.sigma, "nu": fit.nu})
        if progress:
            progress(rows[-1])
    result = TwoSeamResult(
        p_bulk=p_bulk,
        p_b_star=4.0 * p_bulk_star,
        single={"p_c": single.p_c, "sigma": single.sigma, "nu": single.nu},
        rows=rows,
        omitted=omitted,
    )
    if rows:
        result.alpha_2c = fit_alpha_2c(rows, p_bulk, result.p_b_star, single.p_c)
    return result
