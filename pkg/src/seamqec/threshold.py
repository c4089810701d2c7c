"""Finite-size-scaling extraction of a threshold from failure-rate curves.

The ansatz is ``p_fail = A + B x + C x^2`` with ``x = (p - p_c) L^(1/nu)``.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y, check_array

from ._validation import ValidationError

MODES = {
    "bulk": "p_bulk",
    "bulk-only": "p_bulk",
    "seam": "p_seam",
    "seam-only": "p_seam",
    "ratio": "p_bulk",
    "ratio-locked": "p_bulk",
}


class NoCrossingError(ValidationError):
    """Failure curves for different sizes do not intersect inside the grid."""

    def __init__(self, message):
        super().__init__("grid", message)


def pairwise_crossings(L, p, y):
    """Crossing points of consecutive-size curves, by linear interpolation.

    For each pair of adjacent sizes the difference ``y(L_big) - y(L_small)``
    is scanned along the common ``p`` values; each change from negative to
    positive contributes one crossing.
    """
    L = np.asarray(L)
    p = np.asarray(p, float)
    y = np.asarray(y, float)
    sizes = np.unique(L)
    out = []
    for small, big in zip(sizes, sizes[1:]):
        a = {pi: yi for pi, yi in zip(p[L == small], y[L == small])}
        b = {pi: yi for pi, yi in zip(p[L == big], y[L == big])}
        common = sorted(set(a) & set(b))
        d = [b[q] - a[q] for q in common]
        for i in range(len(common) - 1):
            if d[i] < 0 <= d[i + 1]:
                frac = -d[i] / (d[i + 1] - d[i])
                out.append(common[i] + frac * (common[i + 1] - common[i]))
    return out


def _ansatz(theta, L, p, nu=None):
    if nu is None:
        p_c, log_nu, a, b, c = theta
        nu = np.exp(log_nu)
    else:
        p_c, a, b, c = theta
    x = (p - p_c) * L ** (1.0 / nu)
    return a + b * x + c * x * x


class FiniteSizeScalingFit(RegressorMixin, BaseEstimator):
    """Weighted least-squares fit of the quadratic scaling ansatz.

    ``X`` has columns ``(L, p)``; ``y`` is the failure rate.  When ``nu`` is
    ``None`` the exponent is fitted, falling back to ``nu_fallback`` if the
    free fit is ill-conditioned or leaves ``nu_bounds``.
    """

    def __init__(self, nu=None, nu_fallback=1.5, nu_bounds=(0.5, 4.0), n_bootstrap=200, random_state=0):
        self.nu = nu
        self.nu_fallback = nu_fallback
        self.nu_bounds = nu_bounds
        self.n_bootstrap = n_bootstrap
        self.random_state = random_state

    def _sigma(self, y, shots):
        if shots is None:
            return np.ones_like(y)
        return np.sqrt(np.maximum(y * (1 - y), 1.0 / shots) / shots)

    def _solve(self, L, p, y, sigma, p_c0, nu):
        # linear coefficients at the starting point
        x0 = (p - p_c0) * L ** (1.0 / (nu or 1.5))
        abc = np.linalg.lstsq(np.vander(x0, 3, increasing=True) / sigma[:, None], y / sigma, rcond=None)[0]
        if nu is None:
            theta0 = np.r_[p_c0, np.log(1.5), abc]
        else:
            theta0 = np.r_[p_c0, abc]
        # wild trial exponents can overflow; the solver rejects those steps
        with np.errstate(over="ignore", invalid="ignore"):
            res = least_squares(lambda th: (_ansatz(th, L, p, nu) - y) / sigma, theta0, method="lm", max_nfev=5000)
        return res

    def _well_conditioned(self, res):
        if not res.success:
            return False
        nu = float(np.exp(res.x[1]))
        if not self.nu_bounds[0] <= nu <= self.nu_bounds[1]:
            return False
        s = np.linalg.svd(res.jac, compute_uv=False)
        return s[-1] > 0 and s[0] / s[-1] < 1e10

    def _fit_once(self, L, p, y, sigma, p_c0, free):
        if free:
            res = self._solve(L, p, y, sigma, p_c0, None)
            if self._well_conditioned(res):
                p_c, log_nu, a, b, c = res.x
                return p_c, float(np.exp(log_nu)), (a, b, c), res, False
        nu = self.nu_fallback if self.nu is None else self.nu
        res = self._solve(L, p, y, sigma, p_c0, nu)
        p_c, a, b, c = res.x
        return p_c, float(nu), (a, b, c), res, self.nu is None

    def fit(self, X, y, shots=None, p_c_guess=None):
        X, y = check_X_y(X, y, dtype=float)
        L, p = X[:, 0], X[:, 1]
        if len(np.unique(L)) < 3:
            raise ValidationError("L", "need at least 3 distinct sizes")
        if len(np.unique(p)) < 5:
            raise ValidationError("p", "need at least 5 distinct grid points")
        shots = None if shots is None else np.broadcast_to(np.asarray(shots, float), y.shape)
        sigma = self._sigma(y, shots)
        crossings = pairwise_crossings(L, p, y)
        if not crossings:
            raise NoCrossingError("failure curves do not cross inside the grid")
        if p_c_guess is None:
            p_c_guess = float(np.median(crossings))
        free = self.nu is None
        p_c, nu, coef, res, fell_back = self._fit_once(L, p, y, sigma, p_c_guess, free)
        lo, hi = p.min(), p.max()
        if not lo <= p_c <= hi:
            raise NoCrossingError(f"fitted p_c={p_c:.6g} outside the grid [{lo:.6g}, {hi:.6g}]")

        rng = np.random.default_rng(self.random_state)
        fixed_free = free and not fell_back
        boot = []
        for _ in range(self.n_bootstrap):
            if shots is not None:
                yb = rng.binomial(shots.astype(np.int64), np.clip(y, 0, 1)) / shots
            else:
                fitted = _ansatz(res.x, L, p, None if fixed_free else nu)
                yb = fitted + rng.choice(y - fitted, size=len(y), replace=True)
            sb = self._sigma(yb, shots)
            try:
                rb = self._solve(L, p, yb, sb, p_c, None if fixed_free else nu)
            except (np.linalg.LinAlgError, ValueError):
                continue
            if rb.success and np.isfinite(rb.x[0]):
                boot.append(rb.x[0])
        boot = np.asarray(boot)
        if len(boot) >= 2:
            # robust spread: half the central 68% range
            lo16, hi84 = np.percentile(boot, [16, 84])
            spread = 0.5 * (hi84 - lo16)
        else:
            spread = 0.0
        # finite-size drift: pairwise crossings wander as the sizes grow
        drift = 0.5 * (max(crossings) - min(crossings))
        self.p_c_ = float(p_c)
        self.p_c_std_stat_ = float(spread)
        self.p_c_drift_ = float(drift)
        self.p_c_std_ = float(max(np.hypot(spread, drift), np.finfo(float).eps * max(abs(p_c), 1.0)))
        self.crossings_ = np.asarray(crossings, float)
        self.nu_ = nu
        self.nu_fixed_ = not fixed_free
        self.coef_ = np.asarray(coef, float)
        self.chi2_ = float(np.sum(res.fun**2))
        self.dof_ = int(len(y) - len(res.x))
        self.bootstrap_ = boot
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "p_c_")
        X = check_array(X, dtype=float)
        return _ansatz(np.r_[self.p_c_, self.coef_], X[:, 0], X[:, 1], self.nu_)


@dataclass(frozen=True)
class ThresholdFit:
    p_c: float
    sigma: float  # statistical and finite-size drift in quadrature
    sigma_stat: float
    drift: float
    nu: float
    nu_fixed: bool
    coefficients: tuple
    chi2: float
    dof: int
    mode: str
    points: list = field(default_factory=list)

    def to_dict(self):
        return {
            "mode": self.mode,
            "p_c": self.p_c,
            "sigma": self.sigma,
            "sigma_stat": self.sigma_stat,
            "drift": self.drift,
            "nu": self.nu,
            "nu_fixed": self.nu_fixed,
            "coefficients": list(self.coefficients),
            "chi2": self.chi2,
            "dof": self.dof,
            "points": self.points,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @property
    def interval(self):
        return self.p_c - self.sigma, self.p_c + self.sigma


def fit_threshold(table, mode, **estimator_params):
    """Fit the crossing of a sweep table along the variable selected by ``mode``."""
    if mode not in MODES:
        raise ValidationError("mode", f"unknown mode {mode!r}; expected one of {sorted(MODES)}")
    column = MODES[mode]
    rows = list(table)
    if not rows:
        raise ValidationError("table", "empty sweep table")
    X = np.array([[r.L, getattr(r, column)] for r in rows], float)
    y = np.array([r.p_fail for r in rows], float)
    shots = np.array([r.shots for r in rows], float)
    est = FiniteSizeScalingFit(**estimator_params).fit(X, y, shots=shots)
    points = [
        {"L": int(r.L), "p": float(getattr(r, column)), "p_fail": float(r.p_fail), "shots": int(r.shots)}
        for r in rows
    ]
    return ThresholdFit(
        p_c=est.p_c_,
        sigma=est.p_c_std_,
        sigma_stat=est.p_c_std_stat_,
        drift=est.p_c_drift_,
        nu=est.nu_,
        nu_fixed=est.nu_fixed_,
        coefficients=tuple(float(c) for c in est.coef_),
        chi2=est.chi2_,
        dof=est.dof_,
        mode=mode,
        points=points,
    )
