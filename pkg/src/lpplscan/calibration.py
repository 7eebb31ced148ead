"""Single-window calibration.

The seven model parameters split into four exactly linear ones (A, B, C1, C2)
and three nonlinear ones (t_c, m, omega). The linear block is solved by least
squares inside the objective, so the outer search is a 3-d multi-start
Nelder-Mead over (t_c, m, omega). The outer search runs in normalized
coordinates (t_c mapped to a unit interval anchored at the window end), which
makes results exactly invariant under price scaling and time translation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .errors import DomainError, FitError
from .model import TWO_PI, LpplParams, lppl_basis
from .timeseries import FitWindow, PriceSeries

POSITIVE_BUBBLE = "positive_bubble"
NEGATIVE_BUBBLE = "negative_bubble"
NO_SIGN = "none"

# fraction of the t_c search range kept clear of the window end, so the
# basis log term stays finite at the last observation
_TC_MARGIN = 1e-6


@dataclass(frozen=True)
class FilterConfig:
    """Qualification thresholds guarding against over-fitting.

    Ranges are open intervals: a fit pinned at a search bound is rejected.
    """

    m_range: tuple[float, float] = (0.01, 0.99)
    omega_range: tuple[float, float] = (2.0, 15.0)
    tc_horizon: float = 0.5  # max (t_c - t2) as a fraction of window length
    max_rmse: float | None = None
    min_oscillations: float = 1.5
    # sse must undercut the best straight-line fit by this fraction; rejects
    # trend-following noise overfits whose oscillation amplitude is negligible
    min_line_gain: float | None = 0.25

    def __post_init__(self):
        if not self.m_range[0] < self.m_range[1]:
            raise DomainError("empty m range")
        if not self.omega_range[0] < self.omega_range[1]:
            raise DomainError("empty omega range")
        if self.tc_horizon <= 0:
            raise DomainError("tc_horizon must be positive")


@dataclass(frozen=True)
class SearchConfig:
    """Multi-start settings for the nonlinear (t_c, m, omega) search."""

    n_starts: int = 20
    max_iter: int = 400
    rel_tol: float = 1e-8  # convergence tolerance on relative sse


@dataclass(frozen=True)
class Verdict:
    qualified: bool
    failures: tuple[str, ...]
    checks: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FitResult:
    params: LpplParams
    window: FitWindow
    sse: float
    rmse: float
    n_points: int
    qualified: bool
    sign: str
    sse_line: float | None = None  # sse of the best straight-line fit, for the line-gain filter
    failures: tuple[str, ...] = ()
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "window": {
                "t1": self.window.t1,
                "t2": self.window.t2,
                "n_points": self.n_points,
            },
            "sse": self.sse,
            "rmse": self.rmse,
            "qualified": self.qualified,
            "sign": self.sign,
            "filters": {
                name: {"passed": passed, "failed": name in self.failures}
                for name, passed in self.checks.items()
            },
        }


def oscillation_count(omega: float, t_c: float, t1: float, t2: float) -> float:
    """Full log-periodic oscillations between t1 and t2: w*ln((tc-t1)/(tc-t2))/2pi."""
    return omega * math.log((t_c - t1) / (t_c - t2)) / TWO_PI


def solve_linear(
    series: PriceSeries,
    window: FitWindow,
    t_c: float,
    m: float,
    omega: float,
) -> tuple[float, float, float, float, float]:
    """Least-squares (A, B, C1, C2) of log-price on the model basis, plus sse.

    Rank-deficient systems return the minimum-norm solution.
    """
    if t_c <= window.t2:
        raise DomainError(f"t_c={t_c} must lie beyond the window end {window.t2}")
    tt = window.times(series)
    y = window.log_prices(series)
    X = lppl_basis(t_c, m, omega, tt)
    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    if not np.all(np.isfinite(beta)):
        raise FitError(f"linear solve produced non-finite coefficients at t_c={t_c}")
    resid = y - X @ beta
    sse = float(resid @ resid)
    A, B, c1, c2 = (float(v) for v in beta)
    return A, B, c1, c2, sse


def _fast_sse(tt: np.ndarray, y: np.ndarray, t_c: float, m: float, omega: float) -> float:
    """Profiled inner objective: sse of the linear subproblem via normal equations."""
    return _sse_given_dt(t_c - tt, y, m, omega)


def _sse_given_dt(dt: np.ndarray, y: np.ndarray, m: float, omega: float) -> float:
    if dt[-1] <= 0:
        return math.inf
    ldt = np.log(dt)
    pw = np.exp(m * ldt)
    angle = omega * ldt
    X = np.empty((dt.shape[0], 4))
    X[:, 0] = 1.0
    X[:, 1] = pw
    X[:, 2] = pw * np.cos(angle)
    X[:, 3] = pw * np.sin(angle)
    G = X.T @ X
    b = X.T @ y
    try:
        beta = np.linalg.solve(G, b)
    except np.linalg.LinAlgError:
        beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    if not np.all(np.isfinite(beta)):
        return math.inf
    resid = y - X @ beta
    sse = float(resid @ resid)
    return sse if math.isfinite(sse) else math.inf


def classify_sign(fit: FitResult) -> str:
    return sign_of(fit.params.B)


def sign_of(B: float) -> str:
    if B < 0:
        return POSITIVE_BUBBLE
    if B > 0:
        return NEGATIVE_BUBBLE
    return NO_SIGN


def qualify(fit: FitResult, filters: FilterConfig) -> Verdict:
    """Apply every filter; the verdict lists each failed condition."""
    p = fit.params
    w = fit.window
    checks: dict[str, bool] = {}
    checks["m_in_range"] = filters.m_range[0] < p.m < filters.m_range[1]
    checks["omega_in_range"] = filters.omega_range[0] < p.omega < filters.omega_range[1]
    horizon = filters.tc_horizon * w.length
    checks["tc_within_horizon"] = w.t2 < p.t_c <= w.t2 + horizon
    if p.t_c > w.t2:
        n_osc = oscillation_count(p.omega, p.t_c, w.t1, w.t2)
    else:
        n_osc = 0.0
    checks["enough_oscillations"] = n_osc >= filters.min_oscillations
    if filters.max_rmse is not None:
        checks["rmse_below_max"] = fit.rmse <= filters.max_rmse
    if filters.min_line_gain is not None and fit.sse_line is not None:
        checks["beats_trend_line"] = fit.sse <= (1.0 - filters.min_line_gain) * fit.sse_line
    failures = tuple(name for name, ok in checks.items() if not ok)
    return Verdict(qualified=not failures, failures=failures, checks=checks)


def fit_window(
    series: PriceSeries,
    window: FitWindow,
    config: SearchConfig = SearchConfig(),
    filters: FilterConfig = FilterConfig(),
    seed: int = 0,
) -> FitResult:
    """Best-sse calibration of the window via seeded multi-start search.

    Deterministic: identical (series, window, config, filters, seed) give a
    bit-identical result. Ties between equal-sse starts go to the lowest
    start index.
    """
    tt = window.times(series)
    y = window.log_prices(series)
    n = len(tt)
    t2 = window.t2
    wlen = window.length
    tc_span = filters.tc_horizon * wlen

    # normalized coordinates: z = (u, m, omega), t_c = t2 + u * tc_span
    lo = np.array([_TC_MARGIN, filters.m_range[0], filters.omega_range[0]])
    hi = np.array([1.0, filters.m_range[1], filters.omega_range[1]])
    bounds = list(zip(lo, hi))

    # scale-invariant normalization so rel_tol means relative sse
    y_var = float(np.var(y))
    scale = y_var * n if y_var > 0 else 1.0

    # time measured backwards from the window end: invariant under shifting
    # all timestamps, which makes the whole search path translation-exact
    rev = t2 - tt

    def objective(z):
        u, m, omega = z
        return _sse_given_dt(u * tc_span + rev, y, m, omega) / scale

    sampler = qmc.LatinHypercube(d=3, seed=int(seed))
    starts = lo + sampler.random(config.n_starts) * (hi - lo)

    best_sse = math.inf
    best_z = None
    diagnostics = []
    for idx, z0 in enumerate(starts):
        res = minimize(
            objective,
            z0,
            method="Nelder-Mead",
            bounds=bounds,
            options={
                "maxiter": config.max_iter,
                "fatol": config.rel_tol,
                "xatol": 1e-7,
            },
        )
        sse = res.fun * scale
        diagnostics.append({"start": idx, "sse": sse, "converged": bool(res.success)})
        if math.isfinite(sse) and sse < best_sse:
            best_sse = sse
            best_z = res.x

    if best_z is None:
        raise FitError("every restart failed to produce a finite fit", diagnostics)

    # tight polish of the winning start; shrinks stopping scatter so that
    # equivalent inputs (scaled prices, shifted times) land on the same point
    polish = minimize(
        objective,
        best_z,
        method="Nelder-Mead",
        bounds=bounds,
        options={"maxiter": config.max_iter, "fatol": 1e-14, "xatol": 1e-10},
    )
    if math.isfinite(polish.fun) and polish.fun * scale <= best_sse:
        best_z = polish.x

    u, m, omega = best_z
    t_c = t2 + float(u) * tc_span
    A, B, c1, c2, sse = solve_linear(series, window, t_c, float(m), float(omega))
    params = LpplParams.from_linear(t_c, float(m), float(omega), A, B, c1, c2)
    line = np.polynomial.polynomial.polyfit(tt - tt[0], y, 1)
    line_resid = y - np.polynomial.polynomial.polyval(tt - tt[0], line)
    fit = FitResult(
        params=params,
        window=window,
        sse=sse,
        rmse=math.sqrt(sse / n),
        n_points=n,
        qualified=False,
        sign=sign_of(B),
        sse_line=float(line_resid @ line_resid),
    )
    verdict = qualify(fit, filters)
    return replace(
        fit,
        qualified=verdict.qualified,
        failures=verdict.failures,
        checks=verdict.checks,
    )
