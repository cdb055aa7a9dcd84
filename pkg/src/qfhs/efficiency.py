"""Estimation-efficiency analysis over the quantile level.

How precisely can the indirect-GARCH quantile recursion be estimated at a
given level alpha?  Three complementary answers:

* asymptotic covariance sandwiches built from analytic recursion gradients,
  evaluated under a known DGP (the level-comparable "relative" standard
  errors divide out the squared error quantile);
* a finite-sample Monte Carlo of the variance-targeted fit, whose gamma and
  beta estimates need no rescaling;
* a residual bootstrap of the same fit on observed data.

All three produce a standard-error-vs-alpha profile whose argmin suggests
the estimation level; loess smoothing guards the argmin against noise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .caviar import _default_q_init, fit_vt_caviar
from .data import MarketSeries
from .errors import DataError, ParameterError, SingularMatrixError
from .rng import substream
from .simstudy import DgpSpec, simulate_dgp
from .volatility import VolSpec, fit_qml

__all__ = ["RseProfile", "caviar_gradient", "asymptotic_rse_profile",
           "mc_se_experiment", "loess_smooth", "bootstrap_se"]


@dataclass
class RseProfile:
    """Standard errors per parameter on a grid of estimation levels."""

    alpha_grid: np.ndarray
    params: tuple
    se: np.ndarray                      # len(alpha_grid) x len(params)
    smoothed: np.ndarray | None = None
    spans: tuple | None = None
    n_reps: int = 0
    failures: dict = field(default_factory=dict)

    def optimal_alpha(self, smoothed: bool = False) -> dict:
        curves = self.smoothed if smoothed else self.se
        if curves is None:
            raise ParameterError("no smoothed curves on this profile")
        return {p: float(self.alpha_grid[int(np.argmin(curves[:, j]))])
                for j, p in enumerate(self.params)}

    def average_optimal_alpha(self, smoothed: bool = False) -> float:
        vals = self.optimal_alpha(smoothed=smoothed)
        return float(np.mean(list(vals.values())))

    def normalized(self) -> np.ndarray:
        return self.se / np.max(self.se, axis=0, keepdims=True)


# ---------------------------------------------------------------------------
# analytic gradients of the IG recursion
# ---------------------------------------------------------------------------

@njit(cache=True)
def _ig_gradient_rec(r, omega, gamma, beta, q1):
    n = r.shape[0]
    q = np.empty(n)
    grad = np.zeros((n, 3))
    q[0] = q1
    bad = -1
    for t in range(1, n):
        qp = q[t - 1]
        s = omega + gamma * r[t - 1] * r[t - 1] + beta * qp * qp
        if not (s > 0.0 and np.isfinite(s)):
            bad = t
            break
        q[t] = -np.sqrt(s)
        chain = 2.0 * beta * qp
        inv = 1.0 / (2.0 * q[t])
        grad[t, 0] = (1.0 + chain * grad[t - 1, 0]) * inv
        grad[t, 1] = (r[t - 1] * r[t - 1] + chain * grad[t - 1, 1]) * inv
        grad[t, 2] = (qp * qp + chain * grad[t - 1, 2]) * inv
    return q, grad, bad


def caviar_gradient(params: dict, series: MarketSeries,
                    q_init: float | None = None):
    """Per-t analytic gradient of the IG quantile recursion.

    Returns (q_series, gradient) with gradient columns ordered
    (omega, gamma, beta).  The initial quantile is a data constant, so its
    gradient row is zero.
    """
    r = series.returns
    q1 = _default_q_init(r, 0.05) if q_init is None else float(q_init)
    if q1 >= 0:
        raise ParameterError("initial quantile must be negative")
    omega, gamma, beta = (float(params[k]) for k in ("omega", "gamma", "beta"))
    if omega <= 0 or gamma < 0 or beta < 0:
        raise ParameterError("IG coefficients must be nonnegative, omega > 0")
    q, grad, bad = _ig_gradient_rec(r, omega, gamma, beta, q1)
    if bad >= 0:
        raise ParameterError(f"recursion left the admissible region at t={bad}")
    if not np.all(np.isfinite(grad)):
        raise ParameterError("non-finite gradient")
    return q, grad


def _sandwich_se(grad: np.ndarray, h0: np.ndarray, alpha: float, t0: int = 1):
    """Asymptotic SEs from the outer-product sandwich, skipping the seed row."""
    G = grad[t0:]
    w = h0[t0:]
    T = grad.shape[0]
    A = (alpha * (1.0 - alpha) / T) * (G.T @ G)
    D = (G.T * w) @ G / T
    sign, logdet = np.linalg.slogdet(D)
    if sign <= 0 or logdet < -60:
        raise SingularMatrixError("singular D matrix")
    Dinv = np.linalg.inv(D)
    cov = Dinv @ A @ Dinv / T
    return np.sqrt(np.diag(cov))


def asymptotic_rse_profile(dgp: DgpSpec, alpha_grid, n_reps: int,
                           seed: int = 0) -> RseProfile:
    """Relative asymptotic SEs of the implied IG coefficients on a grid.

    Per replicate and level: the implied coefficients are the volatility
    parameters scaled by the squared error quantile m_alpha; the sandwich
    uses the true conditional density of the quantile residual at zero,
    pdf(Q_eps) / sigma_t.  The omega and gamma SEs are divided by m_alpha;
    beta's is left as is.
    """
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    if np.any((alpha_grid <= 0) | (alpha_grid >= 0.5)):
        raise ParameterError("alpha grid must lie in (0, 0.5)")
    rse_sum = np.zeros((len(alpha_grid), 3))
    failures = {}
    sigma1 = math.sqrt(dgp.uncond_variance)
    q_eps = dgp.dist.quantile(alpha_grid)
    f_eps = dgp.dist.pdf(q_eps)
    for rep in range(n_reps):
        rng = substream(seed, "asym", rep)
        r, sigma = simulate_dgp(dgp, rng)
        for i, alpha in enumerate(alpha_grid):
            m = q_eps[i] ** 2
            params = {"omega": dgp.omega * m, "gamma": dgp.gamma * m,
                      "beta": dgp.beta}
            _, grad = caviar_gradient(params, MarketSeries.from_returns(r),
                                      q_init=q_eps[i] * sigma1)
            h0 = f_eps[i] / sigma
            try:
                se = _sandwich_se(grad, h0, alpha)
            except SingularMatrixError as exc:
                raise SingularMatrixError(
                    f"{exc} at alpha={alpha:g}, replicate {rep}"
                ) from None
            rse_sum[i] += np.array([se[0] / m, se[1] / m, se[2]])
    return RseProfile(alpha_grid=alpha_grid, params=("omega_c", "gamma_c", "beta_c"),
                      se=rse_sum / n_reps, n_reps=n_reps, failures=failures)


# ---------------------------------------------------------------------------
# loess with AICc span selection
# ---------------------------------------------------------------------------

def _loess_matrix(x: np.ndarray, span: float, degree: int):
    n = len(x)
    k = int(np.ceil(span * n))
    if k < 4:
        raise DataError(f"span {span:g} gives windows of {k} < 4 points")
    k = min(k, n)
    L = np.zeros((n, n))
    for i in range(n):
        d = np.abs(x - x[i])
        idx = np.argsort(d, kind="stable")[:k]
        dmax = d[idx].max()
        if dmax == 0:
            raise DataError("degenerate window: duplicated x values")
        w = (1.0 - (d[idx] / dmax) ** 3) ** 3
        w = np.clip(w, 0.0, None)
        dx = x[idx] - x[i]
        X = np.vander(dx, degree + 1, increasing=True)
        XtW = X.T * w
        try:
            beta_rows = np.linalg.solve(XtW @ X, XtW)
        except np.linalg.LinAlgError:
            raise DataError(f"rank-deficient window at x={x[i]:g}") from None
        L[i, idx] = beta_rows[0]
    return L


def loess_smooth(x, y, span_candidates=None, degree: int = 2):
    """Local polynomial smoothing; span chosen by bias-corrected AIC.

    Returns (smoothed values, chosen span).  Requires at least 10 points and
    every candidate span to cover at least 4 points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 10:
        raise DataError("need at least 10 points")
    if len(x) != len(y):
        raise DataError("x and y must align")
    if span_candidates is None:
        span_candidates = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    spans = tuple(float(s) for s in span_candidates)
    if any(not 0 < s <= 1 for s in spans):
        raise ParameterError("spans must lie in (0, 1]")
    n = len(x)
    best = None
    for span in spans:
        L = _loess_matrix(x, span, degree)
        fitted = L @ y
        rss = float(np.sum((y - fitted) ** 2))
        tr = float(np.trace(L))
        denom = n - tr - 2.0
        if denom <= 0:
            continue
        aicc = math.log(max(rss, 1e-300) / n) + 2.0 * (tr + 1.0) / denom
        if best is None or aicc < best[0]:
            best = (aicc, span, fitted)
    if best is None:
        raise DataError("no candidate span had enough residual degrees of freedom")
    return best[2], best[1]


# ---------------------------------------------------------------------------
# finite-sample Monte Carlo and residual bootstrap
# ---------------------------------------------------------------------------

def _smooth_columns(alpha_grid, se, spans=None):
    sm = np.empty_like(se)
    chosen = []
    for j in range(se.shape[1]):
        sm[:, j], span = loess_smooth(alpha_grid, se[:, j], spans)
        chosen.append(span)
    return sm, tuple(chosen)


def mc_se_experiment(dgp: DgpSpec, alpha_grid, n_reps: int, seed: int = 0,
                     n_starts: int = 4, smooth: bool = True) -> RseProfile:
    """Monte Carlo SEs of the variance-targeted (gamma, beta) estimates.

    Refits the reparametrized model on ``n_reps`` simulated series at every
    grid level; the profile's SE is the cross-replicate standard deviation.
    Replicates whose fit fails at some level are dropped from that level
    only, with counts recorded.
    """
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    est = np.full((len(alpha_grid), n_reps, 2), np.nan)
    failures = {}
    for rep in range(n_reps):
        rng = substream(seed, "mc", rep)
        r, _ = simulate_dgp(dgp, rng)
        series = MarketSeries.from_returns(r)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            prefit = fit_qml(VolSpec("garch"), series, seed=seed + rep)
            for i, alpha in enumerate(alpha_grid):
                try:
                    fit = fit_vt_caviar(alpha, series, seed=seed + rep,
                                        n_starts=n_starts, prefit=prefit)
                    est[i, rep] = (fit.gamma, fit.beta)
                except Exception:
                    failures[float(alpha)] = failures.get(float(alpha), 0) + 1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        se = np.nanstd(est, axis=1)
    smoothed, spans = (None, None)
    if smooth:
        smoothed, spans = _smooth_columns(alpha_grid, se)
    return RseProfile(alpha_grid=alpha_grid, params=("gamma", "beta"), se=se,
                      smoothed=smoothed, spans=spans, n_reps=n_reps,
                      failures=failures)


@njit(cache=True)
def _vt_resample_returns(eps_draws, q_eps, gamma, beta, s2r):
    n = eps_draws.shape[0]
    omega = (1.0 - gamma - beta) * s2r
    r = np.empty(n)
    s2 = s2r
    for t in range(n):
        if t > 0:
            s2 = omega + gamma * r[t - 1] * r[t - 1] + beta * s2
        r[t] = -(q_eps * np.sqrt(s2)) * eps_draws[t]
    return r


def bootstrap_se(series: MarketSeries, alpha_grid, B: int, seed: int = 0,
                 n_starts: int = 4, smooth: bool = True,
                 min_B: int = 100) -> RseProfile:
    """Residual-bootstrap SEs of the variance-targeted fit on real data.

    At each level the fitted recursion resamples its own scaled residuals
    into ``B`` synthetic return paths, the model is refit on each, and the
    SE is the root mean squared deviation from the bootstrap mean
    (divide-by-B convention).
    """
    if B < min_B:
        raise ParameterError(f"B must be at least {min_B}")
    if len(series) < 1000:
        raise DataError("need at least 1000 observations")
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    se = np.empty((len(alpha_grid), 2))
    failures = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        prefit = fit_qml(VolSpec("garch"), series, seed=seed)
        s2r = float(np.var(series.returns))
        for i, alpha in enumerate(alpha_grid):
            base = fit_vt_caviar(alpha, series, seed=seed, n_starts=n_starts,
                                 prefit=prefit)
            eps = series.returns / (-base.q_series)
            draws = np.full((B, 2), np.nan)
            for b in range(B):
                rng = substream(seed, "boot", i, b)
                idx = rng.integers(0, len(eps), size=len(eps))
                r_star = _vt_resample_returns(eps[idx], base.q_eps, base.gamma,
                                              base.beta, s2r)
                try:
                    refit = fit_vt_caviar(
                        alpha, MarketSeries.from_returns(r_star),
                        seed=seed + b + 1, n_starts=n_starts, prefit=prefit,
                    )
                    draws[b] = (refit.gamma, refit.beta)
                except Exception:
                    failures[(float(alpha), b)] = 1
            ok = draws[~np.isnan(draws[:, 0])]
            if len(ok) < 2:
                raise DataError(f"too few successful bootstrap fits at alpha={alpha:g}")
            se[i] = np.sqrt(np.mean((ok - ok.mean(axis=0)) ** 2, axis=0))
    smoothed, spans = (None, None)
    if smooth:
        smoothed, spans = _smooth_columns(alpha_grid, se)
    return RseProfile(alpha_grid=alpha_grid, params=("gamma", "beta"), se=se,
                      smoothed=smoothed, spans=spans, n_reps=B, failures=failures)
