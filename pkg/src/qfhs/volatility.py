"""GARCH-family volatility models: QML estimation, filtering, FHS forecasts.

Four families share one surface: plain GARCH(1,1), GJR-GARCH(1,1), and the
log-linear Realized GARCH / Realized EGARCH pair whose measurement equations
tie the latent variance to the intra-day range.  Estimation is Gaussian QML
(joint return + measurement likelihood for the realized families), and
filtered-historical-simulation forecasts resample standardized residuals --
jointly with measurement residuals where those exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .data import MarketSeries
from .errors import DataError, FilterError, ParameterError
from .optimize import ParamSpace, jittered_starts, multi_start_minimize
from .risk import RiskForecast, tail_statistics
from .rng import substream

__all__ = ["VolSpec", "VolFit", "filter_volatility", "fit_qml", "fhs_forecast",
           "next_variance", "FAMILIES", "PARAM_NAMES"]

GARCH = "garch"
GJR = "gjr"
RGARCH = "rgarch"
REGARCH = "regarch"
FAMILIES = (GARCH, GJR, RGARCH, REGARCH)

PARAM_NAMES = {
    GARCH: ("omega", "gamma", "beta"),
    GJR: ("omega", "gamma", "gamma_neg", "beta"),
    RGARCH: ("alpha0", "alpha1", "beta1", "xi", "phi", "tau1", "tau2", "sigma_u2"),
    REGARCH: ("alpha0", "beta1", "tau1", "tau2", "gamma", "xi", "phi", "delta1",
              "delta2", "sigma_u2"),
}

_LOG2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class VolSpec:
    family: str

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown volatility family {self.family!r}")

    @property
    def uses_realized(self) -> bool:
        return self.family in (RGARCH, REGARCH)


@dataclass
class VolFit:
    spec: VolSpec
    params: dict
    sigma_series: np.ndarray
    z_series: np.ndarray
    u_series: np.ndarray | None
    loglik: float
    converged: bool = True
    sigma2_init: float = field(default=np.nan)


# ---------------------------------------------------------------------------
# filters (numba kernels + wrapper)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _garch_rec(r, omega, gamma, gamma_neg, beta, s2_init):
    n = r.shape[0]
    s2 = np.empty(n)
    s2[0] = s2_init
    bad = -1
    for t in range(1, n):
        g = gamma + (gamma_neg if r[t - 1] < 0.0 else 0.0)
        s2[t] = omega + g * r[t - 1] * r[t - 1] + beta * s2[t - 1]
        if not (s2[t] > 0.0 and np.isfinite(s2[t])):
            bad = t
            break
    return s2, bad


@njit(cache=True)
def _rgarch_rec(r, lx2, a0, a1, b1, xi, phi, tau1, tau2, ls2_init):
    n = r.shape[0]
    s2 = np.empty(n)
    u = np.empty(n)
    ls2 = ls2_init
    bad = -1
    for t in range(n):
        if t > 0:
            ls2 = a0 + a1 * lx2[t - 1] + b1 * ls2
        if not np.isfinite(ls2) or abs(ls2) > 300.0:
            bad = t
            break
        s2[t] = np.exp(ls2)
        z = r[t] / np.sqrt(s2[t])
        u[t] = lx2[t] - xi - phi * ls2 - tau1 * z - tau2 * (z * z - 1.0)
    return s2, u, bad


@njit(cache=True)
def _regarch_rec(r, lx2, a0, b1, tau1, tau2, gam, xi, phi, d1, d2, ls2_init):
    n = r.shape[0]
    s2 = np.empty(n)
    u = np.empty(n)
    ls2 = ls2_init
    z_prev = 0.0
    u_prev = 0.0
    bad = -1
    for t in range(n):
        if t > 0:
            ls2 = a0 + b1 * ls2 + tau1 * z_prev + tau2 * (z_prev * z_prev - 1.0) + gam * u_prev
        if not np.isfinite(ls2) or abs(ls2) > 300.0:
            bad = t
            break
        s2[t] = np.exp(ls2)
        z = r[t] / np.sqrt(s2[t])
        u[t] = lx2[t] - xi - phi * ls2 - d1 * z - d2 * (z * z - 1.0)
        z_prev = z
        u_prev = u[t]
    return s2, u, bad


def _param_vector(family: str, params: dict) -> np.ndarray:
    names = PARAM_NAMES[family]
    missing = [k for k in names if k not in params]
    if missing:
        raise ParameterError(f"{family}: missing parameters {missing}")
    return np.array([float(params[k]) for k in names])


def _log_x2(series: MarketSeries) -> np.ndarray:
    if series.realized is None:
        raise DataError("realized measure required for realized families")
    x = series.realized
    if np.any(x <= 0.0):
        raise DataError("realized measure must be strictly positive")
    return 2.0 * np.log(x)


def filter_volatility(spec: VolSpec, params: dict, series: MarketSeries,
                      sigma2_init: float | None = None):
    """Run the family recursion; returns (sigma, z, u-or-None).

    ``sigma2_init`` defaults to the sample variance of the return window.
    """
    r = series.returns
    s2_init = float(np.var(r)) if sigma2_init is None else float(sigma2_init)
    if s2_init <= 0.0:
        raise DataError("initial variance must be positive (constant returns?)")
    p = _param_vector(spec.family, params)

    if spec.family in (GARCH, GJR):
        if spec.family == GARCH:
            omega, gamma, beta = p
            gamma_neg = 0.0
        else:
            omega, gamma, gamma_neg, beta = p
        if omega <= 0 or gamma < 0 or beta < 0 or gamma_neg < 0:
            raise ParameterError("GARCH coefficients must be nonnegative, omega > 0")
        s2, bad = _garch_rec(r, omega, gamma, gamma_neg, beta, s2_init)
        if bad >= 0:
            raise FilterError(f"non-finite variance at t={bad}", t=bad)
        sigma = np.sqrt(s2)
        return sigma, r / sigma, None

    lx2 = _log_x2(series)
    ls2_init = math.log(s2_init)
    if spec.family == RGARCH:
        a0, a1, b1, xi, phi, tau1, tau2, _ = p
        s2, u, bad = _rgarch_rec(r, lx2, a0, a1, b1, xi, phi, tau1, tau2, ls2_init)
    else:
        a0, b1, tau1, tau2, gam, xi, phi, d1, d2, _ = p
        s2, u, bad = _regarch_rec(r, lx2, a0, b1, tau1, tau2, gam, xi, phi, d1, d2,
                                  ls2_init)
    if bad >= 0:
        raise FilterError(f"non-finite variance at t={bad}", t=bad)
    sigma = np.sqrt(s2)
    return sigma, r / sigma, u


def next_variance(fit: VolFit, series: MarketSeries) -> float:
    """One-step-ahead conditional variance from the fitted recursion."""
    p = fit.params
    r_last = series.returns[-1]
    s2_last = fit.sigma_series[-1] ** 2
    if fit.spec.family in (GARCH, GJR):
        g = p["gamma"] + (p.get("gamma_neg", 0.0) if r_last < 0 else 0.0)
        return p["omega"] + g * r_last**2 + p["beta"] * s2_last
    if fit.spec.family == RGARCH:
        lx2_last = 2.0 * math.log(series.realized[-1])
        return math.exp(p["alpha0"] + p["alpha1"] * lx2_last
                        + p["beta1"] * math.log(s2_last))
    z_last = fit.z_series[-1]
    u_last = fit.u_series[-1]
    return math.exp(p["alpha0"] + p["beta1"] * math.log(s2_last)
                    + p["tau1"] * z_last + p["tau2"] * (z_last**2 - 1.0)
                    + p["gamma"] * u_last)


# ---------------------------------------------------------------------------
# QML estimation
# ---------------------------------------------------------------------------

def _gaussian_loglik(r, sigma2):
    return -0.5 * np.sum(_LOG2PI + np.log(sigma2) + r * r / sigma2)


def _measurement_loglik(u, sigma_u2):
    return -0.5 * np.sum(_LOG2PI + math.log(sigma_u2) + u * u / sigma_u2)


def _space_and_start(family: str, series: MarketSeries):
    s2 = float(np.var(series.returns))
    if family == GARCH:
        space = ParamSpace(["positive", "simplex", "simplex"])
        start = np.array([0.05 * s2, 0.05, 0.90])
        return space, start
    if family == GJR:
        # gamma, gamma_neg/2, beta share the stationarity simplex
        space = ParamSpace(["positive", "simplex", "simplex", "simplex"])
        start = np.array([0.05 * s2, 0.03, 0.02, 0.90])
        return space, start
    lx2 = _log_x2(series)
    m_x = float(np.mean(lx2))
    v_x = float(np.var(lx2))
    ls2 = math.log(s2)
    if family == RGARCH:
        # order: alpha0, alpha1, beta1, xi, phi, tau1, tau2, sigma_u2
        space = ParamSpace(["free", "free", "unit", "free", "free", "free", "free",
                            "positive"])
        start = np.array([(1 - 0.7) * ls2 - 0.25 * m_x, 0.25, 0.7,
                          m_x - ls2, 1.0, -0.05, 0.05, 0.5 * v_x])
        return space, start
    # order: alpha0, beta1, tau1, tau2, gamma, xi, phi, delta1, delta2, sigma_u2
    space = ParamSpace(["free", "unit", "free", "free", "free", "free", "free",
                        "free", "free", "positive"])
    start = np.array([(1 - 0.95) * ls2, 0.95, -0.05, 0.02, 0.3,
                      m_x - ls2, 1.0, -0.05, 0.05, 0.5 * v_x])
    return space, start


def _vector_to_opt(family, vec):
    """Model params -> optimizer coordinates (GJR halves the leverage term)."""
    if family == GJR:
        out = vec.copy()
        out[2] = vec[2] / 2.0
        return out
    return vec


def _opt_to_vector(family, vec):
    if family == GJR:
        out = vec.copy()
        out[2] = vec[2] * 2.0
        return out
    return vec


def fit_qml(spec: VolSpec, series: MarketSeries, seed: int = 2024,
            n_starts: int = 10, min_obs: int = 250) -> VolFit:
    """Gaussian QML fit; realized families maximize the joint likelihood."""
    r = series.returns
    if len(r) < min_obs:
        raise DataError(f"need at least {min_obs} observations, got {len(r)}")
    if np.all(r == r[0]):
        raise DataError("returns are constant; variance model is degenerate")
    family = spec.family
    space, start = _space_and_start(family, series)
    s2_init = float(np.var(r))
    lx2 = _log_x2(series) if spec.uses_realized else None
    ls2_init = math.log(s2_init)

    def objective(opt_vec):
        vec = _opt_to_vector(family, np.asarray(opt_vec))
        if family == GARCH:
            s2, bad = _garch_rec(r, vec[0], vec[1], 0.0, vec[2], s2_init)
            if bad >= 0:
                return np.inf
            return -_gaussian_loglik(r, s2)
        if family == GJR:
            s2, bad = _garch_rec(r, vec[0], vec[1], vec[2], vec[3], s2_init)
            if bad >= 0:
                return np.inf
            return -_gaussian_loglik(r, s2)
        if family == RGARCH:
            s2, u, bad = _rgarch_rec(r, lx2, vec[0], vec[1], vec[2], vec[3], vec[4],
                                     vec[5], vec[6], ls2_init)
            if bad >= 0:
                return np.inf
            return -(_gaussian_loglik(r, s2) + _measurement_loglik(u, vec[7]))
        s2, u, bad = _regarch_rec(r, lx2, vec[0], vec[1], vec[2], vec[3], vec[4],
                                  vec[5], vec[6], vec[7], vec[8], ls2_init)
        if bad >= 0:
            return np.inf
        return -(_gaussian_loglik(r, s2) + _measurement_loglik(u, vec[9]))

    rng = substream(seed, "qml", family)
    starts = jittered_starts(_vector_to_opt(family, start), space, n_starts - 1, rng)
    result = multi_start_minimize(objective, starts, space)
    vec = _opt_to_vector(family, result.x)
    params = dict(zip(PARAM_NAMES[family], vec))
    sigma, z, u = filter_volatility(spec, params, series, sigma2_init=s2_init)
    return VolFit(spec=spec, params=params, sigma_series=sigma, z_series=z,
                  u_series=u, loglik=-result.fun, converged=result.converged,
                  sigma2_init=s2_init)


# ---------------------------------------------------------------------------
# FHS forecasting
# ---------------------------------------------------------------------------

@njit(cache=True)
def _garch_paths(zmat, omega, gamma, gamma_neg, beta, s2_first):
    m, h = zmat.shape
    out = np.empty(m)
    for j in range(m):
        s2 = s2_first
        acc = 0.0
        for t in range(h):
            r = np.sqrt(s2) * zmat[j, t]
            acc += r
            g = gamma + (gamma_neg if r < 0.0 else 0.0)
            s2 = omega + g * r * r + beta * s2
        out[j] = acc
    return out


@njit(cache=True)
def _rgarch_paths(zmat, umat, a0, a1, b1, xi, phi, tau1, tau2, ls2_first):
    m, h = zmat.shape
    out = np.empty(m)
    for j in range(m):
        ls2 = ls2_first
        acc = 0.0
        for t in range(h):
            z = zmat[j, t]
            acc += np.exp(0.5 * ls2) * z
            lx2 = xi + phi * ls2 + tau1 * z + tau2 * (z * z - 1.0) + umat[j, t]
            ls2 = a0 + a1 * lx2 + b1 * ls2
        out[j] = acc
    return out


@njit(cache=True)
def _regarch_paths(zmat, umat, a0, b1, tau1, tau2, gam, z_last, u_last, ls2_first):
    m, h = zmat.shape
    out = np.empty(m)
    for j in range(m):
        ls2 = ls2_first
        zp = z_last
        up = u_last
        acc = 0.0
        for t in range(h):
            if t > 0:
                ls2 = a0 + b1 * ls2 + tau1 * zp + tau2 * (zp * zp - 1.0) + gam * up
            z = zmat[j, t]
            acc += np.exp(0.5 * ls2) * z
            zp = z
            up = umat[j, t]
        out[j] = acc
    return out


def _check_paths_finite(cum):
    bad = np.flatnonzero(~np.isfinite(cum))
    if bad.size:
        raise FilterError(f"non-finite simulated path at index {bad[0]}", t=int(bad[0]))


def fhs_forecast(fit: VolFit, series: MarketSeries, h: int, M: int, alpha0: float,
                 seed: int = 0, exhaustive: bool = False,
                 gaussian_u: bool = False) -> RiskForecast:
    """Filtered-historical-simulation VaR/ES forecast.

    ``h=1`` with ``exhaustive=True`` applies the empirical tail of the full
    residual set; otherwise ``M`` iid resamples drive the recursion forward,
    with (z, u) pairs resampled jointly for the realized families (or u drawn
    from N(0, sigma_u2) when ``gaussian_u``).
    """
    if not 0.0 < alpha0 < 0.5:
        raise ParameterError("alpha0 must lie in (0, 0.5)")
    z_pool = fit.z_series
    n = len(z_pool)
    origin = series.dates[-1] if len(series.dates) else None
    s2_next = next_variance(fit, series)
    p = fit.params

    if exhaustive:
        if h != 1:
            raise ParameterError("exhaustive residual use is defined for h=1 only")
        sims = math.sqrt(s2_next) * z_pool
        var, es = tail_statistics(sims, alpha0)
        return RiskForecast(origin, 1, alpha0, var, es, float(np.std(sims)), n, seed)

    if M < 1000:
        raise ParameterError("M must be at least 1000")
    rng = substream(seed, "fhs", fit.spec.family, h)
    idx = rng.integers(0, n, size=(M, h))
    zmat = z_pool[idx]
    if fit.spec.family in (GARCH, GJR):
        cum = _garch_paths(zmat, p["omega"], p["gamma"], p.get("gamma_neg", 0.0),
                           p["beta"], s2_next)
    else:
        if gaussian_u:
            umat = math.sqrt(p["sigma_u2"]) * rng.standard_normal((M, h))
        else:
            umat = fit.u_series[idx]
        if fit.spec.family == RGARCH:
            cum = _rgarch_paths(zmat, umat, p["alpha0"], p["alpha1"], p["beta1"],
                                p["xi"], p["phi"], p["tau1"], p["tau2"],
                                math.log(s2_next))
        else:
            cum = _regarch_paths(zmat, umat, p["alpha0"], p["beta1"], p["tau1"],
                                 p["tau2"], p["gamma"], fit.z_series[-1],
                                 fit.u_series[-1], math.log(s2_next))
    _check_paths_finite(cum)
    var, es = tail_statistics(cum, alpha0)
    return RiskForecast(origin, h, alpha0, var, es, float(np.std(cum)), M, seed)
