"""Conditional-quantile (CAViaR) models estimated by quantile loss.

Four families mirror the volatility equations one-to-one: the indirect-GARCH
recursion (IG), its leverage variant (IGJR), and two realized-measure
families whose pseudo-likelihood combines the negative quantile loss with a
Gaussian measurement density on the log range.  The estimation level
``alpha_est`` is a modelling choice, independent of any forecast target.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .data import MarketSeries
from .errors import DataError, FilterError, ParameterError
from .optimize import ParamSpace, jittered_starts, multi_start_minimize
from .rng import substream
from .volatility import VolSpec, VolFit, fit_qml

__all__ = [
    "CaviarSpec", "CaviarFit", "VtCaviarFit", "quantile_loss", "filter_caviar",
    "fit_caviar", "fit_vt_caviar", "objective_components", "coverage_band",
    "CAVIAR_FAMILIES", "CAVIAR_PARAM_NAMES",
]

IG = "ig"
IGJR = "igjr"
REC = "rec"
LOGREC = "logrec"
CAVIAR_FAMILIES = (IG, IGJR, REC, LOGREC)

CAVIAR_PARAM_NAMES = {
    IG: ("omega", "gamma", "beta"),
    IGJR: ("omega", "gamma", "gamma_neg", "beta"),
    REC: ("alpha0", "alpha1", "beta1", "xi", "phi", "tau1", "tau2", "sigma_u2"),
    LOGREC: ("alpha0", "beta1", "tau1", "tau2", "gamma", "xi", "phi", "delta1",
             "delta2", "sigma_u2"),
}

# volatility family whose QML fit seeds each quantile model's starts
_PREFIT_FAMILY = {IG: "garch", IGJR: "gjr", REC: "rgarch", LOGREC: "regarch"}

_LOG2PI = math.log(2.0 * math.pi)

# The quantile recursion starts from an empirical-quantile constant, and the
# resulting transient would otherwise leak a level preference into the
# Gaussian measurement term; the first observations are therefore excluded
# from that term (the quantile loss itself stays full-sample).
MEASUREMENT_BURN = 50


@dataclass(frozen=True)
class CaviarSpec:
    family: str
    alpha_est: float

    def __post_init__(self):
        if self.family not in CAVIAR_FAMILIES:
            raise ParameterError(f"unknown CAViaR family {self.family!r}")
        if not 0.0 < self.alpha_est < 0.5:
            raise ParameterError("alpha_est must lie in (0, 0.5)")

    @property
    def uses_realized(self) -> bool:
        return self.family in (REC, LOGREC)


@dataclass
class CaviarFit:
    spec: CaviarSpec
    params: dict
    q_series: np.ndarray
    u_series: np.ndarray | None
    objective: float
    ql_value: float
    meas_nll: float
    violation_rate: float
    converged: bool = True
    q_init: float = field(default=np.nan)


@dataclass
class VtCaviarFit:
    """Variance-targeted reparametrization with directly readable dynamics."""

    alpha: float
    q_eps: float
    gamma: float
    beta: float
    omega: float
    sigma_series: np.ndarray
    q_series: np.ndarray
    objective: float
    violation_rate: float
    converged: bool = True


def coverage_band(alpha: float, n: int) -> float:
    """Binomial two-sigma band for an in-sample violation rate."""
    return 2.0 * math.sqrt(alpha * (1.0 - alpha) / n)


def quantile_loss(alpha: float, returns, q_series) -> float:
    """Tick-loss sum((alpha - 1{r<q})(r - q)); zero iff r == q everywhere."""
    r = np.asarray(returns, dtype=float)
    q = np.asarray(q_series, dtype=float)
    if r.shape != q.shape:
        raise DataError(f"length mismatch: {r.shape} vs {q.shape}")
    return float(np.sum((alpha - (r < q)) * (r - q)))


# ---------------------------------------------------------------------------
# recursions
# ---------------------------------------------------------------------------

@njit(cache=True)
def _ig_rec(r, omega, gamma, gamma_neg, beta, q1):
    n = r.shape[0]
    q = np.empty(n)
    q[0] = q1
    bad = -1
    for t in range(1, n):
        g = gamma + (gamma_neg if r[t - 1] < 0.0 else 0.0)
        s = omega + g * r[t - 1] * r[t - 1] + beta * q[t - 1] * q[t - 1]
        if not (s > 0.0 and np.isfinite(s)):
            bad = t
            break
        q[t] = -np.sqrt(s)
    return q, bad


@njit(cache=True)
def _rec_rec(r, lx, a0, a1, b1, xi, phi, tau1, tau2, lq1):
    n = r.shape[0]
    q = np.empty(n)
    u = np.empty(n)
    lq = lq1
    bad = -1
    for t in range(n):
        if t > 0:
            lq = a0 + a1 * lx[t - 1] + b1 * lq
        if not np.isfinite(lq) or abs(lq) > 300.0:
            bad = t
            break
        absq = np.exp(lq)
        q[t] = -absq
        eps = r[t] / absq
        u[t] = lx[t] - xi - phi * lq - tau1 * eps - tau2 * eps * eps
    return q, u, bad


@njit(cache=True)
def _logrec_rec(r, lx, a0, b1, tau1, tau2, gam, xi, phi, d1, d2, lq1):
    n = r.shape[0]
    q = np.empty(n)
    u = np.empty(n)
    lq = lq1
    eps_prev = 0.0
    u_prev = 0.0
    bad = -1
    for t in range(n):
        if t > 0:
            lq = a0 + b1 * lq + tau1 * eps_prev + tau2 * eps_prev * eps_prev + gam * u_prev
        if not np.isfinite(lq) or abs(lq) > 300.0:
            bad = t
            break
        absq = np.exp(lq)
        q[t] = -absq
        eps = r[t] / absq
        u[t] = lx[t] - xi - phi * lq - d1 * eps - d2 * eps * eps
        eps_prev = eps
        u_prev = u[t]
    return q, u, bad


@njit(cache=True)
def _vt_rec(r, q_eps, gamma, beta, s2r):
    n = r.shape[0]
    s2 = np.empty(n)
    omega = (1.0 - gamma - beta) * s2r
    s2[0] = s2r
    bad = -1
    for t in range(1, n):
        s2[t] = omega + gamma * r[t - 1] * r[t - 1] + beta * s2[t - 1]
        if not (s2[t] > 0.0 and np.isfinite(s2[t])):
            bad = t
            break
    return s2, bad


def _default_q_init(returns: np.ndarray, alpha: float) -> float:
    head = returns[: min(50, len(returns))]
    q1 = float(np.quantile(head, alpha))
    if q1 >= 0.0:
        q1 = -1e-4 * float(np.std(returns))
    return q1


def _log_x(series: MarketSeries) -> np.ndarray:
    if series.realized is None:
        raise DataError("realized measure required for realized CAViaR families")
    x = series.realized
    if np.any(x <= 0.0):
        raise DataError("realized measure must be strictly positive")
    return np.log(x)


def filter_caviar(spec: CaviarSpec, params: dict, series: MarketSeries,
                  q_init: float | None = None):
    """Run the quantile recursion; returns (q_series, u_series-or-None)."""
    r = series.returns
    q1 = _default_q_init(r, spec.alpha_est) if q_init is None else float(q_init)
    if q1 >= 0.0:
        raise ParameterError("initial quantile must be negative")
    names = CAVIAR_PARAM_NAMES[spec.family]
    missing = [k for k in names if k not in params]
    if missing:
        raise ParameterError(f"{spec.family}: missing parameters {missing}")
    p = [float(params[k]) for k in names]

    if spec.family in (IG, IGJR):
        if spec.family == IG:
            omega, gamma, beta = p
            gamma_neg = 0.0
        else:
            omega, gamma, gamma_neg, beta = p
        if omega <= 0 or gamma < 0 or beta < 0 or gamma_neg < 0:
            raise ParameterError("IG coefficients must be nonnegative, omega > 0")
        q, bad = _ig_rec(r, omega, gamma, gamma_neg, beta, q1)
        if bad >= 0:
            raise FilterError(f"non-finite quantile at t={bad}", t=bad)
        return q, None

    lx = _log_x(series)
    lq1 = math.log(-q1)
    if spec.family == REC:
        q, u, bad = _rec_rec(r, lx, p[0], p[1], p[2], p[3], p[4], p[5], p[6], lq1)
    else:
        q, u, bad = _logrec_rec(r, lx, p[0], p[1], p[2], p[3], p[4], p[5], p[6],
                                p[7], p[8], lq1)
    if bad >= 0:
        raise FilterError(f"non-finite quantile at t={bad}", t=bad)
    return q, u


def _measurement_nll(u: np.ndarray, sigma_u2: float,
                     burn: int = MEASUREMENT_BURN) -> float:
    v = u[burn:]
    return 0.5 * float(np.sum(_LOG2PI + math.log(sigma_u2) + v * v / sigma_u2))


def objective_components(spec: CaviarSpec, params: dict, series: MarketSeries,
                         q_init: float | None = None):
    """(quantile loss, measurement negative log-likelihood) at ``params``."""
    q, u = filter_caviar(spec, params, series, q_init=q_init)
    ql = quantile_loss(spec.alpha_est, series.returns, q)
    if u is None:
        return ql, 0.0
    return ql, _measurement_nll(u, float(params["sigma_u2"]))


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------

def _recenter(family: str, vec: np.ndarray, log_c: float) -> np.ndarray:
    """Shift the quantile level by ``log_c``, re-absorbing it elsewhere.

    Scaling |Q_t| by c maps the residuals to eps/c, which the loadings and
    intercepts soak up exactly (up to the fixed-initial-value transient), so
    the measurement fit is preserved while the quantile loss moves.
    """
    c = math.exp(log_c)
    v = vec.copy()
    if family == REC:
        a0, a1, b1, xi, phi, tau1, tau2, su2 = v
        return np.array([a0 + (1 - b1) * log_c, a1, b1, xi - phi * log_c, phi,
                         tau1 * c, tau2 * c * c, su2])
    a0, b1, tau1, tau2, gam, xi, phi, d1, d2, su2 = v
    return np.array([a0 + (1 - b1) * log_c, b1, tau1 * c, tau2 * c * c, gam,
                     xi - phi * log_c, phi, d1 * c, d2 * c * c, su2])


def _polish_level(objective, result, family, space, rounds: int = 3):
    """Alternate a 1-d level line search with full restarts of the engine.

    The joint pseudo-likelihood has a near-flat ray along quantile-level
    rescalings; Nelder-Mead alone tends to park on it with the level (and
    hence the violation rate) slightly off.
    """
    from .optimize import OptimResult, minimize as _minimize

    scalar_space = ParamSpace(["free"])
    best = result
    for _ in range(rounds):
        vec = best.x
        line = _minimize(lambda lc: objective(_recenter(family, vec, lc[0])),
                         [0.0], scalar_space)
        candidate = _recenter(family, vec, float(line.x[0]))
        polished = _minimize(objective, candidate, space)
        if polished.fun >= best.fun - 1e-9:
            break
        polished.restarts = best.restarts
        polished.nfev += best.nfev + line.nfev
        best = polished
    return best


def _caviar_space(family: str) -> ParamSpace:
    if family == IG:
        return ParamSpace(["positive", "positive", "unit"])
    if family == IGJR:
        return ParamSpace(["positive", "positive", "positive", "unit"])
    if family == REC:
        return ParamSpace(["free", "free", "unit", "free", "free", "free", "free",
                           "positive"])
    return ParamSpace(["free", "unit", "free", "free", "free", "free", "free",
                       "free", "free", "positive"])


def _starts_from_prefit(spec: CaviarSpec, series: MarketSeries, prefit: VolFit):
    """Map a QML volatility fit to the equivalent quantile-model coordinates."""
    alpha = spec.alpha_est
    z_q = float(np.quantile(prefit.z_series, alpha))
    m_abs = max(-z_q, 1e-3)  # |error quantile| implied by the prefit
    log_m = math.log(m_abs)
    p = prefit.params
    if spec.family == IG:
        m2 = m_abs * m_abs
        return np.array([p["omega"] * m2, p["gamma"] * m2, p["beta"]])
    if spec.family == IGJR:
        m2 = m_abs * m_abs
        return np.array([p["omega"] * m2, p["gamma"] * m2,
                         max(p["gamma_neg"], 1e-4) * m2, p["beta"]])
    if spec.family == REC:
        return np.array([
            p["alpha0"] / 2.0 + (1.0 - p["beta1"]) * log_m,
            p["alpha1"],
            p["beta1"],
            p["xi"] / 2.0 - p["phi"] * log_m - p["tau2"] / 2.0,
            p["phi"],
            p["tau1"] * m_abs / 2.0,
            p["tau2"] * m_abs * m_abs / 2.0,
            p["sigma_u2"] / 4.0,
        ])
    return np.array([
        p["alpha0"] / 2.0 + (1.0 - p["beta1"]) * log_m - p["tau2"] / 2.0,
        p["beta1"],
        p["tau1"] * m_abs / 2.0,
        p["tau2"] * m_abs * m_abs / 2.0,
        p["gamma"],
        p["xi"] / 2.0 - p["phi"] * log_m - p["delta2"] / 2.0,
        p["phi"],
        p["delta1"] * m_abs / 2.0,
        p["delta2"] * m_abs * m_abs / 2.0,
        p["sigma_u2"] / 4.0,
    ])


def fit_caviar(spec: CaviarSpec, series: MarketSeries, seed: int = 2024,
               n_starts: int = 10, min_obs: int = 250,
               prefit: VolFit | None = None, measurement_weight: float = 1.0,
               al_scale: bool = False) -> CaviarFit:
    """Quantile-loss (IG/IGJR) or pseudo-likelihood (ReC/logReC) estimation.

    ``prefit`` short-circuits the internal QML pre-fit used to seed the
    multi-start; pass it when fitting several ``alpha_est`` levels on one
    window.  ``measurement_weight`` scales the Gaussian measurement term and
    ``al_scale`` swaps the raw quantile loss for its profiled
    asymmetric-Laplace version (experimentation flags).
    """
    r = series.returns
    if len(r) < min_obs:
        raise DataError(f"need at least {min_obs} observations, got {len(r)}")
    family = spec.family
    alpha = spec.alpha_est
    q1 = _default_q_init(r, alpha)
    lx = _log_x(series) if spec.uses_realized else None
    lq1 = math.log(-q1)
    T = len(r)

    def objective(vec):
        v = np.asarray(vec)
        if family == IG:
            q, bad = _ig_rec(r, v[0], v[1], 0.0, v[2], q1)
            u = None
        elif family == IGJR:
            q, bad = _ig_rec(r, v[0], v[1], v[2], v[3], q1)
            u = None
        elif family == REC:
            q, u, bad = _rec_rec(r, lx, v[0], v[1], v[2], v[3], v[4], v[5], v[6], lq1)
        else:
            q, u, bad = _logrec_rec(r, lx, v[0], v[1], v[2], v[3], v[4], v[5], v[6],
                                    v[7], v[8], lq1)
        if bad >= 0:
            return np.inf
        ql = np.sum((alpha - (r < q)) * (r - q))
        if al_scale:
            ql = T * np.log(ql / T)
        if u is None:
            return ql
        return ql + measurement_weight * _measurement_nll(u, v[-1])

    if prefit is None:
        prefit = fit_qml(VolSpec(_PREFIT_FAMILY[family]), series, seed=seed)
    elif prefit.spec.family != _PREFIT_FAMILY[family]:
        raise ParameterError(
            f"prefit family {prefit.spec.family!r} does not seed {family!r}"
        )
    space = _caviar_space(family)
    base = _starts_from_prefit(spec, series, prefit)
    rng = substream(seed, "caviar", family, int(round(alpha * 1e6)))
    starts = jittered_starts(base, space, n_starts - 1, rng)
    result = multi_start_minimize(objective, starts, space)
    if spec.uses_realized:
        result = _polish_level(objective, result, family, space)

    params = dict(zip(CAVIAR_PARAM_NAMES[family], result.x))
    q, u = filter_caviar(spec, params, series, q_init=q1)
    ql = quantile_loss(alpha, r, q)
    meas = 0.0 if u is None else _measurement_nll(u, params["sigma_u2"])
    viol = float(np.mean(r < q))
    if abs(viol - alpha) > coverage_band(alpha, T):
        warnings.warn(
            f"{family}@{alpha:g}: in-sample violation rate {viol:.4f} outside "
            f"the two-sigma band around {alpha:g}",
            stacklevel=2,
        )
    return CaviarFit(spec=spec, params=params, q_series=q, u_series=u,
                     objective=float(result.fun), ql_value=ql, meas_nll=meas,
                     violation_rate=viol, converged=result.converged, q_init=q1)


def vt_filter(alpha: float, q_eps: float, gamma: float, beta: float,
              series: MarketSeries, s2r: float | None = None):
    """Variance-targeted IG filter; returns (sigma_series, q_series)."""
    if q_eps >= 0:
        raise ParameterError("q_eps must be negative")
    if gamma < 0 or beta < 0 or gamma + beta >= 1:
        raise ParameterError("need gamma, beta >= 0 with gamma + beta < 1")
    r = series.returns
    s2r = float(np.var(r)) if s2r is None else float(s2r)
    s2, bad = _vt_rec(r, q_eps, gamma, beta, s2r)
    if bad >= 0:
        raise FilterError(f"non-finite variance at t={bad}", t=bad)
    sigma = np.sqrt(s2)
    return sigma, q_eps * sigma


def fit_vt_caviar(alpha: float, series: MarketSeries, seed: int = 2024,
                  n_starts: int = 10, min_obs: int = 250,
                  prefit: VolFit | None = None) -> VtCaviarFit:
    """Fit the variance-targeted reparametrization by quantile loss.

    Estimates (error quantile, gamma, beta) directly; the intercept is tied
    to the sample return variance, which identifies the volatility scale.
    """
    if not 0.0 < alpha < 0.5:
        raise ParameterError("alpha must lie in (0, 0.5)")
    r = series.returns
    if len(r) < min_obs:
        raise DataError(f"need at least {min_obs} observations, got {len(r)}")
    s2r = float(np.var(r))

    def objective(vec):
        a, gamma, beta = vec
        s2, bad = _vt_rec(r, -a, gamma, beta, s2r)
        if bad >= 0:
            return np.inf
        q = -a * np.sqrt(s2)
        return np.sum((alpha - (r < q)) * (r - q))

    if prefit is None:
        prefit = fit_qml(VolSpec("garch"), series, seed=seed)
    z_q = float(np.quantile(prefit.z_series, alpha))
    base = np.array([max(-z_q, 1e-3), max(prefit.params["gamma"], 1e-3),
                     min(prefit.params["beta"], 0.995)])
    space = ParamSpace(["positive", "simplex", "simplex"])
    rng = substream(seed, "vt-caviar", int(round(alpha * 1e6)))
    starts = jittered_starts(base, space, n_starts - 1, rng)
    result = multi_start_minimize(objective, starts, space)

    a, gamma, beta = result.x
    sigma, q = vt_filter(alpha, -a, gamma, beta, series, s2r=s2r)
    return VtCaviarFit(
        alpha=alpha, q_eps=float(-a), gamma=float(gamma), beta=float(beta),
        omega=float((1.0 - gamma - beta) * s2r), sigma_series=sigma, q_series=q,
        objective=float(result.fun), violation_rate=float(np.mean(r < q)),
        converged=result.converged,
    )
