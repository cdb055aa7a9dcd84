"""Quantile-filtered historical simulation forecasting.

Returns scaled by the negated fitted quantile series form an iid residual
pool whose alpha_est-quantile is -1 by construction.  Resampling that pool
through the fitted quantile recursion generates the multi-step return
distribution, from which VaR, ES and volatility forecasts at any target
level alpha0 are read off -- alpha0 need not equal alpha_est.

The one-step regression ES estimator (exceedance returns regressed on their
quantiles) is included both as a baseline and because the exhaustive
one-step resampling scheme reproduces its tail-average variant exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .caviar import IG, IGJR, LOGREC, REC, CaviarFit
from .data import MarketSeries
from .errors import (EmptyTailError, FilterError, InsufficientExceedancesError,
                     ParameterError)
from .risk import RiskForecast, tail_statistics
from .rng import substream

__all__ = ["ScaledResiduals", "EsRegression", "scaled_residuals", "next_quantile",
           "qfhs_forecast", "em_regression_es"]


@dataclass
class ScaledResiduals:
    eps_series: np.ndarray
    alpha_est: float


@dataclass
class EsRegression:
    delta: float
    es_forecast: float
    n_exceedances: int


def scaled_residuals(fit: CaviarFit, series: MarketSeries) -> ScaledResiduals:
    """eps_t = r_t / (-Q_t); the alpha_est-quantile of the pool is -1."""
    q = fit.q_series
    if np.any(q == 0.0):
        raise FilterError("quantile series touches zero", t=int(np.argmax(q == 0.0)))
    return ScaledResiduals(series.returns / (-q), fit.spec.alpha_est)


def next_quantile(fit: CaviarFit, series: MarketSeries) -> float:
    """One-step-ahead conditional quantile from the fitted recursion."""
    p = fit.params
    r_last = series.returns[-1]
    q_last = fit.q_series[-1]
    family = fit.spec.family
    if family in (IG, IGJR):
        g = p["gamma"] + (p.get("gamma_neg", 0.0) if r_last < 0 else 0.0)
        return -math.sqrt(p["omega"] + g * r_last**2 + p["beta"] * q_last**2)
    if family == REC:
        lq = (p["alpha0"] + p["alpha1"] * math.log(series.realized[-1])
              + p["beta1"] * math.log(-q_last))
        return -math.exp(lq)
    eps_last = r_last / (-q_last)
    lq = (p["alpha0"] + p["beta1"] * math.log(-q_last) + p["tau1"] * eps_last
          + p["tau2"] * eps_last**2 + p["gamma"] * fit.u_series[-1])
    return -math.exp(lq)


# ---------------------------------------------------------------------------
# path kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def _ig_qpaths(emat, omega, gamma, gamma_neg, beta, q_next):
    m, h = emat.shape
    out = np.empty(m)
    for j in range(m):
        q = q_next
        acc = 0.0
        for t in range(h):
            r = -q * emat[j, t]
            acc += r
            g = gamma + (gamma_neg if r < 0.0 else 0.0)
            q = -np.sqrt(omega + g * r * r + beta * q * q)
        out[j] = acc
    return out


@njit(cache=True)
def _rec_qpaths(emat, umat, a0, a1, b1, xi, phi, tau1, tau2, lq_next):
    m, h = emat.shape
    out = np.empty(m)
    for j in range(m):
        lq = lq_next
        acc = 0.0
        for t in range(h):
            eps = emat[j, t]
            acc += np.exp(lq) * eps
            lx = xi + phi * lq + tau1 * eps + tau2 * eps * eps + umat[j, t]
            lq = a0 + a1 * lx + b1 * lq
        out[j] = acc
    return out


@njit(cache=True)
def _logrec_qpaths(emat, umat, a0, b1, tau1, tau2, gam, lq_next):
    m, h = emat.shape
    out = np.empty(m)
    for j in range(m):
        lq = lq_next
        ep = 0.0
        up = 0.0
        acc = 0.0
        for t in range(h):
            if t > 0:
                lq = a0 + b1 * lq + tau1 * ep + tau2 * ep * ep + gam * up
            eps = emat[j, t]
            acc += np.exp(lq) * eps
            ep = eps
            up = umat[j, t]
        out[j] = acc
    return out


def _simulate_cumulated(fit: CaviarFit, emat, umat, q_next: float) -> np.ndarray:
    p = fit.params
    family = fit.spec.family
    if family in (IG, IGJR):
        cum = _ig_qpaths(emat, p["omega"], p["gamma"], p.get("gamma_neg", 0.0),
                         p["beta"], q_next)
    elif family == REC:
        cum = _rec_qpaths(emat, umat, p["alpha0"], p["alpha1"], p["beta1"], p["xi"],
                          p["phi"], p["tau1"], p["tau2"], math.log(-q_next))
    else:
        cum = _logrec_qpaths(emat, umat, p["alpha0"], p["beta1"], p["tau1"],
                             p["tau2"], p["gamma"], math.log(-q_next))
    bad = np.flatnonzero(~np.isfinite(cum))
    if bad.size:
        raise FilterError(f"non-finite simulated path at index {bad[0]}",
                          t=int(bad[0]))
    return cum


def qfhs_forecast(fit: CaviarFit, series: MarketSeries, h: int, M: int,
                  alpha0: float, seed: int = 0, exhaustive: bool = False,
                  gaussian_u: bool = False) -> RiskForecast:
    """VaR/ES/volatility forecast by resampling quantile-scaled residuals.

    Each path draws residuals iid from the pool, maps them to returns via the
    one-step quantile forecast, feeds the simulated return back into the
    recursion, and cumulates ``h`` steps; VaR and ES are the negated
    empirical tail of the ``M`` cumulated sums at level ``alpha0``.

    ``exhaustive=True`` (h=1 only, ``alpha0`` = estimation level) uses each
    in-sample residual exactly once, with the ES tail taken below the model's
    own one-step quantile -- the configuration that matches the regression ES
    estimator's tail average.  Realized families resample (eps, u) pairs
    jointly so the measurement equation can synthesize future ranges; pass
    ``gaussian_u=True`` to draw u from its fitted normal instead.
    """
    if not 0.0 < alpha0 < 0.5:
        raise ParameterError("alpha0 must lie in (0, 0.5)")
    if h < 1:
        raise ParameterError("horizon must be >= 1")
    eps_pool = scaled_residuals(fit, series).eps_series
    n = len(eps_pool)
    q_next = next_quantile(fit, series)
    origin = series.dates[-1] if len(series.dates) else None

    if exhaustive:
        if h != 1:
            raise ParameterError("exhaustive residual use is defined for h=1 only")
        if abs(alpha0 - fit.spec.alpha_est) > 1e-12:
            raise ParameterError("exhaustive mode requires alpha0 == alpha_est")
        sims = -q_next * eps_pool
        k = int(np.floor(alpha0 * n))
        if k < 1:
            raise EmptyTailError(f"alpha0={alpha0} leaves an empty tail at n={n}")
        var = -float(np.partition(sims, k - 1)[k - 1])
        tail = sims[sims < q_next]  # residuals below -1: the exceedance image
        if tail.size == 0:
            raise EmptyTailError("no residuals below -1 in the pool")
        es = -float(np.mean(tail))
        return RiskForecast(origin, 1, alpha0, var, es, float(np.std(sims)), n, seed)

    if M < 1000:
        raise ParameterError("M must be at least 1000")
    rng = substream(seed, "qfhs", fit.spec.family, h)
    idx = rng.integers(0, n, size=(M, h))
    emat = eps_pool[idx]
    umat = None
    if fit.spec.family in (REC, LOGREC):
        if gaussian_u:
            umat = math.sqrt(fit.params["sigma_u2"]) * rng.standard_normal((M, h))
        else:
            umat = fit.u_series[idx]
    cum = _simulate_cumulated(fit, emat, umat, q_next)
    var, es = tail_statistics(cum, alpha0)
    return RiskForecast(origin, h, alpha0, var, es, float(np.std(cum)), M, seed)


def em_regression_es(fit: CaviarFit, series: MarketSeries,
                     estimator: str = "ols", min_exceedances: int = 10) -> EsRegression:
    """One-step ES from regressing exceedance returns on their quantiles.

    ``estimator="ols"`` uses the no-intercept least-squares slope
    sum(q r) / sum(q^2); ``"tail_average"`` uses the plain mean of r/q over
    the exceedances.  The two coincide only under equal weighting.
    """
    if estimator not in ("ols", "tail_average"):
        raise ParameterError(f"unknown estimator {estimator!r}")
    r = series.returns
    q = fit.q_series
    mask = r < q
    n_exc = int(np.sum(mask))
    if n_exc < min_exceedances:
        raise InsufficientExceedancesError(
            f"{n_exc} exceedance(s); need at least {min_exceedances}"
        )
    re, qe = r[mask], q[mask]
    if estimator == "ols":
        delta = float(np.sum(qe * re) / np.sum(qe * qe))
    else:
        delta = float(np.mean(re / qe))
    es = -delta * next_quantile(fit, series)
    return EsRegression(delta=delta, es_forecast=es, n_exceedances=n_exc)
