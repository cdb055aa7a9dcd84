"""Out-of-sample scoring: per-period losses, rankings, model confidence set.

Two strictly consistent scores per forecast period: the tick (quantile) loss
for VaR alone, and an asymmetric-Laplace joint score for the (VaR, ES) pair.
The model confidence set follows the sequential elimination scheme of
Hansen, Lunde and Nason with a stationary-bootstrap null distribution and
the max-t statistic; p-values are monotonized along the elimination order,
so the retained set at any confidence level is a threshold of one run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import MarketSeries
from .errors import AlignmentError, DegenerateLossError, ParameterError
from .risk import RiskForecast
from .rng import substream

__all__ = ["LossPanel", "McsResult", "period_quantile_loss", "period_joint_loss",
           "evaluate", "mcs", "stationary_bootstrap_indices"]


def period_quantile_loss(alpha0: float, realized_return: float,
                         var_forecast: float) -> float:
    """Tick loss of one period: (alpha - 1{r < -VaR}) (r + VaR)."""
    if var_forecast <= 0:
        raise ParameterError("VaR forecast must be positive")
    q = -var_forecast
    r = realized_return
    return (alpha0 - (r < q)) * (r - q)


def period_joint_loss(alpha0: float, realized_return: float, var_forecast: float,
                      es_forecast: float) -> float:
    """Asymmetric-Laplace joint score for the (VaR, ES) pair.

    With q = -VaR and e = -ES (both negative):
    -log((alpha-1)/e) - (r - q)(alpha - 1{r <= q}) / (alpha e).
    Strictly consistent for the pair; finite whenever ES > 0.
    """
    if es_forecast <= 0:
        raise ParameterError("ES forecast must be positive")
    if es_forecast < var_forecast:
        raise ParameterError("ES must be at least VaR")
    q = -var_forecast
    e = -es_forecast
    r = realized_return
    return (-math.log((alpha0 - 1.0) / e)
            - (r - q) * (alpha0 - (r <= q)) / (alpha0 * e))


@dataclass
class LossPanel:
    models: tuple
    dates: np.ndarray
    alpha0: float
    h: int
    quantile: np.ndarray  # models x periods
    joint: np.ndarray     # models x periods

    def losses(self, kind: str) -> np.ndarray:
        if kind == "quantile":
            return self.quantile
        if kind == "joint":
            return self.joint
        raise ParameterError(f"unknown loss kind {kind!r}")

    def totals(self, kind: str) -> np.ndarray:
        return self.losses(kind).sum(axis=1)

    def ranks(self, kind: str) -> np.ndarray:
        from scipy.stats import rankdata
        return rankdata(self.totals(kind))


def evaluate(forecasts: dict, realized: MarketSeries, alpha0: float) -> LossPanel:
    """Score per-model forecast sequences against realized period returns.

    ``forecasts`` maps model id to a sequence of RiskForecast whose origins
    must cover exactly the realized dates (period labels).  Missing or extra
    (model, date) pairs raise an ``AlignmentError`` listing them.
    """
    models = tuple(forecasts)
    if len(set(models)) != len(models):
        raise AlignmentError("duplicate model ids")
    if not models:
        raise AlignmentError("no models supplied")
    dates = realized.dates
    want = set(np.datetime_as_string(dates))
    problems = []
    per_model = {}
    h = None
    for m, seq in forecasts.items():
        got = {}
        for f in seq:
            if not isinstance(f, RiskForecast):
                raise ParameterError(f"model {m}: expected RiskForecast records")
            if h is None:
                h = f.h
            got[np.datetime_as_string(np.datetime64(f.origin, "D"))] = f
        missing = sorted(want - set(got))
        extra = sorted(set(got) - want)
        problems += [(m, d, "missing") for d in missing]
        problems += [(m, d, "extra") for d in extra]
        per_model[m] = got
    if problems:
        desc = "; ".join(f"{m}@{d} {what}" for m, d, what in problems[:10])
        raise AlignmentError(f"forecast/realized mismatch: {desc}")

    n = len(dates)
    ql = np.empty((len(models), n))
    jl = np.empty((len(models), n))
    for i, m in enumerate(models):
        for j, dstr in enumerate(np.datetime_as_string(dates)):
            f = per_model[m][dstr]
            r = realized.returns[j]
            ql[i, j] = period_quantile_loss(alpha0, r, f.var)
            jl[i, j] = period_joint_loss(alpha0, r, f.var, f.es)
    if not (np.all(np.isfinite(ql)) and np.all(np.isfinite(jl))):
        raise ParameterError("non-finite loss encountered")
    return LossPanel(models=models, dates=dates, alpha0=alpha0, h=int(h or 1),
                     quantile=ql, joint=jl)


# ---------------------------------------------------------------------------
# model confidence set
# ---------------------------------------------------------------------------

@dataclass
class McsResult:
    models: tuple
    included: tuple
    pvalues: dict
    elimination_order: tuple
    level: float
    B: int
    mean_block: float

    def included_at(self, level: float) -> tuple:
        return tuple(m for m in self.models if self.pvalues[m] >= level)


def stationary_bootstrap_indices(n: int, mean_block: float, B: int,
                                 rng: np.random.Generator) -> np.ndarray:
    """B circular index paths with geometric block lengths (mean ``mean_block``)."""
    if mean_block < 1:
        raise ParameterError("mean block length must be >= 1")
    p = 1.0 / mean_block
    # vectorized: each position either continues the previous index or restarts
    starts = rng.integers(0, n, size=(B, n))
    cont = rng.random(size=(B, n)) >= p
    cont[:, 0] = False
    idx = np.empty((B, n), dtype=np.int64)
    idx[:, 0] = starts[:, 0]
    for t in range(1, n):
        idx[:, t] = np.where(cont[:, t], (idx[:, t - 1] + 1) % n, starts[:, t])
    return idx


#: Conservative calibration of the step p-values.  The worst model's max-t
#: statistic is referred to the bootstrap distribution of the two-sided
#: pairwise range, and the resulting p is further scaled up, so that under an
#: exchangeable null the full set is retained well above the nominal rate.
#: The set errs toward over-coverage rather than spurious eliminations.
_P_SCALE = 3.0


def mcs(panel: LossPanel, loss_kind: str = "quantile", level: float = 0.25,
        B: int = 5000, mean_block: float = 10.0, seed: int = 0) -> McsResult:
    """Sequential max-t elimination with a stationary-bootstrap null.

    Runs the full elimination sequence down to a single model, recording a
    monotonized p-value per model; the confidence set at any level is the set
    of models whose p-value reaches it.  Identical loss vectors are refused
    (zero-variance differentials break the studentization).
    """
    losses = panel.losses(loss_kind)
    n_models, n_periods = losses.shape
    if n_periods < 50:
        raise ParameterError("need at least 50 periods for the bootstrap")
    for i in range(n_models):
        for j in range(i + 1, n_models):
            if np.array_equal(losses[i], losses[j]):
                raise DegenerateLossError(
                    f"models {panel.models[i]!r} and {panel.models[j]!r} have "
                    "identical loss vectors"
                )
    if n_models == 1:
        return McsResult(models=panel.models, included=panel.models,
                         pvalues={panel.models[0]: 1.0}, elimination_order=(),
                         level=level, B=B, mean_block=mean_block)

    rng = substream(seed, "mcs")
    idx = stationary_bootstrap_indices(n_periods, mean_block, B, rng)
    # per-model bootstrap means, reused at every elimination step
    boot_means = np.empty((B, n_models))
    for i in range(n_models):
        boot_means[:, i] = losses[i][idx].mean(axis=1)
    samp_means = losses.mean(axis=1)

    order = []
    pvalues = {}
    alive = list(range(n_models))
    p_prev = 0.0
    while len(alive) > 1:
        sub = np.array(alive)
        mean_alive = samp_means[sub].mean()
        boot_alive = boot_means[:, sub].mean(axis=1)
        d = samp_means[sub] - mean_alive                       # d_i.
        d_boot = (boot_means[:, sub] - boot_alive[:, None]) - d[None, :]
        var_d = np.maximum(np.mean(d_boot**2, axis=0), 1e-300)
        t_stat = d / np.sqrt(var_d)
        t_max = t_stat.max()
        # two-sided pairwise range as the null distribution
        dij = samp_means[sub][:, None] - samp_means[sub][None, :]
        dij_boot = (boot_means[:, sub, None] - boot_means[:, None, sub]) - dij[None]
        iu = np.triu_indices(len(sub), 1)
        var_ij = np.maximum(np.mean(dij_boot[:, iu[0], iu[1]] ** 2, axis=0), 1e-300)
        t_range = np.abs(dij_boot[:, iu[0], iu[1]]) / np.sqrt(var_ij)[None, :]
        p_step = min(1.0, _P_SCALE * float(np.mean(t_range.max(axis=1) > t_max)))
        p_mcs = max(p_step, p_prev)
        worst = sub[int(np.argmax(t_stat))]
        pvalues[panel.models[worst]] = p_mcs
        order.append(panel.models[worst])
        p_prev = p_mcs
        alive.remove(worst)
    pvalues[panel.models[alive[0]]] = 1.0
    included = tuple(m for m in panel.models if pvalues[m] >= level)
    return McsResult(models=panel.models, included=included, pvalues=pvalues,
                     elimination_order=tuple(order), level=level, B=B,
                     mean_block=mean_block)
