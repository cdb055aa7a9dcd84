"""Command-line orchestration of forecasting and study pipelines.

One JSON config file drives every command; seeds are fixed in the config so
reruns are byte-identical.  The rolling ``forecast`` command persists each
(model, window) fit in a cache directory keyed by a content hash, which makes
interrupted runs resumable without changing their output.

Commands: simulate, fit, forecast, backtest, study-accuracy, study-alpha,
bootstrap-alpha.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import backtest as bt
from .caviar import CAVIAR_FAMILIES, CaviarSpec, fit_caviar
from .data import (MarketSeries, aggregate_nonoverlapping, load_ohlc,
                   read_market_csv, split, to_market_series, write_market_csv)
from .distributions import parse_distribution
from .efficiency import asymptotic_rse_profile, bootstrap_se, mc_se_experiment
from .errors import ConfigError, QfhsError
from .forecast import qfhs_forecast
from .risk import RiskForecast
from .simstudy import DgpSpec, StudyConfig, run_accuracy_study, simulate_market
from .svgplot import line_chart
from .volatility import FAMILIES as VOL_FAMILIES
from .volatility import VolSpec, fhs_forecast, fit_qml

FHS_KINDS = {"ghs": "garch", "gjhs": "gjr", "rghs": "rgarch", "reghs": "regarch"}


@dataclass
class ModelEntry:
    name: str
    kind: str
    alpha_est: float | None = None

    @property
    def is_quantile(self) -> bool:
        return self.kind in CAVIAR_FAMILIES


@dataclass
class Config:
    seed: int = 0
    out_dir: str = "out"
    horizon: int = 1
    alpha0: tuple = (0.01, 0.025)
    data: dict = field(default_factory=dict)
    models: tuple = ()
    forecast: dict = field(default_factory=dict)
    backtest: dict = field(default_factory=dict)
    accuracy: dict = field(default_factory=dict)
    alpha_study: dict = field(default_factory=dict)
    bootstrap_alpha: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed, "out_dir": self.out_dir, "horizon": self.horizon,
            "alpha0": list(self.alpha0), "data": self.data,
            "models": [
                {k: v for k, v in
                 (("name", m.name), ("kind", m.kind), ("alpha_est", m.alpha_est))
                 if v is not None}
                for m in self.models
            ],
            "forecast": self.forecast, "backtest": self.backtest,
            "accuracy": self.accuracy, "alpha_study": self.alpha_study,
            "bootstrap_alpha": self.bootstrap_alpha,
        }


def _expect(obj, key, types, where, default=None, required=False):
    if key not in obj:
        if required:
            raise ConfigError("required field missing", field=f"{where}.{key}")
        return default
    val = obj[key]
    if not isinstance(val, types):
        raise ConfigError(
            f"expected {getattr(types, '__name__', types)}, got {type(val).__name__}",
            field=f"{where}.{key}",
        )
    return val


def parse_config(raw: dict) -> Config:
    if not isinstance(raw, dict):
        raise ConfigError("top-level config must be an object", field="$")
    models = []
    for i, m in enumerate(raw.get("models", [])):
        where = f"models[{i}]"
        if not isinstance(m, dict):
            raise ConfigError("model entry must be an object", field=where)
        kind = _expect(m, "kind", str, where, required=True)
        if kind not in FHS_KINDS and kind not in CAVIAR_FAMILIES:
            raise ConfigError(f"unknown model kind {kind!r}", field=f"{where}.kind")
        alpha_est = _expect(m, "alpha_est", (int, float), where)
        if kind in CAVIAR_FAMILIES and alpha_est is None:
            raise ConfigError("quantile models need alpha_est",
                              field=f"{where}.alpha_est")
        name = _expect(m, "name", str, where, required=True)
        models.append(ModelEntry(name=name, kind=kind,
                                 alpha_est=None if alpha_est is None
                                 else float(alpha_est)))
    names = [m.name for m in models]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate model names", field="models")
    alpha0 = tuple(float(a) for a in raw.get("alpha0", [0.01, 0.025]))
    return Config(
        seed=int(_expect(raw, "seed", int, "$", default=0)),
        out_dir=str(_expect(raw, "out_dir", str, "$", default="out")),
        horizon=int(_expect(raw, "horizon", int, "$", default=1)),
        alpha0=alpha0,
        data=_expect(raw, "data", dict, "$", default={}),
        models=tuple(models),
        forecast=_expect(raw, "forecast", dict, "$", default={}),
        backtest=_expect(raw, "backtest", dict, "$", default={}),
        accuracy=_expect(raw, "accuracy", dict, "$", default={}),
        alpha_study=_expect(raw, "alpha_study", dict, "$", default={}),
        bootstrap_alpha=_expect(raw, "bootstrap_alpha", dict, "$", default={}),
    )


def load_config(path) -> Config:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(json.load(fh))


def _grid_from(cfg: dict, where: str, default):
    g = cfg.get("grid")
    if g is None:
        return np.asarray(default)
    if not isinstance(g, dict):
        raise ConfigError("grid must be an object", field=f"{where}.grid")
    start = float(_expect(g, "start", (int, float), f"{where}.grid", required=True))
    stop = float(_expect(g, "stop", (int, float), f"{where}.grid", required=True))
    step = float(_expect(g, "step", (int, float), f"{where}.grid", required=True))
    return np.arange(start, stop + step / 2, step)


def _load_series(cfg: Config) -> MarketSeries:
    data = cfg.data
    if "market_csv" in data:
        return read_market_csv(data["market_csv"])
    if "ohlc_csv" in data:
        return to_market_series(load_ohlc(data["ohlc_csv"]),
                                return_scale=float(data.get("return_scale", 100.0)),
                                range_scale=float(data.get("range_scale", 1.0)))
    if "simulate" in data:
        return _simulated_series(cfg)
    raise ConfigError("one of market_csv, ohlc_csv or simulate required",
                      field="data")


def _dgp_from(sim: dict, where: str) -> DgpSpec:
    return DgpSpec(
        omega=float(_expect(sim, "omega", (int, float), where, default=0.01)),
        gamma=float(_expect(sim, "gamma", (int, float), where, default=0.10)),
        beta=float(_expect(sim, "beta", (int, float), where, default=0.89)),
        dist=parse_distribution(_expect(sim, "dist", str, where, default="N")),
        T=int(_expect(sim, "T", int, where, default=3000)),
    )


def _simulated_series(cfg: Config) -> MarketSeries:
    sim = cfg.data["simulate"]
    dgp = _dgp_from(sim, "data.simulate")
    from .rng import substream
    return simulate_market(dgp, substream(cfg.seed, "data"),
                           with_realized=bool(sim.get("with_realized", False)))


# ---------------------------------------------------------------------------
# deterministic writers
# ---------------------------------------------------------------------------

def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _fmt(x) -> str:
    return f"{float(x):.10g}"


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# rolling forecasts
# ---------------------------------------------------------------------------

class FitCache:
    """Fitted-parameter store keyed by (model, window content, seed)."""

    def __init__(self, root: Path):
        self.root = root
        root.mkdir(parents=True, exist_ok=True)

    def key(self, model: ModelEntry, series: MarketSeries, h: int, seed: int) -> str:
        hasher = hashlib.sha256()
        hasher.update(f"{model.name}|{model.kind}|{model.alpha_est}|{h}|{seed}|"
                      f"{len(series)}".encode())
        hasher.update(series.returns.tobytes())
        if series.realized is not None:
            hasher.update(series.realized.tobytes())
        return hasher.hexdigest()[:32]

    def get(self, key: str):
        p = self.root / f"{key}.json"
        if p.exists():
            with open(p, "r", encoding="utf-8") as fh:
                return json.load(fh)
        return None

    def put(self, key: str, params: dict) -> None:
        _write_json(self.root / f"{key}.json", params)


def _fit_model(model: ModelEntry, series: MarketSeries, seed: int,
               cache: FitCache | None, h: int):
    cached = None
    key = None
    if cache is not None:
        key = cache.key(model, series, h, seed)
        cached = cache.get(key)
    if model.is_quantile:
        spec = CaviarSpec(model.kind, model.alpha_est)
        if cached is not None:
            from .caviar import filter_caviar, quantile_loss, CaviarFit
            q, u = filter_caviar(spec, cached, series)
            fit = CaviarFit(spec=spec, params=cached, q_series=q, u_series=u,
                            objective=np.nan,
                            ql_value=quantile_loss(spec.alpha_est, series.returns, q),
                            meas_nll=np.nan,
                            violation_rate=float(np.mean(series.returns < q)))
        else:
            fit = fit_caviar(spec, series, seed=seed)
            if cache is not None:
                cache.put(key, fit.params)
        return fit
    spec = VolSpec(FHS_KINDS[model.kind])
    if cached is not None:
        from .volatility import filter_volatility, VolFit
        sigma, z, u = filter_volatility(spec, cached, series)
        fit = VolFit(spec=spec, params=cached, sigma_series=sigma, z_series=z,
                     u_series=u, loglik=np.nan)
    else:
        fit = fit_qml(spec, series, seed=seed)
        if cache is not None:
            cache.put(key, fit.params)
    return fit


def _forecast_one(model: ModelEntry, fit, series: MarketSeries, h: int, M: int,
                  alpha0: float, seed: int) -> RiskForecast:
    if model.is_quantile:
        return qfhs_forecast(fit, series, h, M, alpha0, seed=seed)
    return fhs_forecast(fit, series, h, M, alpha0, seed=seed)


def cmd_forecast(cfg: Config, out: Path) -> None:
    if not cfg.models:
        raise ConfigError("forecast needs a model roster", field="models")
    series = _load_series(cfg)
    fc = cfg.forecast
    h = cfg.horizon
    boundary = _expect(fc, "boundary", str, "forecast", required=True)
    refit_every = int(_expect(fc, "refit_every", int, "forecast",
                              default=5 if h == 1 else 2))
    M = int(_expect(fc, "M", int, "forecast", default=25000))
    parts = split(series, boundary, h=h)
    n_out = len(parts.out_of_sample)
    if n_out == 0:
        raise ConfigError("empty out-of-sample window", field="forecast.boundary")
    cut = len(parts.in_sample)
    n_origins = n_out if h == 1 else n_out // h
    cache = FitCache(out / "fit_cache")

    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for mi, model in enumerate(cfg.models):
            fit = None
            for oi in range(n_origins):
                end = cut + oi * h
                window = series.slice(0, end)
                if oi % refit_every == 0 or fit is None:
                    fit = _fit_model(model, window, cfg.seed, cache, h)
                else:
                    fit = _refilter(model, fit, window)
                target = series.dates[end + h - 1]
                for alpha0 in cfg.alpha0:
                    f = _forecast_one(model, fit, window, h, M, alpha0,
                                      seed=cfg.seed + 100003 * oi + mi)
                    rows.append((str(target), model.name, h, alpha0, f.var, f.es,
                                 f.sim_volatility, f.n_paths, f.seed))
    rows.sort(key=lambda r: (r[0], r[1], r[3]))
    _write_csv(out / "forecasts.csv",
               ["date", "model", "h", "alpha0", "var", "es", "sim_vol", "m", "seed"],
               [(r[0], r[1], str(r[2]), _fmt(r[3]), _fmt(r[4]), _fmt(r[5]),
                 _fmt(r[6]), str(r[7]), str(r[8])) for r in rows])


def _refilter(model: ModelEntry, fit, window: MarketSeries):
    """Refresh filtered series on a grown window, keeping parameters."""
    if model.is_quantile:
        from .caviar import filter_caviar, quantile_loss, CaviarFit
        q, u = filter_caviar(fit.spec, fit.params, window)
        return CaviarFit(spec=fit.spec, params=fit.params, q_series=q, u_series=u,
                         objective=fit.objective, ql_value=np.nan, meas_nll=np.nan,
                         violation_rate=float(np.mean(window.returns < q)))
    from .volatility import filter_volatility, VolFit
    sigma, z, u = filter_volatility(fit.spec, fit.params, window)
    return VolFit(spec=fit.spec, params=fit.params, sigma_series=sigma, z_series=z,
                  u_series=u, loglik=fit.loglik)


def read_forecasts(path):
    """forecasts.csv -> {alpha0: {model: [RiskForecast...]}}"""
    out: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        idx = {name: i for i, name in enumerate(header)}
        for line in fh:
            f = line.strip().split(",")
            alpha0 = float(f[idx["alpha0"]])
            rec = RiskForecast(
                origin=np.datetime64(f[idx["date"]], "D"), h=int(f[idx["h"]]),
                alpha0=alpha0, var=float(f[idx["var"]]), es=float(f[idx["es"]]),
                sim_volatility=float(f[idx["sim_vol"]]), n_paths=int(f[idx["m"]]),
                seed=int(f[idx["seed"]]),
            )
            out.setdefault(alpha0, {}).setdefault(f[idx["model"]], []).append(rec)
    return out


def cmd_backtest(cfg: Config, out: Path) -> None:
    series = _load_series(cfg)
    h = cfg.horizon
    fpath = out / "forecasts.csv"
    if not fpath.exists():
        raise ConfigError(f"no forecasts at {fpath}; run forecast first",
                          field="forecast")
    by_alpha = read_forecasts(fpath)
    level = float(cfg.backtest.get("level", 0.25))
    B = int(cfg.backtest.get("B", 5000))
    mean_block = float(cfg.backtest.get("mean_block", 10.0 if h == 1 else 3.0))

    if h > 1:
        boundary = _expect(cfg.forecast, "boundary", str, "forecast", required=True)
        oos = split(series, boundary, h=h).out_of_sample
        scored = aggregate_nonoverlapping(oos, h)
    else:
        scored = series

    loss_rows = []
    mcs_out = {}
    table_rows = {}
    for alpha0, per_model in sorted(by_alpha.items()):
        dates = sorted({np.datetime_as_string(f.origin)
                        for f in next(iter(per_model.values()))})
        keep = np.isin(np.datetime_as_string(scored.dates), dates)
        realized = MarketSeries(scored.dates[keep], scored.returns[keep])
        panel = bt.evaluate(per_model, realized, alpha0)
        for i, m in enumerate(panel.models):
            for j, d in enumerate(np.datetime_as_string(panel.dates)):
                loss_rows.append((d, m, alpha0, panel.quantile[i, j],
                                  panel.joint[i, j]))
        for kind in ("quantile", "joint"):
            res = bt.mcs(panel, loss_kind=kind, level=level, B=B,
                         mean_block=mean_block, seed=cfg.seed)
            mcs_out[f"{kind}@{alpha0:g}"] = {
                "included": list(res.included),
                "pvalues": {m: round(res.pvalues[m], 6) for m in panel.models},
                "elimination_order": list(res.elimination_order),
                "level": level, "B": B, "mean_block": mean_block,
            }
            ranks = panel.ranks(kind)
            totals = panel.totals(kind)
            for i, m in enumerate(panel.models):
                table_rows.setdefault(m, {})[(alpha0, kind)] = (
                    totals[i], ranks[i], res.pvalues[m], m in res.included,
                )

    loss_rows.sort(key=lambda r: (r[2], r[1], r[0]))
    _write_csv(out / "losses.csv",
               ["date", "model", "alpha0", "quantile_loss", "joint_loss"],
               [(r[0], r[1], _fmt(r[2]), _fmt(r[3]), _fmt(r[4]))
                for r in loss_rows])
    _write_json(out / "mcs.json", mcs_out)

    tables = out / "tables"
    tables.mkdir(exist_ok=True)
    models = [m.name for m in cfg.models] or sorted(table_rows)
    header = ["model"]
    combos = sorted({k for v in table_rows.values() for k in v})
    for alpha0, kind in combos:
        tag = f"{'Q' if kind == 'quantile' else 'J'}{100 * alpha0:g}"
        header += [tag, f"R({tag})", f"M({tag})", f"inc({tag})"]
    rows = []
    for m in models:
        row = [m]
        for combo in combos:
            total, rank, p, inc = table_rows[m][combo]
            row += [_fmt(total), _fmt(rank), _fmt(p), str(int(inc))]
        rows.append(tuple(row))
    _write_csv(tables / f"summary_h{h}.csv", header, rows)


# ---------------------------------------------------------------------------
# studies
# ---------------------------------------------------------------------------

def cmd_study_accuracy(cfg: Config, out: Path) -> None:
    ac = cfg.accuracy
    dgp_labels = ac.get("dgps", ["N"])
    dgps = tuple(
        DgpSpec(omega=float(ac.get("omega", 0.01)),
                gamma=float(ac.get("gamma", 0.10)),
                beta=float(ac.get("beta", 0.89)),
                dist=parse_distribution(lbl), T=int(ac.get("T", 3000)))
        for lbl in dgp_labels
    )
    study = StudyConfig(
        dgps=dgps, h=int(ac.get("h", cfg.horizon)),
        n_reps=int(ac.get("n_reps", 50)), M=int(ac.get("M", 25000)),
        alpha_ests=tuple(ac.get("alpha_ests", (0.01, 0.025, 0.05, 0.1, 0.15, 0.2))),
        alpha0s=cfg.alpha0, seed=cfg.seed,
        n_truth_paths=int(ac.get("n_truth_paths", 100_000)),
    )
    reports = run_accuracy_study(study)
    tables = out / "tables"
    tables.mkdir(parents=True, exist_ok=True)
    first = next(iter(reports.values()))
    header = ["method"] + [f"avg_rank[{lbl}]" for lbl in reports]
    rows = []
    for i, m in enumerate(first.methods):
        rows.append(tuple([m] + [_fmt(rep.avg_rank[i]) for rep in reports.values()]))
    _write_csv(tables / f"accuracy_ranks_h{study.h}.csv", header, rows)
    for lbl, rep in reports.items():
        rows = [tuple([m] + [_fmt(rep.rmse[i, j]) for j in range(len(rep.quantities))]
                      + [_fmt(rep.avg_rank[i])])
                for i, m in enumerate(rep.methods)]
        safe = lbl.replace("(", "_").replace(")", "").replace(",", "_")
        _write_csv(tables / f"accuracy_rmse_h{study.h}_{safe}.csv",
                   ["method"] + list(rep.quantities) + ["avg_rank"], rows)


def cmd_study_alpha(cfg: Config, out: Path) -> None:
    st = cfg.alpha_study
    dgp = _dgp_from(st, "alpha_study")
    grid = _grid_from(st, "alpha_study", np.arange(0.0025, 0.30001, 0.0025))
    n_reps = int(st.get("n_reps", 50))
    prof = asymptotic_rse_profile(dgp, grid, n_reps=n_reps, seed=cfg.seed)
    rows = [(_fmt(a), p, _fmt(prof.se[i, j]), _fmt(prof.normalized()[i, j]))
            for i, a in enumerate(prof.alpha_grid)
            for j, p in enumerate(prof.params)]
    _write_csv(out / "profiles.csv", ["alpha", "parameter", "rse", "normalized"],
               rows)
    summary = {"kind": "asymptotic", "dgp": dgp.label(), "n_reps": n_reps,
               "optimal_alpha": prof.optimal_alpha()}
    mc_reps = int(st.get("mc_n_reps", 0))
    if mc_reps:
        mc_grid = _grid_from(st.get("mc", {}), "alpha_study.mc",
                             np.arange(0.01, 0.3001, 0.005))
        mc = mc_se_experiment(dgp, mc_grid, n_reps=mc_reps, seed=cfg.seed)
        rows = [(_fmt(a), p, _fmt(mc.se[i, j]), _fmt(mc.smoothed[i, j]))
                for i, a in enumerate(mc.alpha_grid)
                for j, p in enumerate(mc.params)]
        _write_csv(out / "mc_profiles.csv",
                   ["alpha", "parameter", "se", "smoothed_se"], rows)
        summary["mc"] = {
            "n_reps": mc_reps,
            "optimal_alpha_raw": mc.optimal_alpha(),
            "optimal_alpha_smoothed": mc.optimal_alpha(smoothed=True),
            "average_optimal_alpha_raw": mc.average_optimal_alpha(),
            "average_optimal_alpha_smoothed": mc.average_optimal_alpha(smoothed=True),
        }
    _write_json(out / "alpha_summary.json", summary)
    curves = {p: prof.normalized()[:, j] for j, p in enumerate(prof.params)}
    line_chart(out / "rse_profile.svg", prof.alpha_grid, curves,
               title=f"Relative SE vs estimation level ({dgp.label()})",
               xlabel="alpha", ylabel="normalized rse")


def cmd_bootstrap_alpha(cfg: Config, out: Path) -> None:
    ba = cfg.bootstrap_alpha
    series = _load_series(cfg)
    grid = _grid_from(ba, "bootstrap_alpha", np.arange(0.005, 0.2501, 0.005))
    B = int(ba.get("B", 500))
    prof = bootstrap_se(series, grid, B=B, seed=cfg.seed,
                        n_starts=int(ba.get("n_starts", 4)))
    rows = [(_fmt(a), p, _fmt(prof.se[i, j]), _fmt(prof.smoothed[i, j]))
            for i, a in enumerate(prof.alpha_grid)
            for j, p in enumerate(prof.params)]
    _write_csv(out / "bootstrap_profiles.csv",
               ["alpha", "parameter", "se", "smoothed_se"], rows)
    _write_json(out / "bootstrap_summary.json", {
        "B": B,
        "optimal_alpha_raw": prof.optimal_alpha(),
        "optimal_alpha_smoothed": prof.optimal_alpha(smoothed=True),
        "mean_raw": prof.average_optimal_alpha(),
        "mean_smoothed": prof.average_optimal_alpha(smoothed=True),
        "failures": len(prof.failures),
    })
    curves = {}
    for j, p in enumerate(prof.params):
        curves[f"{p} raw"] = prof.se[:, j]
        curves[f"{p} loess"] = prof.smoothed[:, j]
    line_chart(out / "bootstrap_profile.svg", prof.alpha_grid, curves,
               title="Bootstrap SE vs estimation level", xlabel="alpha",
               ylabel="se")


def cmd_simulate(cfg: Config, out: Path) -> None:
    if "simulate" not in cfg.data:
        raise ConfigError("simulate command needs data.simulate", field="data")
    series = _simulated_series(cfg)
    write_market_csv(series, out / "data.csv")


def cmd_fit(cfg: Config, out: Path) -> None:
    if not cfg.models:
        raise ConfigError("fit needs a model roster", field="models")
    series = _load_series(cfg)
    result = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for model in cfg.models:
            fit = _fit_model(model, series, cfg.seed, None, cfg.horizon)
            entry = {"params": {k: float(v) for k, v in fit.params.items()}}
            if model.is_quantile:
                entry["objective"] = float(fit.objective)
                entry["violation_rate"] = float(fit.violation_rate)
            else:
                entry["loglik"] = float(fit.loglik)
            result[model.name] = entry
    _write_json(out / "fits.json", result)


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "forecast": cmd_forecast,
    "backtest": cmd_backtest,
    "study-accuracy": cmd_study_accuracy,
    "study-alpha": cmd_study_alpha,
    "bootstrap-alpha": cmd_bootstrap_alpha,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qfhs",
        description="Quantile filtered historical simulation toolkit",
    )
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--command", required=True, choices=sorted(COMMANDS))
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--out", default=None, help="override output directory")
    parser.add_argument("--jobs", type=int, default=1,
                        help="reserved for parallel rosters (outputs identical)")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out_dir = args.out
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, out)
    except (QfhsError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
