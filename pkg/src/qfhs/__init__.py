"""Quantile filtered historical simulation toolkit.

Semi-parametric VaR and ES forecasting at one and multiple horizons by
resampling quantile-scaled residuals through fitted conditional-quantile
recursions; classical volatility-filtered historical simulation baselines;
estimation-efficiency analysis for choosing the estimation quantile; and a
backtesting harness with a model confidence set.
"""

from .backtest import (LossPanel, McsResult, evaluate, mcs, period_joint_loss,
                       period_quantile_loss)
from .caviar import (CaviarFit, CaviarSpec, VtCaviarFit, filter_caviar, fit_caviar,
                     fit_vt_caviar, quantile_loss)
from .data import (MarketSeries, OhlcSeries, SampleSplit, aggregate_nonoverlapping,
                   load_ohlc, split, to_market_series)
from .distributions import (Distribution, hansen_skew_t, normal, parse_distribution,
                            student_t)
from .efficiency import (RseProfile, asymptotic_rse_profile, bootstrap_se,
                         caviar_gradient, loess_smooth, mc_se_experiment)
from .forecast import em_regression_es, qfhs_forecast, scaled_residuals
from .optimize import OptimResult, ParamSpace, minimize, multi_start_minimize
from .risk import RiskForecast, tail_statistics
from .simstudy import (AccuracyReport, DgpSpec, StudyConfig, run_accuracy_study,
                       simulate_dgp, simulate_market, true_multistep_risk,
                       true_onestep_risk)
from .volatility import VolFit, VolSpec, fhs_forecast, filter_volatility, fit_qml

__version__ = "0.1.0"
