"""Risk forecast records and empirical tail conventions.

A forecast's VaR is the negated k-th smallest simulated cumulated return
with k = floor(alpha * M); its ES is the negated mean of those k values.
Using the same k for both makes ES >= VaR hold by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyTailError

__all__ = ["RiskForecast", "tail_statistics", "MIN_TAIL"]

MIN_TAIL = 10


def tail_statistics(sample: np.ndarray, alpha: float, min_tail: int = MIN_TAIL):
    """(VaR, ES) from an empirical sample of returns.

    Raises ``EmptyTailError`` when floor(alpha * n) < ``min_tail``.
    """
    n = len(sample)
    k = int(np.floor(alpha * n))
    if k < min_tail:
        raise EmptyTailError(
            f"tail of {k} point(s) from alpha={alpha}, n={n} is below the "
            f"minimum of {min_tail}"
        )
    lowest = np.partition(sample, k - 1)[:k]
    return float(-np.max(lowest)), float(-np.mean(lowest))


@dataclass
class RiskForecast:
    """One-origin VaR/ES forecast at horizon ``h`` and target level ``alpha0``."""

    origin: np.datetime64 | None
    h: int
    alpha0: float
    var: float
    es: float
    sim_volatility: float
    n_paths: int
    seed: int
