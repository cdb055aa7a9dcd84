"""Market data ingestion and windowing.

Converts OHLC histories into percent log-returns and intra-day log ranges,
aggregates returns into non-overlapping multi-day blocks, and splits a
series into estimation and forecast windows.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

__all__ = [
    "OhlcSeries",
    "MarketSeries",
    "SampleSplit",
    "load_ohlc",
    "to_market_series",
    "aggregate_nonoverlapping",
    "split",
    "write_market_csv",
    "read_market_csv",
]


@dataclass
class OhlcSeries:
    dates: np.ndarray  # datetime64[D], strictly increasing
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray

    def __len__(self):
        return len(self.dates)


@dataclass
class MarketSeries:
    """Aligned daily returns and (optional) intra-day log ranges."""

    dates: np.ndarray
    returns: np.ndarray
    realized: np.ndarray | None = None

    def __post_init__(self):
        self.returns = np.asarray(self.returns, dtype=float)
        self.dates = np.asarray(self.dates, dtype="datetime64[D]")
        if len(self.dates) != len(self.returns):
            raise DataError("dates and returns must have equal length")
        if self.realized is not None:
            self.realized = np.asarray(self.realized, dtype=float)
            if len(self.realized) != len(self.returns):
                raise DataError("realized measure must align with returns")

    def __len__(self):
        return len(self.returns)

    @classmethod
    def from_returns(cls, returns, realized=None, start="2000-01-03"):
        """Wrap a plain return array with synthetic consecutive dates."""
        n = len(returns)
        dates = np.datetime64(start, "D") + np.arange(n)
        return cls(dates, np.asarray(returns, dtype=float), realized)

    def slice(self, i, j) -> "MarketSeries":
        realized = None if self.realized is None else self.realized[i:j]
        return MarketSeries(self.dates[i:j], self.returns[i:j], realized)


@dataclass
class SampleSplit:
    in_sample: MarketSeries
    out_of_sample: MarketSeries
    horizon: int
    empty_out_of_sample: bool = field(default=False)


def load_ohlc(source) -> OhlcSeries:
    """Parse an OHLC CSV (header ``date,open,high,low,close``, ISO dates).

    ``source`` may be a path, a text stream, or a CSV string.  Rows with
    non-positive prices, high < low, or out-of-order dates raise a
    ``DataError`` naming the offending row (1-based, excluding the header).
    """
    if hasattr(source, "read"):
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    else:
        text = str(source)
        if "\n" not in text and "," not in text:
            with open(text, "r", encoding="utf-8") as fh:
                text = fh.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty CSV") from None
    expected = ["date", "open", "high", "low", "close"]
    if [h.strip().lower() for h in header] != expected:
        raise DataError(f"CSV header must be {','.join(expected)}")

    dates, o, h, lo, c = [], [], [], [], []
    for i, row in enumerate(reader, start=1):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != 5:
            raise DataError(f"row {i}: expected 5 fields, got {len(row)}")
        try:
            d = np.datetime64(row[0].strip(), "D")
            vals = [float(x) for x in row[1:]]
        except (ValueError, TypeError) as exc:
            raise DataError(f"row {i}: {exc}") from None
        if any(v <= 0.0 for v in vals):
            raise DataError(f"row {i}: non-positive price")
        if vals[1] < max(vals[0], vals[3]) or vals[2] > min(vals[0], vals[3]):
            raise DataError(f"row {i}: high/low inconsistent with open/close")
        if dates and d <= dates[-1]:
            raise DataError(f"row {i}: dates not strictly increasing")
        dates.append(d)
        o.append(vals[0])
        h.append(vals[1])
        lo.append(vals[2])
        c.append(vals[3])
    if not dates:
        raise DataError("no data rows")
    return OhlcSeries(
        np.array(dates, dtype="datetime64[D]"),
        np.array(o), np.array(h), np.array(lo), np.array(c),
    )


def to_market_series(ohlc: OhlcSeries, return_scale: float = 100.0,
                     range_scale: float = 1.0) -> MarketSeries:
    """Close-to-close log returns and same-day log ranges.

    Returns are ``return_scale * (ln C_t - ln C_{t-1})``; the realized
    measure is ``range_scale * (ln H_t - ln L_t)``, aligned to the return of
    the same day.  Degenerate zero ranges are kept but trigger a warning.
    """
    if len(ohlc) < 2:
        raise DataError("need at least two rows to form returns")
    if return_scale <= 0:
        raise DataError("return_scale must be positive")
    logc = np.log(ohlc.close)
    returns = return_scale * np.diff(logc)
    ranges = range_scale * (np.log(ohlc.high) - np.log(ohlc.low))[1:]
    n_zero = int(np.sum(ranges == 0.0))
    if n_zero:
        warnings.warn(f"{n_zero} day(s) with degenerate high=low range", stacklevel=2)
    return MarketSeries(ohlc.dates[1:], returns, ranges)


def aggregate_nonoverlapping(series: MarketSeries, h: int) -> MarketSeries:
    """Sum returns over consecutive non-overlapping blocks of length ``h``.

    The trailing partial block is dropped; block dates are the block-end
    dates.  The realized measure does not aggregate and is omitted.
    """
    if h < 1:
        raise DataError("aggregation window must be >= 1")
    if h == 1:
        return MarketSeries(series.dates.copy(), series.returns.copy(),
                            None if series.realized is None else series.realized.copy())
    n_blocks = len(series) // h
    r = series.returns[: n_blocks * h].reshape(n_blocks, h).sum(axis=1)
    dates = series.dates[h - 1 : n_blocks * h : h]
    return MarketSeries(dates, r, None)


def split(series: MarketSeries, boundary, h: int = 1) -> SampleSplit:
    """Contiguous in-sample/out-of-sample split at ``boundary`` (inclusive).

    For ``h > 1`` the out-of-sample part is truncated to a whole number of
    ``h``-day blocks.
    """
    boundary = np.datetime64(boundary, "D")
    if boundary < series.dates[0] or boundary > series.dates[-1]:
        raise DataError(f"boundary {boundary} outside the date range")
    cut = int(np.searchsorted(series.dates, boundary, side="right"))
    n_out = len(series) - cut
    if h > 1:
        n_out = (n_out // h) * h
    out = series.slice(cut, cut + n_out)
    return SampleSplit(series.slice(0, cut), out, h, empty_out_of_sample=(n_out == 0))


def write_market_csv(series: MarketSeries, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("date,return,realized\n")
        for i in range(len(series)):
            x = "" if series.realized is None else f"{series.realized[i]:.12g}"
            fh.write(f"{series.dates[i]},{series.returns[i]:.12g},{x}\n")


def read_market_csv(source) -> MarketSeries:
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if [h.strip().lower() for h in header] != ["date", "return", "realized"]:
        raise DataError("market CSV header must be date,return,realized")
    dates, rets, real = [], [], []
    for row in reader:
        if not row:
            continue
        dates.append(np.datetime64(row[0], "D"))
        rets.append(float(row[1]))
        real.append(float(row[2]) if len(row) > 2 and row[2] != "" else np.nan)
    realized = np.array(real)
    if np.all(np.isnan(realized)):
        realized = None
    return MarketSeries(np.array(dates, dtype="datetime64[D]"), np.array(rets), realized)
