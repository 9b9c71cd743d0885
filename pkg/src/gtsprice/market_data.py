"""Offline ingestion of daily price CSVs into percent log-return series."""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import EmptySeries, ParseError
from .gts_core import DAYS_PER_YEAR

DEFAULT_SCHEMA = {"date": "Date", "close": "Adj Close"}


@dataclass(frozen=True)
class PriceSeries:
    dates: tuple
    close: np.ndarray
    dropped: int = 0

    def __post_init__(self):
        if len(self.dates) != len(self.close):
            raise ValueError("dates and close differ in length")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")
        if np.any(np.asarray(self.close) <= 0):
            raise ValueError("prices must be positive")

    def __len__(self):
        return len(self.dates)


@dataclass(frozen=True)
class ReturnSeries:
    dates: tuple
    returns: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.returns, dtype=float)
        if len(self.dates) != r.size:
            raise ValueError("dates and returns differ in length")
        if not np.all(np.isfinite(r)):
            raise ValueError("returns must be finite")
        r.setflags(write=False)
        object.__setattr__(self, "returns", r)

    def __len__(self):
        return len(self.dates)

    @classmethod
    def from_values(cls, values, start=dt.date(2000, 1, 3)):
        """Wrap bare returns with consecutive placeholder dates."""
        values = np.asarray(values, dtype=float)
        dates = tuple(start + dt.timedelta(days=i) for i in range(values.size))
        return cls(dates, values)

    def concat(self, other: "ReturnSeries") -> "ReturnSeries":
        return ReturnSeries(self.dates + other.dates,
                            np.concatenate([self.returns, other.returns]))


@dataclass(frozen=True)
class Summary:
    count: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    min: float
    max: float
    annualized_volatility: float


def _parse_date(text, line):
    try:
        return dt.date.fromisoformat(text.strip()[:10])
    except ValueError:
        raise ParseError(f"bad date {text!r}", line=line) from None


def load_prices(path, schema: dict | None = None) -> PriceSeries:
    """Read a price CSV, sort it by date and drop rows without a close."""
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc.strerror}") from None
    rows, dropped = {}, 0
    with handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        for col in (schema["date"], schema["close"]):
            if col not in header:
                raise ParseError(f"missing column {col!r}", line=1)
        for record in reader:
            line = reader.line_num
            raw = (record.get(schema["close"]) or "").strip()
            if raw in ("", "null", "NaN", "nan"):
                dropped += 1
                continue
            date = _parse_date(record[schema["date"]] or "", line)
            try:
                value = float(raw)
            except ValueError:
                raise ParseError(f"bad close value {raw!r}", line=line) from None
            if not (math.isfinite(value) and value > 0):
                raise ParseError(f"non-positive close {raw!r}", line=line)
            if date in rows:
                raise ParseError(f"duplicate date {date}", line=line)
            rows[date] = value
    if not rows:
        raise EmptySeries(f"no usable rows in {path}")
    dates = tuple(sorted(rows))
    return PriceSeries(dates, np.array([rows[d] for d in dates]), dropped)


def write_prices(prices: PriceSeries, path, schema: dict | None = None):
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow([schema["date"], schema["close"]])
        for d, c in zip(prices.dates, prices.close):
            writer.writerow([d.isoformat(), repr(float(c))])


def log_returns(prices: PriceSeries) -> ReturnSeries:
    """100 * log(P_i / P_{i-1}), dated at the later observation."""
    if len(prices) < 2:
        raise EmptySeries("need at least two prices for a return")
    close = np.asarray(prices.close, dtype=float)
    return ReturnSeries(prices.dates[1:], 100.0 * np.diff(np.log(close)))


def write_returns(series: ReturnSeries, path):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["date", "return_pct"])
        for d, r in zip(series.dates, series.returns):
            writer.writerow([d.isoformat(), repr(float(r))])


def summary(series: ReturnSeries, days_per_year: float = DAYS_PER_YEAR) -> Summary:
    r = np.asarray(series.returns, dtype=float)
    if r.size == 0:
        raise EmptySeries("empty return series")
    var = float(np.var(r, ddof=1)) if r.size > 1 else 0.0
    if r.size > 2 and np.ptp(r) > 0:
        skew = float(stats.skew(r))
        kurt = float(stats.kurtosis(r))
    else:
        skew = kurt = 0.0
    return Summary(
        count=int(r.size),
        mean=float(np.mean(r)),
        variance=var,
        skewness=skew,
        excess_kurtosis=kurt,
        min=float(np.min(r)),
        max=float(np.max(r)),
        annualized_volatility=math.sqrt(days_per_year * var) / 100.0,
    )
