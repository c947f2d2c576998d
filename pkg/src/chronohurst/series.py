"""Monthly series data model, ingestion, differencing and summary statistics."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Literal

import numpy as np

from ._ar import autocovariance, durbin_levinson
from .errors import InputError

__all__ = [
    "MonthlySeries",
    "DescriptiveStats",
    "CorrelationFunction",
    "parse_month",
    "format_month",
    "load_monthly_csv",
    "load_bundled",
    "aggregate_events",
    "difference",
    "descriptive_stats",
    "correlation_function",
    "ndiffs",
]

_MONTH_RE = re.compile(r"^\s*(\d{4})-(\d{2})\s*$")


def parse_month(text) -> np.datetime64:
    """Parse ``YYYY-MM`` (or pass through a datetime64) into a month value."""
    if isinstance(text, np.datetime64):
        return text.astype("datetime64[M]")
    m = _MONTH_RE.match(str(text))
    if not m or not 1 <= int(m.group(2)) <= 12:
        raise InputError(f"not a YYYY-MM month: {text!r}")
    return np.datetime64(f"{m.group(1)}-{m.group(2)}", "M")


def format_month(month: np.datetime64) -> str:
    return str(np.datetime64(month, "M"))


@dataclass(frozen=True)
class MonthlySeries:
    """A regular monthly series anchored at calendar month ``start``.

    ``values[i]`` is the observation for month ``start + i``. Values are copied
    into a read-only float array on construction.
    """

    start: np.datetime64
    values: np.ndarray
    frequency: int = 12
    label: str = ""

    def __post_init__(self):
        start = parse_month(self.start)
        values = np.array(self.values, dtype=float).ravel()
        if values.size < 1:
            raise InputError("series must contain at least one value")
        if not np.all(np.isfinite(values)):
            raise InputError("series values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def end(self) -> np.datetime64:
        return self.start + (len(self) - 1)

    @property
    def months(self) -> np.ndarray:
        return self.start + np.arange(len(self))

    @property
    def decimal_years(self) -> np.ndarray:
        m = self.months.astype(int)
        return 1970 + m / 12.0

    def index_of(self, month) -> int:
        return int((parse_month(month) - self.start).astype(int))

    def month_at(self, index: int) -> np.datetime64:
        return self.start + int(index)

    def with_values(self, values, start=None, label=None) -> "MonthlySeries":
        return MonthlySeries(
            self.start if start is None else start,
            values,
            self.frequency,
            self.label if label is None else label,
        )

    def between(self, first=None, last=None) -> "MonthlySeries":
        """Sub-series covering ``first..last`` inclusive (clipped to the data)."""
        i = 0 if first is None else max(0, self.index_of(first))
        j = len(self) - 1 if last is None else min(len(self) - 1, self.index_of(last))
        if j < i:
            raise InputError("requested month range does not overlap the series")
        return MonthlySeries(self.start + i, self.values[i: j + 1], self.frequency, self.label)

    def affine(self, a: float, b: float = 0.0) -> "MonthlySeries":
        return self.with_values(a * self.values + b)


def load_monthly_csv(path, gap_policy: Literal["error", "zero-fill"] = "error",
                     label: str | None = None) -> MonthlySeries:
    """Read a ``month,count`` CSV into a contiguous :class:`MonthlySeries`.

    Rows must be ``YYYY-MM,<nonnegative integer>`` with strictly increasing
    months. Under ``gap_policy="zero-fill"`` absent months become 0; under
    ``"error"`` any gap raises :class:`InputError`.
    """
    if gap_policy not in ("error", "zero-fill"):
        raise InputError(f"unknown gap policy {gap_policy!r}")
    path = Path(path)
    if not path.is_file():
        raise InputError(f"ingestion: file not found: {path}")

    months: list[np.datetime64] = []
    counts: list[float] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InputError("ingestion: empty input")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise InputError(f"ingestion: line {lineno}: expected 2 fields, got {len(row)}")
            try:
                month = parse_month(row[0])
            except InputError:
                raise InputError(f"ingestion: line {lineno}: bad month {row[0]!r}") from None
            text = row[1].strip()
            if not re.fullmatch(r"[+-]?\d+", text):
                raise InputError(f"ingestion: line {lineno}: count is not an integer: {text!r}")
            count = int(text)
            if count < 0:
                raise InputError(f"ingestion: line {lineno}: negative count {count}")
            if months and month <= months[-1]:
                raise InputError(f"ingestion: line {lineno}: months not strictly increasing")
            if months and month != months[-1] + 1 and gap_policy == "error":
                raise InputError(
                    f"ingestion: line {lineno}: gap between {format_month(months[-1])} "
                    f"and {format_month(month)}"
                )
            months.append(month)
            counts.append(float(count))

    if not months:
        raise InputError("ingestion: empty input")
    start = months[0]
    offsets = (np.array(months) - start).astype(int)
    values = np.zeros(offsets[-1] + 1)
    values[offsets] = counts
    return MonthlySeries(start, values, 12, label if label is not None else path.stem)


def load_bundled() -> MonthlySeries:
    """Monthly CDER approvals, Jan 1939 to Dec 2019 (972 months)."""
    ref = resources.files("chronohurst") / "data" / "cder_approvals.csv"
    with resources.as_file(ref) as p:
        return load_monthly_csv(p, label="US CDER monthly approvals")


def aggregate_events(dates: Iterable, start, end, label: str = "") -> MonthlySeries:
    """Count dated events per calendar month over ``start..end`` inclusive."""
    first, last = parse_month(start), parse_month(end)
    if last < first:
        raise InputError("empty month range")
    n = int((last - first).astype(int)) + 1
    months = np.array([np.datetime64(d, "D") for d in dates], dtype="datetime64[D]")
    offsets = (months.astype("datetime64[M]") - first).astype(int)
    if offsets.size and (offsets.min() < 0 or offsets.max() >= n):
        raise InputError("event date outside the requested range")
    return MonthlySeries(first, np.bincount(offsets, minlength=n).astype(float), 12, label)


def difference(s: MonthlySeries, order: int = 1) -> MonthlySeries:
    """Apply ``order`` rounds of first differencing; the anchor moves forward."""
    if order < 0:
        raise InputError("difference order must be >= 0")
    if len(s) <= order:
        raise InputError(f"series too short ({len(s)}) for differencing of order {order}")
    if order == 0:
        return s
    return MonthlySeries(s.start + order, np.diff(s.values, n=order), s.frequency, s.label)


@dataclass(frozen=True)
class DescriptiveStats:
    n: int
    min: float
    q1: float
    median: float
    mean: float
    sd: float
    q3: float
    max: float
    kurtosis: float
    skewness: float

    def to_dict(self) -> dict:
        return {k: (None if isinstance(v, float) and math.isnan(v) else v)
                for k, v in self.__dict__.items()}


def descriptive_stats(s: MonthlySeries) -> DescriptiveStats:
    """Order statistics and moments.

    Quartiles interpolate linearly between order statistics; ``sd`` uses the
    n-1 divisor while skewness ``m3/m2**1.5`` and kurtosis ``m4/m2**2`` use
    population moments. Both shape statistics are NaN for a constant series.
    """
    x = s.values
    if x.size < 2:
        raise InputError("descriptive statistics need at least 2 values")
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    dev = x - x.mean()
    m2 = np.mean(dev**2)
    if m2 > 0:
        # m2**2 can underflow for near-constant input; the result is then NaN
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            skew = np.mean(dev**3) / m2**1.5
            kurt = np.mean(dev**4) / m2**2
    else:
        skew = kurt = math.nan
    return DescriptiveStats(
        n=int(x.size),
        min=float(x.min()),
        q1=float(q1),
        median=float(med),
        mean=float(x.mean()),
        sd=float(x.std(ddof=1)),
        q3=float(q3),
        max=float(x.max()),
        kurtosis=float(kurt),
        skewness=float(skew),
    )


@dataclass(frozen=True)
class CorrelationFunction:
    kind: str
    lags: np.ndarray
    coefficients: np.ndarray
    confidence_band: float

    def outside_band(self) -> np.ndarray:
        return np.abs(self.coefficients) > self.confidence_band


def correlation_function(s: MonthlySeries, kind: Literal["serial", "partial"] = "serial",
                         max_lag: int | None = None) -> CorrelationFunction:
    """Sample autocorrelation (lags 0..max_lag) or partial autocorrelation (1..max_lag).

    The serial function normalises the biased autocovariance by its lag-0
    value; the partial one comes from the Durbin-Levinson recursion. The
    band is the usual +-1.96/sqrt(n).
    """
    n = len(s)
    if max_lag is None:
        max_lag = min(n - 1, int(10 * np.log10(n)))
    if not 0 < max_lag < n:
        raise InputError(f"max_lag must lie in [1, {n - 1}]")
    acov = autocovariance(s.values, max_lag)
    band = 1.96 / math.sqrt(n)
    if acov[0] == 0:
        rho = np.r_[1.0, np.zeros(max_lag)]
    else:
        rho = acov / acov[0]
    if kind == "serial":
        return CorrelationFunction("serial", np.arange(max_lag + 1), rho, band)
    if kind == "partial":
        pacf, _, _ = durbin_levinson(rho)
        return CorrelationFunction("partial", np.arange(1, max_lag + 1), pacf, band)
    raise InputError(f"unknown correlation kind {kind!r}")


def ndiffs(s: MonthlySeries, alpha: float = 0.05, max_d: int = 2) -> int:
    """Smallest d <= max_d whose d-th difference passes the level KPSS test."""
    from .stattests import kpss

    if len(s) < 20:
        raise InputError("ndiffs needs at least 20 observations")
    for d in range(max_d + 1):
        x = difference(s, d)
        if np.ptp(x.values) == 0 or kpss(x, "level").p_value > alpha:
            return d
    return max_d
