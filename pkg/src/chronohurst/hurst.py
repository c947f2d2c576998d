"""Point Hurst estimates, the chronological (expanding-window) Hurst path, and
three-regime segmentation of that path."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InputError, NumericError
from .series import MonthlySeries, format_month
from .stattests import local_whittle_d

__all__ = [
    "HurstEstimate",
    "ChePath",
    "Segmentation",
    "block_sizes",
    "rs_hurst",
    "whittle_hurst",
    "che",
    "segment_che",
]

H_MIN, H_MAX = 0.0, 1.5
REGIMES = ("Stagnation", "Emergent", "Saturation")


@dataclass(frozen=True)
class HurstEstimate:
    h: float
    raw: float
    method: str
    window_sizes: tuple = ()
    fit_r2: float = math.nan

    @classmethod
    def clamped(cls, raw: float, method: str, **kw) -> "HurstEstimate":
        return cls(float(np.clip(raw, H_MIN, H_MAX)), float(raw), method, **kw)


def block_sizes(n: int, smallest: int = 8, count: int = 10) -> np.ndarray:
    """Logarithmically spaced block lengths between ``smallest`` and ``n // 2``.

    When that range holds fewer than four integers the lower end drops
    (never below 4) so that at least four sizes are available.
    """
    largest = n // 2
    lo = smallest
    while largest - lo + 1 < 4 and lo > 4:
        lo -= 1
    if largest - lo + 1 <= count:
        return np.arange(lo, largest + 1)
    return np.unique(np.floor(np.geomspace(lo, largest, count)).astype(int))


def _rs_points(x: np.ndarray, sizes: np.ndarray):
    used, log_rs = [], []
    for t in sizes:
        k = x.size // t
        blocks = x[: k * t].reshape(k, t)
        dev = np.cumsum(blocks - blocks.mean(axis=1, keepdims=True), axis=1)
        r = dev.max(axis=1) - dev.min(axis=1)
        s = blocks.std(axis=1)
        ok = s > 0
        if ok.any():
            used.append(int(t))
            log_rs.append(math.log(np.mean(r[ok] / s[ok])))
    return np.array(used), np.array(log_rs)


def rs_hurst(s, sizes: np.ndarray | None = None) -> HurstEstimate:
    """Rescaled-range Hurst exponent.

    For each block length t, the series is cut into non-overlapping blocks
    (a ragged tail is dropped); R/S is averaged over blocks with non-zero
    standard deviation, and H is the least-squares slope of
    ``log(mean R/S)`` on ``log t``.
    """
    x = s.values if isinstance(s, MonthlySeries) else np.asarray(s, dtype=float)
    n = x.size
    if n < 16:
        raise InputError("rs_hurst needs n >= 16")
    if sizes is None:
        sizes = block_sizes(n)
    used, log_rs = _rs_points(x, sizes)
    if used.size == 0:
        raise NumericError("rs_hurst: every block is constant")
    if used.size < 2:
        raise NumericError("rs_hurst: fewer than two usable block sizes")
    log_t = np.log(used)
    slope, intercept = np.polyfit(log_t, log_rs, 1)
    resid = log_rs - (slope * log_t + intercept)
    ss = np.sum((log_rs - log_rs.mean()) ** 2)
    r2 = 1.0 - resid @ resid / ss if ss > 0 else math.nan
    return HurstEstimate.clamped(slope, "rescaled-range", window_sizes=tuple(used.tolist()),
                                 fit_r2=float(r2))


def whittle_hurst(s, m: int | None = None) -> HurstEstimate:
    """H = local Whittle d + 1/2 with bandwidth ``floor(n**0.65)``."""
    x = s.values if isinstance(s, MonthlySeries) else np.asarray(s, dtype=float)
    if m is None:
        m = int(x.size**0.65)
    lw = local_whittle_d(x, m)
    return HurstEstimate.clamped(lw.d + 0.5, "whittle", window_sizes=(lw.bandwidth_m,))


_ESTIMATORS = {"rs": rs_hurst, "rescaled-range": rs_hurst, "whittle": whittle_hurst}


@dataclass(frozen=True)
class ChePath:
    """Hurst estimates on the expanding prefixes ``s[0..k]``.

    ``values[k]`` is NaN for the first ``min_window - 1`` months and wherever
    the estimator could not produce a value on that prefix.
    """

    start: np.datetime64
    values: np.ndarray
    raw: np.ndarray
    min_window: int
    method: str

    @property
    def undefined_prefix(self) -> int:
        defined = np.flatnonzero(~np.isnan(self.values))
        return int(defined[0]) if defined.size else len(self.values)

    @property
    def months(self) -> np.ndarray:
        return self.start + np.arange(len(self.values))

    def mean_between(self, first, last) -> float:
        months = self.months
        sel = (months >= np.datetime64(first, "M")) & (months <= np.datetime64(last, "M"))
        vals = self.values[sel]
        vals = vals[~np.isnan(vals)]
        return float(vals.mean()) if vals.size else math.nan

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["month", "h"])
        for month, h in zip(self.months, self.values):
            w.writerow([format_month(month), "" if np.isnan(h) else repr(float(h))])
        return buf.getvalue()


def che(s: MonthlySeries, min_window: int = 24,
        method: Literal["rs", "rescaled-range", "whittle"] = "rs") -> ChePath:
    """Chronological Hurst exponent: estimator applied to every prefix of length >= min_window."""
    if method not in _ESTIMATORS:
        raise InputError(f"unknown CHE method {method!r}")
    n = len(s)
    if min_window < 16 or n <= min_window:
        raise InputError(f"min_window must be >= 16 and < series length ({n})")
    estimator = _ESTIMATORS[method]
    values = np.full(n, np.nan)
    raw = np.full(n, np.nan)
    x = s.values
    for k in range(min_window - 1, n):
        try:
            est = estimator(x[: k + 1])
        except (NumericError, InputError):
            continue
        values[k], raw[k] = est.h, est.raw
    name = "rescaled-range" if method in ("rs", "rescaled-range") else "whittle"
    return ChePath(s.start, values, raw, min_window, name)


@dataclass(frozen=True)
class Segmentation:
    knot1: np.datetime64
    knot2: np.datetime64
    level1: float
    slope2: float
    level3: float
    sse: float
    degenerate: bool
    labels: tuple = REGIMES

    def to_dict(self) -> dict:
        return {
            "knot1": format_month(self.knot1),
            "knot2": format_month(self.knot2),
            "level1": self.level1,
            "slope2": self.slope2,
            "level3": self.level3,
            "sse": self.sse,
            "degenerate": self.degenerate,
            "labels": list(self.labels),
        }

    def fitted(self, path: ChePath) -> np.ndarray:
        """The fitted constant-ramp-constant curve on the path's month grid."""
        t = np.arange(len(path.values))
        k1 = int((self.knot1 - path.start).astype(int))
        k2 = int((self.knot2 - path.start).astype(int))
        return self.level1 + self.slope2 * np.clip(t - k1, 0, k2 - k1)


def segment_che(path: ChePath, min_segment: int = 36, min_defined: int = 120,
                rise_tol: float = 0.05) -> Segmentation:
    """Fit a continuous constant / linear / constant curve to the defined path.

    Every knot pair on the monthly grid with all three segments at least
    ``min_segment`` long is tried; for each pair the two free parameters
    (starting level and slope) have a closed-form least-squares solution,
    evaluated for all second knots at once from prefix sums. The slope is
    constrained to be non-negative. A fit whose total rise is below
    ``rise_tol`` is flagged ``degenerate``.
    """
    idx = np.flatnonzero(~np.isnan(path.values))
    if idx.size < max(min_defined, 3 * min_segment + 1):
        raise InputError("segment_che: too few defined entries")
    # defined entries form one contiguous run after the undefined prefix
    y = path.values[idx]
    n = y.size
    t = np.arange(n, dtype=float)

    def prefix(v):
        return np.r_[0.0, np.cumsum(v)]

    s_t, s_tt, s_y, s_ty = prefix(t), prefix(t * t), prefix(y), prefix(t * y)
    total_y, total_yy = y.sum(), y @ y
    flat_level = total_y / n
    flat_sse = total_yy - total_y * flat_level

    best = (math.inf, 0, 0, 0.0, 0.0)
    for a in range(min_segment - 1, n - 2 * min_segment):
        b = np.arange(a + min_segment, n - min_segment)
        span = (b - a).astype(float)
        # ramp r_t = t - a on (a, b], = span after b, 0 before
        sum_ramp_t = s_t[b + 1] - s_t[a + 1]
        r1 = sum_ramp_t - a * span
        r2 = (s_tt[b + 1] - s_tt[a + 1]) - 2 * a * sum_ramp_t + a * a * span
        ry = (s_ty[b + 1] - s_ty[a + 1]) - a * (s_y[b + 1] - s_y[a + 1])
        tail = n - 1 - b
        sr = r1 + tail * span
        srr = r2 + tail * span**2
        sry = ry + span * (total_y - s_y[b + 1])
        det = n * srr - sr * sr
        level = (srr * total_y - sr * sry) / det
        slope = (n * sry - sr * total_y) / det
        sse = total_yy - level * total_y - slope * sry
        # the middle segment must rise; a falling optimum collapses to the flat fit
        falling = slope < 0
        level = np.where(falling, flat_level, level)
        slope = np.where(falling, 0.0, slope)
        sse = np.where(falling, flat_sse, sse)
        j = int(np.argmin(sse))
        if sse[j] < best[0]:
            best = (float(sse[j]), a, int(b[j]), float(level[j]), float(slope[j]))

    sse, a, b, level, slope = best
    level3 = level + slope * (b - a)
    k1 = path.start + int(idx[a])
    k2 = path.start + int(idx[b])
    return Segmentation(k1, k2, level, slope, level3, max(sse, 0.0), level3 - level < rise_tol)
