"""Hypothesis-test battery: normality, stationarity, seasonality, nonlinearity, long memory.

Every test returns a :class:`TestReport`. Verdicts are ``"reject"`` or
``"fail-to-reject"`` with respect to each test's own null hypothesis and are
always ``p_value <= alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import optimize, stats

from ._ar import autocovariance, durbin_levinson, lag_matrix, yule_walker_aic
from .errors import InputError, NumericError
from .series import MonthlySeries, difference

__all__ = [
    "TestReport",
    "LongMemoryReport",
    "anderson_darling",
    "cramer_von_mises",
    "kpss",
    "kpss_lag",
    "seasonality_qs",
    "seasonality_friedman",
    "seasonality_welch",
    "seasonality_combined",
    "mcleod_li",
    "keenan",
    "tsay",
    "local_whittle_d",
]

REJECT = "reject"
KEEP = "fail-to-reject"


@dataclass(frozen=True)
class TestReport:
    test_name: str
    statistic: float
    p_value: float
    verdict: str
    alpha: float = 0.05
    p_bucket: str = "exact"
    params: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    @property
    def rejected(self) -> bool:
        return self.verdict == REJECT

    def to_dict(self) -> dict:
        return {
            "test_name": self.test_name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "p_bucket": self.p_bucket,
            "verdict": self.verdict,
            "alpha": self.alpha,
            "params": self.params,
        }


def _report(name, statistic, p, alpha=0.05, **kw) -> TestReport:
    statistic = float(statistic)
    if not math.isfinite(statistic):
        raise NumericError(f"{name}: statistic is not finite")
    p = float(min(max(p, 0.0), 1.0))
    return TestReport(name, statistic, p, REJECT if p <= alpha else KEEP, alpha, **kw)


def _values(s) -> np.ndarray:
    return s.values if isinstance(s, MonthlySeries) else np.asarray(s, dtype=float)


def _standardized_sorted(x: np.ndarray, name: str) -> np.ndarray:
    sd = x.std(ddof=1)
    if not sd > 0:
        raise InputError(f"{name}: zero variance")
    return np.sort((x - x.mean()) / sd)


# -- normality ---------------------------------------------------------------

def anderson_darling(s, alpha: float = 0.05) -> TestReport:
    """Anderson-Darling A^2 against the normal family with estimated mean and sd."""
    x = _values(s)
    n = x.size
    if n < 8:
        raise InputError("anderson_darling needs n >= 8")
    z = _standardized_sorted(x, "anderson_darling")
    i = np.arange(1, n + 1)
    h = (2 * i - 1) * (stats.norm.logcdf(z) + stats.norm.logsf(z[::-1]))
    a2 = -n - h.mean()
    aa = a2 * (1 + 0.75 / n + 2.25 / n**2)
    if aa < 0.2:
        p = 1 - math.exp(-13.436 + 101.14 * aa - 223.73 * aa**2)
    elif aa < 0.34:
        p = 1 - math.exp(-8.318 + 42.796 * aa - 59.938 * aa**2)
    elif aa < 0.6:
        p = math.exp(0.9177 - 4.279 * aa - 1.38 * aa**2)
    elif aa < 10:
        p = math.exp(1.2937 - 5.709 * aa + 0.0186 * aa**2)
    else:
        p = 3.7e-24
    return _report("Anderson-Darling", a2, p, alpha, params={"adjusted": aa})


def cramer_von_mises(s, alpha: float = 0.05) -> TestReport:
    """Cramer-von Mises W^2 against the normal family with estimated mean and sd."""
    x = _values(s)
    n = x.size
    if n < 8:
        raise InputError("cramer_von_mises needs n >= 8")
    z = _standardized_sorted(x, "cramer_von_mises")
    u = stats.norm.cdf(z)
    w2 = 1 / (12 * n) + np.sum((u - (2 * np.arange(1, n + 1) - 1) / (2 * n)) ** 2)
    ww = (1 + 0.5 / n) * w2
    if ww < 0.0275:
        p = 1 - math.exp(-13.953 + 775.5 * ww - 12542.61 * ww**2)
    elif ww < 0.051:
        p = 1 - math.exp(-5.903 + 179.546 * ww - 1515.29 * ww**2)
    elif ww < 0.092:
        p = math.exp(0.886 - 31.62 * ww + 10.897 * ww**2)
    elif ww < 1.1:
        p = math.exp(1.111 - 34.242 * ww + 12.832 * ww**2)
    else:
        # the approximation is not usable this far out
        p = 7.37e-10
    return _report("Cramer-von Mises", w2, p, alpha, params={"adjusted": ww})


# -- stationarity ------------------------------------------------------------

_KPSS_P = np.array([0.10, 0.05, 0.025, 0.01])
_KPSS_CRIT = {
    "level": np.array([0.347, 0.463, 0.574, 0.739]),
    "drift": np.array([0.347, 0.463, 0.574, 0.739]),
    "trend": np.array([0.119, 0.146, 0.176, 0.216]),
}


def kpss_lag(n: int) -> int:
    return int(math.floor(4.0 * (n / 100.0) ** 0.25))


def kpss(s, variant: Literal["level", "drift", "trend"] = "level", lag: int | None = None,
         alpha: float = 0.05) -> TestReport:
    """KPSS stationarity test with a Bartlett-window long-run variance.

    ``level`` removes the mean, ``trend`` removes a least-squares line and
    ``drift`` applies no deterministic adjustment (partial sums of the raw
    series, level critical values). The p-value is interpolated in the
    published critical-value table and clamped to [0.01, 0.10]; the bucket
    records whether it sits on either clamp.
    """
    x = _values(s)
    n = x.size
    if n < 20:
        raise InputError("kpss needs n >= 20")
    if variant not in _KPSS_CRIT:
        raise InputError(f"unknown KPSS variant {variant!r}")
    if lag is None:
        lag = kpss_lag(n)

    if variant == "level":
        e = x - x.mean()
    elif variant == "trend":
        t = np.arange(n, dtype=float)
        e = x - np.polyval(np.polyfit(t, x, 1), t)
    else:
        e = x.copy()
    # not demeaned: the drift variant keeps the raw level
    g = np.array([e[k:] @ e[: n - k] / n for k in range(lag + 1)])
    weights = 1.0 - np.arange(1, lag + 1) / (lag + 1.0)
    lrv = g[0] + 2.0 * np.sum(weights * g[1:])
    if not lrv > 0:
        raise NumericError("kpss: non-positive long-run variance")
    stat = np.sum(np.cumsum(e) ** 2) / (n**2 * lrv)

    crit = _KPSS_CRIT[variant]
    p = float(np.interp(stat, crit, _KPSS_P))
    bucket = "<=0.01" if stat >= crit[-1] else ">=0.10" if stat <= crit[0] else "interpolated"
    return _report(f"KPSS ({variant})", stat, p, alpha, p_bucket=bucket,
                   params={"lag": lag, "variant": variant})


# -- seasonality -------------------------------------------------------------

def _season_input(s: MonthlySeries, diff: bool) -> MonthlySeries:
    if not isinstance(s, MonthlySeries):
        raise InputError("seasonality tests need a MonthlySeries")
    if s.frequency != 12:
        raise InputError("seasonality tests assume frequency 12")
    if len(s) < 36:
        raise InputError("seasonality tests need n >= 36")
    return difference(s, 1) if diff else s


def _month_of_year(s: MonthlySeries) -> np.ndarray:
    first = int(s.start.astype(int)) % 12
    return (first + np.arange(len(s))) % 12


def seasonality_qs(s: MonthlySeries, diff: bool = True, alpha: float = 0.05) -> TestReport:
    """QS test: Ljung-Box-type statistic on the positive autocorrelations at lags 12 and 24.

    Negative autocorrelations at the seasonal lags are set to zero, so only
    positive seasonal dependence counts; the statistic is referred to
    chi-square with 2 degrees of freedom.
    """
    y = _season_input(s, diff).values
    n = y.size
    f = 12
    acov = autocovariance(y, 2 * f)
    if acov[0] == 0:
        rho = np.zeros(2)
    else:
        rho = np.clip(acov[[f, 2 * f]] / acov[0], 0.0, None)
    q = n * (n + 2) * (rho[0] ** 2 / (n - f) + rho[1] ** 2 / (n - 2 * f))
    return _report("QS seasonality", q, stats.chi2.sf(q, 2), alpha,
                   params={"diff": diff, "rho12": float(rho[0]), "rho24": float(rho[1])})


def seasonality_friedman(s: MonthlySeries, diff: bool = True, alpha: float = 0.05) -> TestReport:
    """Friedman rank test: complete calendar years as blocks, months as treatments."""
    y = _season_input(s, diff)
    moy = _month_of_year(y)
    lead = int((12 - moy[0]) % 12)
    years = (len(y) - lead) // 12
    if years < 2:
        raise InputError("Friedman test needs at least two complete calendar years")
    table = y.values[lead: lead + 12 * years].reshape(years, 12)
    if np.ptp(table) == 0:
        stat, p = 0.0, 1.0
    else:
        stat, p = stats.friedmanchisquare(*table.T)
    return _report("Friedman seasonality", stat, p, alpha,
                   params={"diff": diff, "years": years})


def seasonality_welch(s: MonthlySeries, diff: bool = False, alpha: float = 0.05) -> TestReport:
    """Welch's heteroscedastic one-way ANOVA across the 12 month-of-year groups.

    Runs on levels by default: differencing makes neighbouring month groups
    negatively correlated and pushes the size to about 10%.
    """
    y = _season_input(s, diff)
    moy = _month_of_year(y)
    groups = [y.values[moy == m] for m in range(12)]
    k = 12
    ni = np.array([g.size for g in groups], dtype=float)
    mi = np.array([g.mean() for g in groups])
    vi = np.array([g.var(ddof=1) for g in groups])
    total = y.values.var()
    if total == 0:
        return _report("Welch seasonality", 0.0, 1.0, alpha, params={"diff": diff})
    # a constant month group would get infinite weight
    vi = np.maximum(vi, 1e-12 * total)
    w = ni / vi
    grand = np.sum(w * mi) / w.sum()
    tmp = np.sum((1 - w / w.sum()) ** 2 / (ni - 1))
    stat = np.sum(w * (mi - grand) ** 2) / (k - 1) / (1 + 2 * (k - 2) / (k**2 - 1) * tmp)
    df2 = (k**2 - 1) / (3 * tmp)
    return _report("Welch seasonality", stat, stats.f.sf(stat, k - 1, df2), alpha,
                   params={"diff": diff, "df1": k - 1, "df2": float(df2)})


def seasonality_combined(s: MonthlySeries, qs_alpha: float = 0.01,
                         friedman_alpha: float = 0.002, diff: bool = True) -> TestReport:
    """Seasonal iff the QS test rejects at 1% or the Friedman test at 0.2%.

    The combined p-value is the smaller of the two sub-p-values each rescaled
    to its own threshold, so ``p <= 1`` reproduces the OR rule with alpha 1.
    """
    q = seasonality_qs(s, diff, qs_alpha)
    fr = seasonality_friedman(s, diff, friedman_alpha)
    ratio = min(q.p_value / qs_alpha, fr.p_value / friedman_alpha)
    p = min(1.0, ratio * qs_alpha)
    params = {"qs_p": q.p_value, "qs_alpha": qs_alpha,
              "friedman_p": fr.p_value, "friedman_alpha": friedman_alpha, "diff": diff}
    return _report("Combined seasonality", ratio, p, qs_alpha, params=params)


# -- nonlinearity ------------------------------------------------------------

def mcleod_li(s, max_lag: int = 24, alpha: float = 0.05) -> TestReport:
    """McLeod-Li portmanteau test on the squared mean-centred series.

    ``p_value`` is the Ljung-Box p at ``max_lag``; the maximum and minimum
    p-values over lags ``1..max_lag`` are kept in ``params``.
    """
    x = _values(s)
    n = x.size
    if not 1 <= max_lag < n - 1:
        raise InputError("mcleod_li: max_lag out of range")
    y = (x - x.mean()) ** 2
    g = autocovariance(y, max_lag)
    if g[0] == 0:
        raise InputError("mcleod_li: zero variance")
    rho = g[1:] / g[0]
    lags = np.arange(1, max_lag + 1)
    q = n * (n + 2) * np.cumsum(rho**2 / (n - lags))
    p = stats.chi2.sf(q, lags)
    return _report("McLeod-Li", q[-1], p[-1], alpha,
                   params={"max_lag": max_lag, "max_p": float(p.max()), "min_p": float(p.min())})


def _ar_order(x: np.ndarray, ar_order, max_order) -> int:
    if ar_order is None:
        ar_order = yule_walker_aic(x, max_order).order
    return max(1, int(ar_order))


def _ols_resid(y: np.ndarray, X: np.ndarray) -> np.ndarray:
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    return y - X @ beta


def keenan(s, ar_order: int | None = None, max_order: int | None = None,
           alpha: float = 0.05) -> TestReport:
    """Keenan's one-degree-of-freedom test for nonlinearity against an AR(m) null.

    The AR(m) is fitted by Yule-Walker; its squared fitted values, purged of
    the lags, are tested as an omitted regressor. ``m`` defaults to the AIC
    choice with ``max_order = floor(10 log10 n)``.
    """
    x = _values(s)
    n = x.size
    m = _ar_order(x, ar_order, max_order)
    if n - 2 * m - 2 < 1:
        raise InputError("keenan: series too short for the AR order")
    acov = autocovariance(x, m)
    if acov[0] == 0:
        raise InputError("keenan: zero variance")
    _, phis, _ = durbin_levinson(acov)
    mu = x.mean()
    y, lags = lag_matrix(x, m)
    fitted = mu + (lags - mu) @ phis[m]
    r1 = y - fitted
    design = np.column_stack([np.ones(y.size), lags])
    # centring first is exact (the difference lies in the design span) and avoids cancellation
    r2 = _ols_resid((fitted - mu) ** 2, design)
    eta2 = (r1 @ r2) ** 2 / (r2 @ r2)
    df2 = n - 2 * m - 2
    f = eta2 * df2 / (r1 @ r1 - eta2)
    return _report("Keenan", f, stats.f.sf(f, 1, df2), alpha,
                   params={"ar_order": m, "df1": 1, "df2": df2})


def tsay(s, ar_order: int | None = None, max_order: int | None = None,
         alpha: float = 0.05) -> TestReport:
    """Tsay's F test with all quadratic cross-products of the m lagged values."""
    x = _values(s)
    m = _ar_order(x, ar_order, max_order)
    y, lags = lag_matrix(x, m)
    nobs = y.size
    design = np.column_stack([np.ones(nobs), lags])
    r = _ols_resid(y, design)
    iu, ju = np.triu_indices(m)
    cross = lags[:, iu] * lags[:, ju]
    beta, *_ = np.linalg.lstsq(design, cross, rcond=None)
    z = cross - design @ beta
    k = z.shape[1]
    df2 = nobs - m - k - 1
    if df2 < 1:
        raise InputError("tsay: series too short for the AR order")
    e = _ols_resid(r, z)
    if not (e @ e) > 0:
        raise NumericError("tsay: perfect fit")
    f = ((r @ r - e @ e) / k) / ((e @ e) / df2)
    return _report("Tsay", f, stats.f.sf(f, k, df2), alpha,
                   params={"ar_order": m, "df1": k, "df2": df2})


# -- long memory -------------------------------------------------------------

@dataclass(frozen=True)
class LongMemoryReport:
    d: float
    bandwidth_m: int
    se: float

    @property
    def implied_h(self) -> float:
        return self.d + 0.5

    @property
    def long_memory(self) -> bool:
        return self.d - 2.0 * self.se > 0

    def to_report(self) -> TestReport:
        """One-sided z test of d > 0, thresholded at the 2-se rule."""
        z = self.d / self.se
        return _report("Local Whittle long memory", self.d, stats.norm.sf(z),
                       float(stats.norm.sf(2.0)),
                       params={"bandwidth_m": self.bandwidth_m, "se": self.se,
                               "implied_h": self.implied_h})


def local_whittle_d(s, m: int | None = None, bounds=(-1.0, 2.0)) -> LongMemoryReport:
    """Robinson's local Whittle estimate of the memory parameter d.

    Minimises ``log(mean(lambda_j**(2d) I_j)) - 2d mean(log lambda_j)`` over the
    first ``m`` Fourier frequencies. ``m`` defaults to ``floor(n**0.65)``.
    """
    x = _values(s)
    n = x.size
    if m is None:
        m = int(n**0.65)
    if not 1 < m < n / 2:
        raise InputError(f"local_whittle_d: bandwidth m={m} must satisfy 1 < m < n/2")
    periodogram = np.abs(np.fft.fft(x - x.mean())[1: m + 1]) ** 2
    if not periodogram.any():
        raise InputError("local_whittle_d: zero variance")
    lam = 2 * np.pi * np.arange(1, m + 1) / n
    log_lam = np.log(lam)
    mean_log = log_lam.mean()

    def objective(d):
        return np.log(np.mean(np.exp(2 * d * log_lam) * periodogram)) - 2 * d * mean_log

    res = optimize.minimize_scalar(objective, bounds=bounds, method="bounded",
                                   options={"xatol": 1e-8})
    return LongMemoryReport(float(res.x), int(m), 1.0 / (2.0 * math.sqrt(m)))
