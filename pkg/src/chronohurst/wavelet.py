"""Morlet continuous wavelet transform with AR(1) significance, ridges,
global spectrum and an AR-spectrum dominant-frequency estimate."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from scipy import stats

from ._ar import ar_spectrum, yule_walker_aic
from .errors import InputError, NumericError
from .series import MonthlySeries, format_month

__all__ = [
    "WaveletSpectrum",
    "GlobalSpectrum",
    "Ridge",
    "OMEGA0",
    "FOURIER_FACTOR",
    "loess",
    "parse_detrend",
    "morlet_cwt",
    "significance",
    "ridges",
    "global_spectrum",
    "dominant_periods",
    "find_frequency",
]

OMEGA0 = 6.0
# period / scale for the Morlet wavelet
FOURIER_FACTOR = 4.0 * math.pi / (OMEGA0 + math.sqrt(2.0 + OMEGA0**2))
# decorrelation factor for time averaging (Morlet)
GAMMA_MORLET = 2.32

Background = Literal["red", "white"]


def loess(y: np.ndarray, span: float = 0.75) -> np.ndarray:
    """Local-quadratic loess fit with tricube weights on an equally spaced grid.

    Each point is fitted from its ``floor(span * n)`` nearest neighbours; the
    bandwidth is the distance to the farthest of them.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if not 0 < span <= 1:
        raise InputError("loess span must lie in (0, 1]")
    q = max(3, int(math.floor(n * span)))
    if n < 3:
        raise InputError("loess needs at least 3 points")
    t = np.arange(n, dtype=float)
    out = np.empty(n)
    for i in range(n):
        d = np.abs(t - i)
        h = np.partition(d, q - 1)[q - 1]
        w = np.clip(1.0 - (d / h) ** 3, 0.0, None) ** 3
        u = t - i
        # weighted normal equations for [1, u, u^2]; the intercept is the fit at i
        m = [np.sum(w * u**k) for k in range(5)]
        a = np.array([[m[0], m[1], m[2]], [m[1], m[2], m[3]], [m[2], m[3], m[4]]])
        b = np.array([w @ y, w @ (u * y), w @ (u * u * y)])
        out[i] = np.linalg.solve(a, b)[0]
    return out


def parse_detrend(detrend) -> float | None:
    """``"none"`` -> None; ``"loess"`` -> 0.75; ``"loess:<span>"`` -> span."""
    if detrend is None or detrend == "none":
        return None
    if isinstance(detrend, str) and detrend.startswith("loess"):
        rest = detrend[5:]
        if not rest:
            return 0.75
        if rest.startswith(":"):
            try:
                return float(rest[1:])
            except ValueError:
                pass
    raise InputError(f"detrend must be 'none' or 'loess[:span]', got {detrend!r}")


def _lag1(x: np.ndarray) -> float:
    y = x - x.mean()
    den = y @ y
    return float(y[1:] @ y[:-1] / den) if den > 0 else 0.0


def _ar1_background(periods_months: np.ndarray, phi: float) -> np.ndarray:
    """Normalised AR(1) spectrum (unit-variance process) at the given periods."""
    return (1.0 - phi**2) / (1.0 + phi**2 - 2.0 * phi * np.cos(2.0 * np.pi / periods_months))


@dataclass(frozen=True)
class WaveletSpectrum:
    """Wavelet power on a (period x time) grid.

    ``periods`` and ``coi`` are in years, ``times`` are month offsets from
    ``start``. ``variance`` and ``lag1`` describe the (detrended) series the
    transform was applied to; ``background`` is the AR(1) coefficient used
    for the current mask (NaN before :func:`significance` runs).
    """

    start: np.datetime64
    times: np.ndarray
    periods: np.ndarray
    scales: np.ndarray
    power: np.ndarray
    coi: np.ndarray
    dj: float
    variance: float
    lag1: float
    detrend: str = "none"
    significance_mask: np.ndarray | None = None
    alpha: float = math.nan
    background: float = math.nan

    @property
    def inside_coi(self) -> np.ndarray:
        return self.periods[:, None] <= self.coi[None, :]

    @property
    def months(self) -> np.ndarray:
        return self.start + self.times

    @property
    def decimal_years(self) -> np.ndarray:
        return 1970 + self.months.astype(int) / 12.0

    def significant_fraction(self) -> float:
        """Share of inside-COI cells flagged significant."""
        inside = self.inside_coi
        if self.significance_mask is None or not inside.any():
            return 0.0
        return float(self.significance_mask[inside].mean())

    def header(self) -> dict:
        return {
            "start": format_month(self.start),
            "n_times": int(self.times.size),
            "dj": self.dj,
            "omega0": OMEGA0,
            "periods_years": self.periods.tolist(),
            "coi_years": self.coi.tolist(),
            "variance": self.variance,
            "lag1": self.lag1,
            "detrend": self.detrend,
            "alpha": None if math.isnan(self.alpha) else self.alpha,
            "background": None if math.isnan(self.background) else self.background,
        }

    def power_csv(self) -> str:
        return _matrix_csv(self.periods, self.power, repr)

    def mask_csv(self) -> str:
        mask = self.significance_mask
        if mask is None:
            mask = np.zeros_like(self.power, dtype=bool)
        return _matrix_csv(self.periods, mask.astype(int), str)

    def write(self, directory, stem: str = "wavelet") -> list:
        from pathlib import Path

        d = Path(directory)
        files = [d / f"{stem}_header.json", d / f"{stem}_power.csv", d / f"{stem}_mask.csv"]
        files[0].write_text(json.dumps(self.header(), indent=2) + "\n")
        files[1].write_text(self.power_csv())
        files[2].write_text(self.mask_csv())
        return files


def _matrix_csv(periods: np.ndarray, matrix: np.ndarray, fmt) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["period_years"] + [str(i) for i in range(matrix.shape[1])])
    for p, row in zip(periods, matrix):
        w.writerow([repr(float(p))] + [fmt(v.item()) for v in row])
    return buf.getvalue()


def morlet_cwt(s: MonthlySeries, dj: float = 0.1, octaves: float = 8,
               s0: float = 2.0, detrend="none") -> WaveletSpectrum:
    """Continuous Morlet transform (omega0 = 6) of a monthly series.

    The (optionally loess-detrended) series is mean-removed, zero-padded to
    the next power of two and convolved in the frequency domain with the
    energy-normalised daughter wavelets at scales ``s0 * 2**(j*dj)``,
    ``j = 0..octaves/dj`` (months). Power is ``|W|**2`` in squared data units,
    so white noise of variance v has expected power v at every scale.
    """
    n = len(s)
    if n < 64:
        raise InputError(f"wavelet transform needs n >= 64, got {n}")
    if not 0 < dj <= 0.25:
        raise InputError("dj must lie in (0, 0.25]")
    if octaves <= 0 or s0 <= 0:
        raise InputError("octaves and s0 must be positive")
    span = parse_detrend(detrend)
    x = s.values.astype(float)
    if span is not None:
        x = x - loess(x, span)
    x = x - x.mean()

    npad = 1 << int(math.ceil(math.log2(n)))
    xf = np.fft.fft(x, npad)
    omega = 2.0 * np.pi * np.fft.fftfreq(npad)
    n_scales = int(round(octaves / dj)) + 1
    scales = s0 * 2.0 ** (dj * np.arange(n_scales))
    positive = omega > 0
    power = np.empty((n_scales, n))
    for i, sc in enumerate(scales):
        daughter = np.zeros(npad)
        daughter[positive] = (math.sqrt(2.0 * math.pi * sc) * math.pi**-0.25
                              * np.exp(-0.5 * (sc * omega[positive] - OMEGA0) ** 2))
        power[i] = np.abs(np.fft.ifft(xf * daughter)[:n]) ** 2
    if not np.all(np.isfinite(power)):
        raise NumericError("wavelet power is not finite")

    periods = scales * FOURIER_FACTOR / 12.0
    t = np.arange(n)
    # e-folding time sqrt(2)*s, expressed as a period, measured to the nearer edge
    coi = FOURIER_FACTOR / math.sqrt(2.0) * np.minimum(t + 1, n - t) / 12.0
    label = "none" if span is None else f"loess:{span:g}"
    return WaveletSpectrum(s.start, t, periods, scales, power, coi, float(dj),
                           float(np.var(x)), _lag1(x), label)


def _background_phi(spec: WaveletSpectrum, background: Background) -> float:
    if background == "red":
        return spec.lag1
    if background == "white":
        return 0.0
    raise InputError(f"background must be 'red' or 'white', got {background!r}")


def significance(spec: WaveletSpectrum, alpha: float = 0.99,
                 background: Background = "red") -> WaveletSpectrum:
    """Pointwise chi-square(2) test of local power against an AR(1) background.

    A cell is significant when ``power / variance`` exceeds
    ``P_k * chi2_2(alpha) / 2`` with ``P_k`` the normalised AR(1) spectrum,
    and it lies inside the cone of influence. ``alpha = 0`` disables the test
    (empty mask).
    """
    if not 0 <= alpha < 1:
        raise InputError("alpha must lie in [0, 1)")
    phi = _background_phi(spec, background)
    if alpha == 0 or spec.variance == 0:
        mask = np.zeros_like(spec.power, dtype=bool)
    else:
        level = (spec.variance * _ar1_background(spec.periods * 12.0, phi)
                 * stats.chi2.ppf(alpha, 2) / 2.0)
        mask = (spec.power > level[:, None]) & spec.inside_coi
    return replace(spec, significance_mask=mask, alpha=float(alpha), background=float(phi))


@dataclass(frozen=True)
class Ridge:
    times: np.ndarray
    periods: np.ndarray

    def __len__(self) -> int:
        return self.times.size

    @property
    def median_period(self) -> float:
        return float(np.median(self.periods))


def ridges(spec: WaveletSpectrum, min_rel_power: float = 0.05,
           min_length: int = 12) -> list[Ridge]:
    """Chains of per-column power maxima across periods.

    In every time column the strict local maxima along the period axis with
    power at least ``min_rel_power`` times the largest power in the matrix
    are candidates. A candidate extends the chain that ended in the previous
    column within one period bin; otherwise it starts a new chain. A chain
    is kept when at least ``min_length`` of its points lie inside the cone
    of influence, which discards maxima made by edge padding alone; kept
    chains are reported whole.
    """
    p = spec.power
    top = p.max()
    if top <= 0:
        return []
    floor = min_rel_power * top
    peaks = np.zeros_like(p, dtype=bool)
    peaks[1:-1] = (p[1:-1] > p[:-2]) & (p[1:-1] > p[2:]) & (p[1:-1] >= floor)
    inside = spec.inside_coi

    finished: list[list] = []
    active: dict[int, list] = {}  # row of the chain's last point -> [(t, row), ...]
    for t in range(p.shape[1]):
        new_active: dict[int, list] = {}
        for r in np.flatnonzero(peaks[:, t]):
            chain = None
            for cand in (r, r - 1, r + 1):
                if cand in active:
                    chain = active.pop(cand)
                    break
            chain = chain if chain is not None else []
            chain.append((t, r))
            new_active[r] = chain
        finished.extend(active.values())
        active = new_active
    finished.extend(active.values())

    out = []
    for chain in finished:
        ts, rs = (np.array(v) for v in zip(*chain))
        if inside[rs, ts].sum() >= min_length:
            out.append(Ridge(ts, spec.periods[rs]))
    out.sort(key=lambda r: (int(r.times[0]), r.median_period))
    return out


@dataclass(frozen=True)
class GlobalSpectrum:
    """Time-averaged power per period over inside-COI cells.

    Rows with no inside-COI cell (the longest periods on short series) carry
    NaN in both ``avg_power`` and ``significance_level``.
    """

    periods: np.ndarray
    avg_power: np.ndarray
    significance_level: np.ndarray
    n_cells: np.ndarray
    alpha: float
    background: float

    @property
    def significant(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return self.avg_power > self.significance_level

    def local_maxima(self) -> np.ndarray:
        a = self.avg_power
        ok = ~np.isnan(a)
        i = np.arange(1, a.size - 1)
        keep = ok[i - 1] & ok[i] & ok[i + 1] & (a[i] > a[i - 1]) & (a[i] > a[i + 1])
        return i[keep]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["period_years", "avg_power", "significance_level", "n_cells"])
        for row in zip(self.periods, self.avg_power, self.significance_level, self.n_cells):
            w.writerow([repr(float(row[0])),
                        "" if np.isnan(row[1]) else repr(float(row[1])),
                        "" if np.isnan(row[2]) else repr(float(row[2])),
                        int(row[3])])
        return buf.getvalue()


def global_spectrum(spec: WaveletSpectrum, alpha: float = 0.95,
                    background: Background = "red") -> GlobalSpectrum:
    """Mean inside-COI power per period with a time-averaged AR(1) threshold.

    Averaging ``na`` cells at scale s gives ``dof = 2 sqrt(1 + (na/(2.32 s))^2)``
    degrees of freedom; the threshold is ``variance * P_k * chi2_dof(alpha) / dof``.
    """
    if not 0 < alpha < 1:
        raise InputError("alpha must lie in (0, 1)")
    phi = _background_phi(spec, background)
    inside = spec.inside_coi
    counts = inside.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        avg = np.where(counts > 0, (spec.power * inside).sum(axis=1) / counts, np.nan)
        dof = np.maximum(2.0 * np.sqrt(1.0 + (counts / (GAMMA_MORLET * spec.scales)) ** 2), 2.0)
        level = (spec.variance * _ar1_background(spec.periods * 12.0, phi)
                 * stats.chi2.ppf(alpha, dof) / dof)
    level = np.where(counts > 0, level, np.nan)
    return GlobalSpectrum(spec.periods, avg, level, counts, float(alpha), float(phi))


def dominant_periods(gs: GlobalSpectrum, k: int = 3) -> list[float]:
    """Periods (years) of the k largest significant local maxima, by descending power."""
    if k < 1:
        raise InputError("k must be >= 1")
    idx = [i for i in gs.local_maxima() if gs.significant[i]]
    idx.sort(key=lambda i: -gs.avg_power[i])
    return [float(gs.periods[i]) for i in idx[:k]]


def find_frequency(s: MonthlySeries, n_freq: int = 500, min_peak_ratio: float = 2.0) -> int:
    """Dominant period, in samples, from an AIC-selected autoregressive spectrum.

    A least-squares line is removed first. The AR spectral density is scanned
    on ``n_freq`` frequencies in [0, 1/2]; if its maximum sits at frequency 0
    the first local maximum after the spectrum starts rising is used instead.
    Returns 1 when the spectrum never rises above ``min_peak_ratio`` times
    the flat (white-noise) level, when there is no such maximum, or when the
    period exceeds n/2.
    """
    x = s.values.astype(float)
    n = x.size
    if n < 16:
        raise InputError("find_frequency needs n >= 16")
    t = np.arange(n, dtype=float)
    slope, intercept = np.polyfit(t, x, 1)
    resid = x - (slope * t + intercept)
    var = resid.var()
    if var == 0:
        return 1
    fit = yule_walker_aic(resid)
    if fit.order == 0:
        return 1
    freqs = np.linspace(0.0, 0.5, n_freq)
    spec = ar_spectrum(fit, freqs)
    j = int(np.argmax(spec))
    if spec[j] < min_peak_ratio * var:
        return 1
    if j == 0:
        rising = np.flatnonzero(np.diff(spec) > 0)
        if rising.size == 0:
            return 1
        j = int(rising[0] + 1 + np.argmax(spec[rising[0] + 1:]))
    period = int(math.floor(1.0 / freqs[j] + 0.5))
    return 1 if period > n / 2 else period
