"""End-to-end batch analysis: load, describe, test, CHE, wavelets, report."""

from __future__ import annotations

import contextlib
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import hurst, series, stattests, wavelet
from .errors import ChronoHurstError, InputError

__all__ = ["PipelineConfig", "AnalysisReport", "run", "dumps_report", "BUNDLED"]

TOOL = "chronohurst"
BUNDLED = "bundled"


def _version() -> str:
    from . import __version__

    return __version__


@dataclass(frozen=True)
class PipelineConfig:
    """Parameters of one analysis run.

    ``input`` is a CSV path or ``"bundled"`` for the packaged approvals data.
    ``period3_start`` pins the first month of the cyclicity subset instead
    of taking the fitted second knot.
    """

    input: str = BUNDLED
    out: str = "out"
    gap_policy: str = "error"
    che_min_window: int = 24
    che_method: str = "rs"
    segmentation: bool = True
    dj: float = 0.1
    octaves: float = 8
    detrend: str = "none"
    alpha_map: float = 0.99
    alpha_global: float = 0.95
    background: str = "red"
    period3_start: str | None = None
    lw_bandwidth: int | None = None
    dominant_k: int = 3
    seed: int = 0
    emit_plots: bool = False

    def __post_init__(self):
        if self.gap_policy not in ("error", "zero-fill"):
            raise InputError(f"gap_policy must be 'error' or 'zero-fill', got {self.gap_policy!r}")
        if self.che_method not in ("rs", "whittle"):
            raise InputError(f"che_method must be 'rs' or 'whittle', got {self.che_method!r}")
        if self.che_min_window < 16:
            raise InputError("che_min_window must be >= 16")
        if not 0 < self.dj <= 0.25:
            raise InputError("dj must lie in (0, 0.25]")
        if self.octaves <= 0:
            raise InputError("octaves must be positive")
        wavelet.parse_detrend(self.detrend)
        for name in ("alpha_map", "alpha_global"):
            if not 0 < getattr(self, name) < 1:
                raise InputError(f"{name} must lie in (0, 1)")
        if self.background not in ("red", "white"):
            raise InputError("background must be 'red' or 'white'")
        if self.period3_start is not None:
            series.parse_month(self.period3_start)
        if self.dominant_k < 1:
            raise InputError("dominant_k must be >= 1")

    @classmethod
    def from_json(cls, path, **overrides) -> "PipelineConfig":
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise InputError(f"config: file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"config: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise InputError("config: top level must be an object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise InputError(f"config: unknown fields {unknown}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class AnalysisReport:
    """The JSON-ready report plus the in-memory objects the plots need."""

    data: dict
    series: series.MonthlySeries
    che_path: hurst.ChePath | None = None
    segmentation: hurst.Segmentation | None = None
    spectrum_full: wavelet.WaveletSpectrum | None = None
    spectrum_subset: wavelet.WaveletSpectrum | None = None
    global_full: wavelet.GlobalSpectrum | None = None
    global_subset: wavelet.GlobalSpectrum | None = None
    acf: series.CorrelationFunction | None = None
    pacf: series.CorrelationFunction | None = None
    files: list = field(default_factory=list)


@contextlib.contextmanager
def _step(name: str):
    """Re-raise package errors with the failing step named up front."""
    try:
        yield
    except ChronoHurstError as exc:
        msg = str(exc)
        if msg.startswith(f"{name}:"):
            raise
        raise type(exc)(f"{name}: {msg}") from exc


def _clean(obj):
    """Make a value JSON-safe: numpy scalars to Python, NaN/inf to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps_report(data: dict) -> str:
    return json.dumps(_clean(data), indent=2, sort_keys=True) + "\n"


def _input_bytes(config: PipelineConfig) -> bytes:
    if config.input == BUNDLED:
        return (resources.files("chronohurst") / "data" / "cder_approvals.csv").read_bytes()
    p = Path(config.input)
    if not p.is_file():
        raise InputError(f"ingestion: file not found: {p}")
    return p.read_bytes()


def _load(config: PipelineConfig) -> series.MonthlySeries:
    if config.input == BUNDLED:
        return series.load_bundled()
    return series.load_monthly_csv(config.input, config.gap_policy)


def _test_battery(s: series.MonthlySeries, lw_bandwidth) -> list[dict]:
    d1 = series.difference(s, 1)
    entries = [
        ("original", stattests.anderson_darling(s)),
        ("original", stattests.cramer_von_mises(s)),
        ("original", stattests.kpss(s, "level")),
        ("original", stattests.kpss(s, "trend")),
        ("differenced", stattests.kpss(d1, "level")),
        # QS and Friedman difference internally
        ("differenced", stattests.seasonality_qs(s)),
        ("differenced", stattests.seasonality_friedman(s)),
        ("original", stattests.seasonality_welch(s)),
        ("differenced", stattests.seasonality_combined(s)),
        ("original", stattests.mcleod_li(s)),
        ("original", stattests.keenan(s)),
        ("original", stattests.tsay(s)),
        ("differenced", stattests.local_whittle_d(d1, lw_bandwidth).to_report()),
    ]
    out = []
    for which, rep in entries:
        row = rep.to_dict()
        row["series"] = which
        out.append(row)
    return out


def _write(path: Path, text: str, files: list):
    path.write_text(text)
    files.append(path)


def run(config: PipelineConfig) -> AnalysisReport:
    """Run the four analysis steps and write the report and its sidecar files.

    Files written to ``config.out``: ``report.json``, ``acf.csv``,
    ``che_path.csv``, ``wavelet_full_{header.json,power.csv,mask.csv}``,
    ``global_full.csv``, ``global_subset.csv`` and, with ``emit_plots``,
    five SVG figures.
    """
    with _step("config"):
        out = Path(config.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise InputError(f"cannot create output directory {out}: {exc}") from None

    with _step("ingestion"):
        raw = _input_bytes(config)
        s = _load(config)

    files: list[Path] = []
    data: dict = {
        "provenance": {
            "tool": TOOL,
            "version": _version(),
            "input_sha256": hashlib.sha256(raw).hexdigest(),
            "config": config.to_dict(),
        },
        "series": {
            "label": s.label,
            "start": series.format_month(s.start),
            "end": series.format_month(s.end),
            "n": len(s),
        },
    }

    # step I: description
    with _step("descriptive statistics"):
        data["descriptive"] = series.descriptive_stats(s).to_dict()
        max_lag = min(len(s) - 1, 48)
        acf = series.correlation_function(s, "serial", max_lag)
        pacf = series.correlation_function(s, "partial", max_lag)
        data["correlation"] = {
            "max_lag": max_lag,
            "band": acf.confidence_band,
            "acf": acf.coefficients,
            "pacf": pacf.coefficients,
        }
        lines = ["lag,acf,pacf"]
        for lag in range(max_lag + 1):
            p = "" if lag == 0 else repr(float(pacf.coefficients[lag - 1]))
            lines.append(f"{lag},{float(acf.coefficients[lag])!r},{p}")
        _write(out / "acf.csv", "\n".join(lines) + "\n", files)

    # step II: attribute tests
    with _step("test battery"):
        data["ndiffs"] = series.ndiffs(s)
        data["tests"] = _test_battery(s, config.lw_bandwidth)
        combined = next(t for t in data["tests"] if t["test_name"] == "Combined seasonality")
        data["seasonality"] = "seasonal" if combined["verdict"] == stattests.REJECT else "not seasonal"

    # step III: chronological Hurst exponent
    with _step("che"):
        path = hurst.che(s, config.che_min_window, config.che_method)
        _write(out / "che_path.csv", path.to_csv(), files)
        data["che"] = {
            "method": path.method,
            "min_window": path.min_window,
            "undefined_prefix": path.undefined_prefix,
            "final": path.values[-1],
        }
    seg = None
    if config.segmentation:
        with _step("segmentation"):
            seg = hurst.segment_che(path)
            data["che"]["segmentation"] = seg.to_dict()
            data["che"]["regime_means"] = {
                "stagnation": path.mean_between(path.start, seg.knot1),
                "saturation": path.mean_between(seg.knot2, s.end),
            }

    # step IV: periodicities
    with _step("wavelet"):
        full = wavelet.morlet_cwt(s, config.dj, config.octaves, detrend=config.detrend)
        full = wavelet.significance(full, config.alpha_map, config.background)
        files.extend(full.write(out, "wavelet_full"))
        gfull = wavelet.global_spectrum(full, config.alpha_global, config.background)
        _write(out / "global_full.csv", gfull.to_csv(), files)
        ridge_list = wavelet.ridges(full)

        if config.period3_start is not None:
            sub_start, source = series.parse_month(config.period3_start), "config"
        elif seg is not None:
            sub_start, source = seg.knot2, "knot2"
        else:
            sub_start, source = s.start, "full series"
        subset = s.between(sub_start)
        spec_sub = gsub = None
        dominant: list[float] = []
        if len(subset) >= 64:
            spec_sub = wavelet.morlet_cwt(subset, config.dj, config.octaves,
                                          detrend=config.detrend)
            gsub = wavelet.global_spectrum(spec_sub, config.alpha_global, config.background)
            _write(out / "global_subset.csv", gsub.to_csv(), files)
            dominant = wavelet.dominant_periods(gsub, config.dominant_k)
        data["wavelet"] = {
            "background": config.background,
            "lag1": full.lag1,
            "alpha_map": config.alpha_map,
            "alpha_global": config.alpha_global,
            "significant_fraction": full.significant_fraction(),
            "dominant_periods_full": wavelet.dominant_periods(gfull, config.dominant_k),
            "ridges": [
                {"first": series.format_month(full.start + int(r.times[0])),
                 "last": series.format_month(full.start + int(r.times[-1])),
                 "months": len(r),
                 "median_period_years": r.median_period}
                for r in ridge_list
            ],
            "subset": {
                "start": series.format_month(subset.start),
                "source": source,
                "n": len(subset),
                "dominant_periods_years": dominant,
                "note": None if spec_sub is not None else "subset shorter than 64 months",
            },
        }

    with _step("find_frequency"):
        data["find_frequency"] = {
            "period": wavelet.find_frequency(s),
            "unit": "samples",
            "note": "period in observations (months for monthly data), not years",
        }

    report = AnalysisReport(data, s, path, seg, full, spec_sub, gfull, gsub, acf, pacf)
    if config.emit_plots:
        with _step("plots"):
            from .plotting import emit_plots

            files.extend(emit_plots(report, out))
    data["files"] = sorted(p.name for p in files) + ["report.json"]
    _write(out / "report.json", dumps_report(data), files)
    report.files = files
    return report
