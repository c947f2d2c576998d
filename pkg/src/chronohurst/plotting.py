"""Static SVG figures for an analysis run."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import InputError  # noqa: E402

__all__ = ["emit_plots", "FIGURES", "SIGNIFICANCE_GID"]

FIGURES = ("series.svg", "acf_pacf.svg", "che.svg", "wavelet_power.svg", "global_spectrum.svg")
SIGNIFICANCE_GID = "significance-contours"

_RC = {
    "svg.hashsalt": "chronohurst",
    "svg.fonttype": "none",
    "figure.dpi": 100,
    "font.size": 9,
}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return path


def _series_figure(s, path):
    fig, ax = plt.subplots(figsize=(9, 3.2))
    ax.plot(1970 + s.months.astype(int) / 12.0, s.values, lw=0.7, color="k")
    ax.set_xlabel("year")
    ax.set_ylabel("count")
    ax.set_title(s.label or "series")
    return _save(fig, path)


def _acf_figure(acf, pacf, path):
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.2), sharey=True)
    for ax, cf, title in ((axes[0], acf, "ACF"), (axes[1], pacf, "PACF")):
        ax.vlines(cf.lags, 0, cf.coefficients, color="k", lw=1)
        ax.axhline(0, color="k", lw=0.5)
        for sign in (1, -1):
            ax.axhline(sign * cf.confidence_band, color="tab:blue", ls="--", lw=0.8)
        ax.set_xlabel("lag (months)")
        ax.set_title(title)
    return _save(fig, path)


def _che_figure(che_path, seg, path):
    fig, ax = plt.subplots(figsize=(9, 3.5))
    years = 1970 + che_path.months.astype(int) / 12.0
    ax.plot(years, che_path.values, lw=0.9, color="k", label=f"H ({che_path.method})")
    ax.axhline(0.5, color="grey", lw=0.6, ls=":")
    if seg is not None:
        ax.plot(years, seg.fitted(che_path), color="tab:red", lw=1, label="segmented fit")
        for knot in (seg.knot1, seg.knot2):
            ax.axvline(1970 + int(knot.astype(int)) / 12.0, color="tab:red", ls="--", lw=0.8)
    ax.set_xlabel("year")
    ax.set_ylabel("H")
    ax.legend(loc="lower right", frameon=False)
    return _save(fig, path)


def _wavelet_figure(spec, ridge_list, path):
    fig, ax = plt.subplots(figsize=(9, 4))
    years = spec.decimal_years
    logp = np.log2(spec.periods)
    step = years[1] - years[0] if years.size > 1 else 1 / 12
    half = (logp[1] - logp[0]) / 2 if logp.size > 1 else 0.05
    ax.imshow(spec.power, origin="lower", aspect="auto", cmap="viridis",
              extent=(years[0] - step / 2, years[-1] + step / 2, logp[0] - half, logp[-1] + half),
              interpolation="nearest")
    mask = spec.significance_mask
    if mask is not None and mask.any():
        cs = ax.contour(years, logp, mask.astype(float), levels=[0.5], colors="white",
                        linewidths=0.8)
        cs.set_gid(SIGNIFICANCE_GID)
    for r in ridge_list:
        ax.plot(years[r.times], np.log2(r.periods), color="k", lw=0.8)
    coi = np.log2(np.maximum(spec.coi, spec.periods[0]))
    ax.fill_between(years, coi, logp[-1] + half, color="white", alpha=0.35, lw=0)
    ticks = np.arange(np.ceil(logp[0]), np.floor(logp[-1]) + 1)
    ax.set_yticks(ticks)
    ax.set_yticklabels([f"{2**t:g}" for t in ticks])
    ax.set_ylim(logp[0] - half, logp[-1] + half)
    ax.set_xlabel("year")
    ax.set_ylabel("period (years)")
    return _save(fig, path)


def _global_figure(gs, path):
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(gs.avg_power, gs.periods, color="k", lw=1, label="global power")
    ax.plot(gs.significance_level, gs.periods, color="tab:red", lw=1,
            label=f"{100 * gs.alpha:g}% level")
    ax.set_yscale("log", base=2)
    ax.set_xlabel("average power")
    ax.set_ylabel("period (years)")
    ax.legend(frameon=False)
    return _save(fig, path)


def emit_plots(report, out, spectrum=None, che_path=None) -> list[Path]:
    """Write the five figures of ``report`` to directory ``out``.

    ``spectrum`` and ``che_path`` default to the full-series spectrum and the
    CHE path carried by the report.
    """
    from .wavelet import ridges

    out = Path(out)
    if not out.is_dir():
        raise InputError(f"plot directory does not exist: {out}")
    spectrum = spectrum if spectrum is not None else report.spectrum_full
    che_path = che_path if che_path is not None else report.che_path
    gs = report.global_subset if report.global_subset is not None else report.global_full
    with matplotlib.rc_context(_RC):
        try:
            return [
                _series_figure(report.series, out / FIGURES[0]),
                _acf_figure(report.acf, report.pacf, out / FIGURES[1]),
                _che_figure(che_path, report.segmentation, out / FIGURES[2]),
                _wavelet_figure(spectrum, ridges(spectrum), out / FIGURES[3]),
                _global_figure(gs, out / FIGURES[4]),
            ]
        except OSError as exc:
            raise InputError(f"cannot write plots to {out}: {exc}") from None
