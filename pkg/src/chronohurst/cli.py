"""Command-line entry point: ``analyze``, ``generate`` and ``report``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ChronoHurstError, InputError, NumericError

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chronohurst",
                                description="Long-memory and cyclicity analysis of monthly counts.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the full analysis and write a report")
    a.add_argument("--input", help="month,count CSV (default: the bundled approvals data)")
    a.add_argument("--out", required=True, help="output directory")
    a.add_argument("--config", help="JSON config file; flags override its values")
    a.add_argument("--gap-policy", choices=["error", "zero-fill"])
    a.add_argument("--che-min-window", type=int)
    a.add_argument("--che-method", choices=["rs", "whittle"])
    a.add_argument("--no-segmentation", dest="segmentation", action="store_const", const=False)
    a.add_argument("--dj", type=float)
    a.add_argument("--octaves", type=float)
    a.add_argument("--detrend", help="none | loess | loess:<span>")
    a.add_argument("--alpha-map", type=float)
    a.add_argument("--alpha-global", type=float)
    a.add_argument("--background", choices=["red", "white"])
    a.add_argument("--period3-start", help="YYYY-MM start of the cyclicity subset")
    a.add_argument("--seed", type=int)
    a.add_argument("--emit-plots", action="store_const", const=True)

    g = sub.add_parser("generate", help="write a synthetic monthly series as CSV")
    g.add_argument("--kind", required=True, choices=["fgn", "fbm", "ar1", "white"])
    g.add_argument("--h", type=float, default=0.5)
    g.add_argument("--phi", type=float, default=0.0)
    g.add_argument("--sigma", type=float, default=1.0)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--scale", type=float, default=100.0,
                   help="counts are round(scale * x + offset)")
    g.add_argument("--offset", type=float, default=None,
                   help="default: the smallest shift making every count non-negative")

    r = sub.add_parser("report", help="pretty-print a report JSON")
    r.add_argument("--input", required=True)
    return p


def _analyze(args) -> int:
    from .pipeline import PipelineConfig, run

    overrides = {
        "input": args.input,
        "out": args.out,
        "gap_policy": args.gap_policy,
        "che_min_window": args.che_min_window,
        "che_method": args.che_method,
        "segmentation": args.segmentation,
        "dj": args.dj,
        "octaves": args.octaves,
        "detrend": args.detrend,
        "alpha_map": args.alpha_map,
        "alpha_global": args.alpha_global,
        "background": args.background,
        "period3_start": args.period3_start,
        "seed": args.seed,
        "emit_plots": args.emit_plots,
    }
    if args.config:
        config = PipelineConfig.from_json(args.config, **overrides)
    else:
        config = PipelineConfig(**{k: v for k, v in overrides.items() if v is not None})
    report = run(config)
    print(f"wrote {len(report.files)} files to {config.out}")
    return EXIT_OK


def _generate(args) -> int:
    import numpy as np

    from .series import format_month
    from .synth import GeneratorSpec, generate

    s = generate(GeneratorSpec(args.kind, args.n, args.seed, args.h, args.phi, args.sigma))
    if not args.scale > 0:
        raise InputError("--scale must be positive")
    scaled = args.scale * s.values
    offset = args.offset if args.offset is not None else max(0.0, float(np.ceil(-scaled.min())))
    counts = np.rint(scaled + offset).astype(np.int64)
    if counts.min() < 0:
        raise InputError("scaled series has negative counts; raise --offset")
    lines = ["month,count"]
    lines += [f"{format_month(m)},{c}" for m, c in zip(s.months, counts)]
    Path(args.out).write_text("\n".join(lines) + "\n")
    return EXIT_OK


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if v is None:
        return "NA"
    return str(v)


def _report(args) -> int:
    try:
        data = json.loads(Path(args.input).read_text())
    except FileNotFoundError:
        raise InputError(f"report: file not found: {args.input}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"report: invalid JSON: {exc}") from None
    out = []
    ser = data.get("series", {})
    out.append(f"series   {ser.get('label', '')}  {ser.get('start')}..{ser.get('end')}  "
               f"n={ser.get('n')}")
    prov = data.get("provenance", {})
    out.append(f"input    sha256 {prov.get('input_sha256', '')[:16]}  "
               f"({prov.get('tool')} {prov.get('version')})")
    out.append("")
    out.append("descriptive statistics")
    for k, v in data.get("descriptive", {}).items():
        out.append(f"  {k:<10}{_fmt(v)}")
    out.append("")
    out.append(f"ndiffs   {data.get('ndiffs')}")
    out.append(f"seasonal {data.get('seasonality')}")
    out.append("")
    out.append("tests")
    for t in data.get("tests", []):
        out.append(f"  {t['test_name']:<28}{t['series']:<12}stat {_fmt(t['statistic']):>10}  "
                   f"p {_fmt(t['p_value']):>10}  {t['verdict']}")
    che = data.get("che")
    if che:
        out.append("")
        out.append(f"CHE      method {che['method']}, final H {_fmt(che['final'])}")
        seg = che.get("segmentation")
        if seg:
            out.append(f"  knots {seg['knot1']} / {seg['knot2']}  levels "
                       f"{_fmt(seg['level1'])} -> {_fmt(seg['level3'])}"
                       + ("  (degenerate)" if seg["degenerate"] else ""))
    wv = data.get("wavelet")
    if wv:
        sub = wv["subset"]
        periods = ", ".join(f"{p:.2f}" for p in sub["dominant_periods_years"]) or "none"
        out.append("")
        out.append(f"wavelet  dominant periods from {sub['start']} ({sub['source']}): "
                   f"{periods} years")
    ff = data.get("find_frequency")
    if ff:
        out.append(f"find_frequency {ff['period']} {ff['unit']}")
    print("\n".join(out))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {"analyze": _analyze, "generate": _generate, "report": _report}[args.command]
    try:
        return handler(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ChronoHurstError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
