"""Command-line front end.

    noisychain run --preset bench-n8 --out runs/bench
    noisychain run --config my.toml --workers 4
    noisychain surface runs/bench --observable czz --threshold 0.04
    noisychain dqpt-report runs/bench --window 0.5
    noisychain validate

`run` executes a sweep and writes CSV series plus a manifest; `surface`
and `dqpt-report` post-process a finished run directory; `validate`
runs the oracle cross-check suite and exits nonzero on any failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .analysis import (
    DEFAULT_THRESHOLD,
    dqpt_window_report,
    error_surface,
    write_surface_csv,
    write_threshold_csv,
)
from .config import load_config
from .experiments import PRESETS, load_manifest, run_sweep
from .timeseries import read_csv
from .validation import run_validation


def _add_run_parser(subparsers) -> None:
    p = subparsers.add_parser("run", help="execute a sweep and write its output directory")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--preset", choices=sorted(PRESETS), help="named built-in configuration")
    source.add_argument("--config", help="path to a TOML configuration file")
    p.add_argument("--out", help="output directory (defaults to the config's output_dir)")
    p.add_argument("--workers", type=int, help="process-pool size override")
    p.add_argument("--seed", type=int, help="seed override")


def _add_surface_parser(subparsers) -> None:
    p = subparsers.add_parser(
        "surface", help="mitigation error surface and threshold curve from a run directory"
    )
    p.add_argument("run_dir")
    p.add_argument("--observable", default="czz", help="column to compare (default czz)")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--out", help="surface CSV path (default <run_dir>/surface_<observable>.csv)")


def _add_report_parser(subparsers) -> None:
    p = subparsers.add_parser(
        "dqpt-report", help="peak-doubling diagnostic from a run directory"
    )
    p.add_argument("run_dir")
    p.add_argument("--window", type=float, default=0.5, help="half width around each ideal peak")
    p.add_argument("--out", help="report JSON path (default <run_dir>/dqpt_report.json)")


def _cmd_run(args) -> int:
    if args.preset:
        config = PRESETS[args.preset]
    else:
        config = load_config(args.config)
    overrides = {}
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        config = dataclasses.replace(config, **overrides)
    out = args.out or config.output_dir
    if out is None:
        print("error: no output directory; pass --out or set [run] output_dir", file=sys.stderr)
        return 2
    manifest = run_sweep(config, out)
    n_files = 1 + sum(len(v) for v in manifest["series"]["raw"].values()) + len(
        manifest["series"]["mitigated"]
    )
    print(f"wrote {n_files} series files and manifest.json to {out}")
    print(f"config sha256 {manifest['config_sha256'][:12]}, "
          f"wall time {manifest['wall_time_s']:.1f}s")
    return 0


def _load_run(run_dir: str):
    manifest = load_manifest(run_dir)
    ideal = read_csv(os.path.join(run_dir, manifest["series"]["ideal"]))
    return manifest, ideal


def _cmd_surface(args) -> int:
    manifest, ideal = _load_run(args.run_dir)
    mitigated = {
        float(g): read_csv(os.path.join(args.run_dir, name))
        for g, name in manifest["series"]["mitigated"].items()
    }
    if not mitigated:
        print("error: run has no mitigated series (gamma grid was all zero)", file=sys.stderr)
        return 2
    surface = error_surface(ideal, mitigated, observable=args.observable,
                            threshold=args.threshold)
    out = args.out or os.path.join(args.run_dir, f"surface_{args.observable}.csv")
    write_surface_csv(surface, out)
    curve = os.path.splitext(out)[0] + "_threshold.csv"
    write_threshold_csv(surface, curve)
    print(f"wrote {out} and {curve}")
    for g, ts in zip(surface.gammas, surface.threshold_times):
        print(f"  gamma {g:g}: below {surface.threshold:g} until t = {ts:g}")
    return 0


def _cmd_report(args) -> int:
    manifest, ideal = _load_run(args.run_dir)
    raw = manifest["series"]["raw"]
    noisy = {}
    for g, by_alpha in raw.items():
        name = by_alpha.get("1.0")
        if name is not None:
            noisy[float(g)] = read_csv(os.path.join(args.run_dir, name))
    if not noisy:
        print("error: run has no unscaled noisy series", file=sys.stderr)
        return 2
    report = dqpt_window_report(ideal, noisy, half_width=args.window)
    out = args.out or os.path.join(args.run_dir, "dqpt_report.json")
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_json() + "\n")
    print(f"wrote {out}")
    print(f"ideal peaks at t = {', '.join(f'{t:g}' for t in report.peak_times) or 'none'}")
    for v in report.verdicts:
        mark = "doubled" if v.doubled else "single"
        print(f"  gamma {v.gamma:g}, window around t = {v.t_peak:g}: {mark}")
    return 0


def _cmd_validate(_args) -> int:
    results = run_validation()
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name.ljust(width)} {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="noisychain",
        description="noisy spin-chain dynamics with zero-noise extrapolation",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_run_parser(subparsers)
    _add_surface_parser(subparsers)
    _add_report_parser(subparsers)
    subparsers.add_parser("validate", help="run the oracle cross-check suite")

    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "surface": _cmd_surface,
        "dqpt-report": _cmd_report,
        "validate": _cmd_validate,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
