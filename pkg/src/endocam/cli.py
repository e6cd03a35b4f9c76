"""Command line entry point: ``endocam generate | run | plot | --print-defaults``.

Exit codes: 0 success, 1 invalid input (scenario, trajectory or CSV file),
2 runtime failure. argparse usage errors also exit with 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .autocam import CameraMode
from .reporting import CsvFormatError, plot_svg, read_csv, summary_dict, write_csv
from .scenario import Scenario, load_scenario, preset_names, serialize_scenario, write_trajectory
from .simulator import ConfigError, run

log = logging.getLogger("endocam")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

DEFAULTS_HEADER = """\
# Every scenario key with its default. Lengths in metres, angles in radians,
# times in seconds. `noise.angular_threshold_deg` may replace
# `noise.angular_threshold` on input.
"""


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    if getattr(args, "mode", None):
        scenario.mode = CameraMode(args.mode)
    if getattr(args, "seed", None) is not None:
        scenario.seed = args.seed
    return scenario


def cmd_generate(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    points = scenario.control_points()
    out = Path(args.output)
    write_trajectory(out, points, scenario)
    print(f"wrote {len(points)} control points to {out}")
    return EXIT_OK


def _trial_stem(scenario: Scenario, trial: int, trials: int) -> str:
    stem = f"{scenario.name}-{scenario.mode.value}"
    return f"{stem}-trial{trial + 1}" if trials > 1 else stem


def cmd_run(args) -> int:
    base = _apply_overrides(load_scenario(args.scenario), args)
    if args.trials < 1:
        raise ConfigError("must be at least 1", "--trials")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    results = []
    for trial in range(args.trials):
        # trials differ by seed; on a noise-free path they are identical
        scenario = base.model_copy(update={"seed": base.seed + trial})
        samples, summary = run(scenario.to_setup())
        stem = _trial_stem(base, trial, args.trials)
        csv_path = out_dir / f"{stem}.csv"
        write_csv(csv_path, samples)
        entry = {"trial": trial + 1, "seed": scenario.seed, "csv": csv_path.name, **summary_dict(summary)}
        results.append(entry)
        print(
            f"{stem}: image {entry['mean_image_error_px']:.2f} px, "
            f"3D {entry['mean_centering_error_mm']:.2f} mm, "
            f"orientation {entry['mean_orientation_error_deg']:.2f} deg, "
            f"touches {entry['touch_count']}"
        )

    doc = {
        "scenario": base.name,
        "mode": base.mode.value,
        "units": {
            "mean_image_error_px": "pixels",
            "mean_centering_error_mm": "millimetres",
            "mean_orientation_error_deg": "degrees",
            "touch_count": "debounced contact events",
            "ticks": "samples",
        },
        "trials": results,
    }
    json_path = out_dir / f"{_trial_stem(base, 0, 1)}.json"
    json_path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_plot(args) -> int:
    series = [read_csv(Path(p)) for p in args.csv]
    plot_svg(series, Path(args.output))
    print(f"wrote {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="endocam", description="Autonomous endoscope camera simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--print-defaults", action="store_true", help="print every scenario default and exit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    scenario_help = f"scenario YAML file or preset ({', '.join(preset_names())})"
    modes = [m.value for m in CameraMode]

    gen = sub.add_parser("generate", help="write a (perturbed) ring trajectory file")
    gen.add_argument("scenario", help=scenario_help)
    gen.add_argument("-o", "--output", required=True, help="trajectory file to write")
    gen.add_argument("--seed", type=int)
    gen.set_defaults(func=cmd_generate)

    run_p = sub.add_parser("run", help="simulate and write CSV time series plus a JSON summary")
    run_p.add_argument("scenario", help=scenario_help)
    run_p.add_argument("--mode", choices=modes)
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--trials", type=int, default=1, help="repeat with seeds seed, seed+1, ...")
    run_p.add_argument("--out-dir", default=".", help="directory for CSV and JSON outputs")
    run_p.set_defaults(func=cmd_run)

    plot = sub.add_parser("plot", help="stacked error curves from one or more run CSVs")
    plot.add_argument("csv", nargs="+")
    plot.add_argument("-o", "--output", required=True, help="SVG file to write")
    plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")

    if args.print_defaults:
        sys.stdout.write(DEFAULTS_HEADER + serialize_scenario(Scenario()))
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_RUNTIME

    try:
        return args.func(args)
    except (ConfigError, CsvFormatError) as exc:
        print(f"endocam: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        name = f" {exc.filename}" if exc.filename else ""
        print(f"endocam: error:{name} {exc.strerror or exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # last-resort diagnostic instead of a traceback
        log.debug("unhandled error", exc_info=True)
        print(f"endocam: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
