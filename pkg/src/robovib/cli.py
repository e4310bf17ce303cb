"""Command-line interface.

::

    robovib synth   --config scenario.json --out rec.csv
    robovib impact  rec.csv --config cfg.json --out p1.json
    robovib compare p1.json p2.json p3.json --out trend.json
    robovib spindle rec.csv --config cfg.json --out spindle.json
    robovib milling rec.csv --config cfg.json --out milling.json

Exit codes: 0 success, 1 input/parse error, 2 configuration or usage
error, 3 analysis failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from robovib import __version__
from robovib.commands import run_compare, run_impact, run_milling, run_spindle, run_synth, waterfall_table
from robovib.config import load_config
from robovib.errors import AnalysisError, ConfigError, InvalidInputError
from robovib.files import parse_recording, write_recording, write_table
from robovib.report import load_report, write_report

log = logging.getLogger("robovib")

EXIT_OK, EXIT_INPUT, EXIT_CONFIG, EXIT_ANALYSIS = 0, 1, 2, 3


def _side_path(out: Path, suffix: str) -> Path:
    return out.with_name(f"{out.stem}.{suffix}.csv")


def _cmd_synth(args) -> None:
    config = load_config(args.config)
    recording = run_synth(config)
    write_recording(recording, args.out)
    log.info("wrote %d samples to %s", recording.n_samples, args.out)


def _cmd_impact(args) -> None:
    config = load_config(args.config)
    result = run_impact(parse_recording(args.recording), config)
    out = Path(args.out)
    write_report(result.report, out, args.reproducible)
    for axis, wf in result.waterfalls.items():
        header, cols = waterfall_table(wf)
        write_table(_side_path(out, f"waterfall_{axis}"), header, cols)


def _cmd_compare(args) -> None:
    if len(args.reports) < 2:
        raise _UsageError("compare needs at least 2 impact reports")
    config = load_config(args.config)
    reports = [load_report(p) for p in args.reports]
    names = [Path(p).stem for p in args.reports]
    write_report(run_compare(reports, config, names), args.out, args.reproducible)


def _cmd_spindle(args) -> None:
    config = load_config(args.config)
    report = run_spindle(parse_recording(args.recording), config)
    write_report(report, args.out, args.reproducible)


def _cmd_milling(args) -> None:
    config = load_config(args.config)
    result = run_milling(parse_recording(args.recording), config)
    out = Path(args.out)
    write_report(result.report, out, args.reproducible)
    for axis, env in result.envelopes.items():
        n = env.envelope.size
        t = np.arange(n) / env.sample_rate
        write_table(_side_path(out, f"envelope_{axis}"), ["time_s", "envelope"], [t, env.envelope])
        spec = env.envelope_spectrum
        write_table(
            _side_path(out, f"envelope_spectrum_{axis}"),
            ["frequency_hz", "amplitude"],
            [spec.frequencies, spec.amplitudes],
        )


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robovib", description="Vibration diagnostics for robotic machining.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", required=True, help="output path")
    common.add_argument("--reproducible", action="store_true", help="omit timestamps from reports")

    p = sub.add_parser("synth", parents=[common], help="write a synthetic recording")
    p.set_defaults(func=_cmd_synth)
    for name, func, text in (
        ("impact", _cmd_impact, "waterfall and peak analysis of an impact recording"),
        ("spindle", _cmd_spindle, "order analysis of a spindle-only recording"),
        ("milling", _cmd_milling, "envelope analysis of a milling recording"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("recording")
        p.set_defaults(func=func)
    p = sub.add_parser("compare", parents=[common], help="track modes across impact reports")
    p.add_argument("reports", nargs="+")
    p.set_defaults(func=_cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"robovib: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"robovib: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidInputError, OSError) as exc:
        print(f"robovib: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AnalysisError as exc:
        print(f"robovib: analysis failed: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
