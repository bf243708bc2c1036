"""Command-line interface: solve / propagate / dispersion / compare / sweep.

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
4 singular-region or non-hyperbolic diagnostic.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml

from .errors import ConfigurationError, WavekitError
from .scenario import (EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_OK, RunReport,
                       canonical_json, compare_reports, error_object,
                       exit_code_for, frames_csv, parse_scenario, run_scenario,
                       run_sweep, spectrum_csv, sweep_table)

STATIONARY_IDS = ("schrodinger", "modified_nr_stationary",
                  "modified_rel_stationary", "spin_half_stationary",
                  "massless_spin_half")
TIMEDEP_IDS = ("modified_nr_timedep", "modified_rel_timedep")


def _read_config(path: str) -> str:
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"config file not found: {path}")
    return p.read_text()


def _write_report(report: RunReport, out: str | None, fmt: str, quiet: bool):
    doc = json.dumps(report.to_dict(), sort_keys=True, indent=2, default=str)
    if fmt == "csv":
        kind = report.payload.get("kind")
        text = spectrum_csv(report) if kind == "spectrum" else frames_csv(report)
    else:
        text = doc
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
        if not quiet:
            print(f"report written to {out}")
    elif not quiet:
        print(text)


def _write_error(exc: WavekitError, out: str | None, quiet: bool) -> int:
    obj = error_object(exc)
    text = json.dumps(obj, sort_keys=True, indent=2, default=str)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    if not quiet:
        print(text, file=sys.stderr)
    return obj["exit_code"]


def _run_command(args, expected_ids) -> int:
    try:
        config = parse_scenario(_read_config(args.config))
        if config.equation not in expected_ids:
            raise ConfigurationError(
                f"equation {config.equation!r} is not valid for this command "
                f"(expected one of {expected_ids})")
        if args.frame_stride:
            config.output["frame_stride"] = args.frame_stride
        report = run_scenario(config)
    except WavekitError as exc:
        return _write_error(exc, args.out, args.quiet)
    _write_report(report, args.out, args.format, args.quiet)
    return EXIT_OK


def cmd_solve(args) -> int:
    return _run_command(args, STATIONARY_IDS)


def cmd_propagate(args) -> int:
    return _run_command(args, TIMEDEP_IDS)


def cmd_dispersion(args) -> int:
    return _run_command(args, ("dispersion_audit",))


def cmd_compare(args) -> int:
    try:
        reports = []
        for path in (args.report_a, args.report_b):
            doc = json.loads(Path(path).read_text())
            reports.append(RunReport(doc["scenario"], doc["payload"],
                                     doc.get("diagnostics", {}),
                                     doc.get("version", ""),
                                     doc.get("input_digest", "")))
        delta = compare_reports(reports[0], reports[1])
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot load report: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WavekitError as exc:
        return _write_error(exc, args.out, args.quiet)
    text = json.dumps(delta, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    if not args.quiet:
        print(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        doc = yaml.safe_load(_read_config(args.config))
        if not isinstance(doc, dict) or "sweep" not in doc:
            raise ConfigurationError("sweep config needs a 'sweep' block "
                                     "with 'parameter' and 'values'")
        sweep_block = doc.pop("sweep")
        parameter = sweep_block.get("parameter")
        values = sweep_block.get("values")
        if not parameter:
            raise ConfigurationError("sweep.parameter is required")
        if not values:
            raise ConfigurationError("sweep.values must be a non-empty list")
        cells = run_sweep(doc, parameter, values, jobs=args.jobs)
    except WavekitError as exc:
        return _write_error(exc, args.out, args.quiet)
    table = sweep_table(cells, parameter)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(table)
    if not args.quiet:
        print(table)
    ok = any(c["status"] == "ok" for c in cells)
    return EXIT_OK if ok else EXIT_NONCONVERGENCE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavekit",
        description="Solvers and audits for modified quantum wave equations")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="scenario YAML path")
        p.add_argument("--out", default=None, help="output path")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--frame-stride", type=int, default=None)
        p.add_argument("--quiet", action="store_true")

    common(sub.add_parser("solve", help="stationary spectra"))
    common(sub.add_parser("propagate", help="time-dependent evolution"))
    common(sub.add_parser("dispersion", help="plane-wave residual audit"))

    pc = sub.add_parser("compare", help="delta of two spectrum reports")
    pc.add_argument("report_a")
    pc.add_argument("report_b")
    pc.add_argument("--out", default=None)
    pc.add_argument("--quiet", action="store_true")

    ps = sub.add_parser("sweep", help="one-parameter scenario sweep")
    common(ps)
    return parser


COMMANDS = {"solve": cmd_solve, "propagate": cmd_propagate,
            "dispersion": cmd_dispersion, "compare": cmd_compare,
            "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    return COMMANDS[args.command](args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
