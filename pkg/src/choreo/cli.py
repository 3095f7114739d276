"""Command line entry point: ``choreo run | preset | verify-all | schema``."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .errors import ConfigError
from .scenario import (
    EXIT_CONFIG,
    PRESET_NAMES,
    SCHEMA,
    load_config,
    preset,
    report_json,
    run_scenario,
)


def _write_report(report: dict, out: str | None) -> None:
    text = report_json(report)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        report = {"version": __version__, "status": "ConfigError", "exit_code": EXIT_CONFIG,
                  "error": {"type": "ConfigError", "message": str(e)}}
        _write_report(report, args.out)
        return EXIT_CONFIG
    res = run_scenario(cfg, seed=args.seed, traj=args.traj, plot=args.plot)
    out = args.out or (cfg.get("outputs", {}).get("report") if isinstance(cfg, dict) else None)
    _write_report(res.report, out)
    return res.exit_code


def cmd_preset(args) -> int:
    try:
        cfg = preset(args.name)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.emit_config:
        sys.stdout.write(json.dumps(cfg, sort_keys=True, indent=2) + "\n")
        return 0
    res = run_scenario(cfg, seed=args.seed, traj=args.traj, plot=args.plot)
    _write_report(res.report, args.out)
    return res.exit_code


def _run_preset(name: str) -> tuple[str, dict]:
    return name, run_scenario(preset(name)).report


def _preset_passed(report: dict) -> bool:
    if not report.get("expectations_met", False):
        return False
    if report["status"] == "ok" and not report.get("verdicts_ok", False):
        return False
    return True


def cmd_verify_all(args) -> int:
    names = args.names or list(PRESET_NAMES)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = dict(pool.map(_run_preset, names))
    else:
        results = dict(_run_preset(n) for n in names)
    failed = 0
    for name in names:
        rep = results[name]
        ok = _preset_passed(rep)
        failed += not ok
        c = rep.get("c")
        cs = "-" if c is None else "(" + ", ".join(str(c[k]) for k in sorted(c, key=int)) + ")"
        print(f"{'PASS' if ok else 'FAIL'}  {name:<14} status={rep['status']:<16} c={cs}")
        for row in rep.get("expectations", []):
            if row.get("report_only"):
                tag = "matched" if row["ok"] else "unmatched"
                print(f"      {row['key']}: expected {row['expected']}, measured {row['actual']} ({tag})")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(json.dumps(results, sort_keys=True, indent=2) + "\n")
    return 1 if failed else 0


def cmd_schema(args) -> int:
    sys.stdout.write(json.dumps(SCHEMA, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="choreo", description="Track divisors on real plane curves around loops.")
    ap.add_argument("--version", action="version", version=f"choreo {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="report path (default: stdout)")
    r.add_argument("--traj", help="trajectory CSV path")
    r.add_argument("--plot", help="SVG plot path")
    r.add_argument("--seed", type=int, default=None)
    r.set_defaults(func=cmd_run)

    p = sub.add_parser("preset", help="run a built-in scenario or print its config")
    p.add_argument("name")
    p.add_argument("--emit-config", action="store_true")
    p.add_argument("--out")
    p.add_argument("--traj")
    p.add_argument("--plot")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_preset)

    v = sub.add_parser("verify-all", help="run every preset and check its expectations")
    v.add_argument("names", nargs="*", help="subset of presets (default: all)")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--out", help="write all reports as one JSON file")
    v.set_defaults(func=cmd_verify_all)

    s = sub.add_parser("schema", help="print the scenario JSON schema")
    s.set_defaults(func=cmd_schema)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
