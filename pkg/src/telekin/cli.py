"""Command-line entry points.

Subcommands: ``calibrate`` (baseline from a relaxed trace), ``run`` (replay a
trace or synthesize an operator for one condition), ``batch`` (all eight
conditions under a master seed), ``analyze`` (rank-based factorial ANOVA over
a CSV), ``serve`` (interactive session service).

Exit codes: 0 ok, 2 usage, 3 bad input (parse/validation/calibration),
4 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from telekin import __version__
from telekin.analysis import art_anova, load_observations
from telekin.biosignal import calibrate_from_frames, load_calibration, save_calibration
from telekin.canonical import dumps_pretty
from telekin.config import EngineConfig, FactorCondition, all_conditions, load_config
from telekin.engine import Engine
from telekin.errors import (
    CalibrationError,
    TelekinError,
    TraceParseError,
    UndefinedFError,
    ValidationError,
)
from telekin.operator import operator_calibration, synthesize_operator
from telekin.rng import SplitMix64, derive
from telekin.trace import load_trace, save_trace


def _load_cfg(args) -> EngineConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return EngineConfig().validate()


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_pretty(payload), encoding="utf-8")


def cmd_calibrate(args) -> int:
    cfg = _load_cfg(args)
    frames = load_trace(args.trace)
    calib = calibrate_from_frames(frames, cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_calibration(calib, out)
    print(f"calibration written to {out} (c_th={calib.c_th:.3f} s)")
    return 0


def _run_one(cfg, condition, frames, calibration, out_dir: Path) -> dict:
    engine = Engine(cfg, condition, calibration)
    out_dir.mkdir(parents=True, exist_ok=True)
    snap_path = out_dir / "snapshots.jsonl"
    with open(snap_path, "w", encoding="utf-8") as fh:
        for frame in frames:
            fh.write(engine.tick(frame).to_json())
            fh.write("\n")
    report = engine.report()
    _write_json(out_dir / "report.json", report)
    return report


def cmd_run(args) -> int:
    cfg = _load_cfg(args)
    condition = FactorCondition.parse(args.condition)
    out_dir = Path(args.out)
    if args.trace is not None:
        calibration = None
        if args.calibration:
            calibration = load_calibration(args.calibration)
        if (condition.concentration or condition.strain) and calibration is None:
            raise CalibrationError(
                "this condition gates on detectors; pass --calibration"
            )
        frames = load_trace(args.trace)
    else:
        calibration = operator_calibration(cfg, args.seed)
        frames = synthesize_operator(condition, cfg, args.seed)
        out_dir.mkdir(parents=True, exist_ok=True)
        save_trace(frames, out_dir / "trace.jsonl")
        save_calibration(calibration, out_dir / "calibration.json")
    report = _run_one(cfg, condition, frames, calibration, out_dir)
    status = "complete" if report["complete"] else "incomplete"
    print(f"{condition.key()}: {status} in {report['ticks']} ticks -> {out_dir}")
    return 0


def cmd_batch(args) -> int:
    cfg = _load_cfg(args)
    out_dir = Path(args.out)
    conditions = all_conditions()
    order = list(range(len(conditions)))
    SplitMix64(derive(args.seed, "batch-order")).shuffle(order)
    manifest = {"version": 1, "seed": args.seed, "runs": []}
    for position, idx in enumerate(order):
        condition = conditions[idx]
        run_seed = derive(args.seed, f"run-{condition.key()}")
        run_dir = out_dir / f"{position:02d}_{condition.key().replace(',', '_')}"
        calibration = operator_calibration(cfg, run_seed)
        frames = synthesize_operator(condition, cfg, run_seed)
        run_dir.mkdir(parents=True, exist_ok=True)
        save_trace(frames, run_dir / "trace.jsonl")
        save_calibration(calibration, run_dir / "calibration.json")
        report = _run_one(cfg, condition, frames, calibration, run_dir)
        manifest["runs"].append({
            "position": position,
            "condition": condition.as_dict(),
            "seed": run_seed,
            "dir": run_dir.name,
            "complete": report["complete"],
        })
        print(f"[{position + 1}/8] {condition.key()}: "
              f"{'complete' if report['complete'] else 'incomplete'}")
    _write_json(out_dir / "batch.json", manifest)
    return 0


def cmd_analyze(args) -> int:
    table = load_observations(args.csv)
    result = art_anova(table)
    payload = {"version": 1, "n": len(table), "effects": result.as_dict()}
    _write_json(Path(args.out), payload)
    for name, eff in result.effects.items():
        print(f"{name:32s} F(1,{eff.df2}) = {eff.F:8.3f}   p = {eff.p:.4f}")
    return 0


def cmd_serve(args) -> int:
    from telekin.bridge import serve  # aiohttp import deferred to keep startup light

    cfg = _load_cfg(args)
    serve(cfg, host=args.host, port=args.port, record_dir=args.record_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="telekin",
        description="Deterministic gated object-manipulation sandbox and analysis tools.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="freeze detector baselines from a relaxed trace")
    p.add_argument("--trace", required=True, help="JSONL sensor trace, at least 60 s")
    p.add_argument("--out", required=True, help="calibration JSON to write")
    p.add_argument("--config", help="engine config JSON")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("run", help="run one condition over a trace or a synthesized operator")
    p.add_argument("--condition", required=True, help="factor string, e.g. c=yes,s=no,e=yes")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--trace", help="JSONL sensor trace to replay")
    src.add_argument("--seed", type=int, help="synthesize a scripted operator from this seed")
    p.add_argument("--calibration", help="calibration JSON (required with detector factors)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="engine config JSON")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("batch", help="run all 8 conditions in seed-randomized order")
    p.add_argument("--seed", type=int, required=True, help="master seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="engine config JSON")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("analyze", help="aligned-rank factorial ANOVA over observations")
    p.add_argument("--csv", required=True,
                   help="CSV: participant,concentration,strain,energy,response")
    p.add_argument("--out", required=True, help="JSON report to write")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("serve", help="interactive session service with browser UI")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8750)
    p.add_argument("--record-dir", help="directory for per-session trace recordings")
    p.add_argument("--config", help="engine config JSON")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TraceParseError, ValidationError, CalibrationError, UndefinedFError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (TelekinError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
