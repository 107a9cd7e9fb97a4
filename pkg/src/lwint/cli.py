"""Command-line entry point: ``lwint run --config s.json --out results/``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .config import SWEEP_AXES, build_scenario, load_config, sweep_cells
from .errors import ConfigError
from .metrics import MetricsSummary, evaluate
from .simnet import run

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value <= 0xFFFFFFFFFFFFFFFF:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {text}")
    return value


def _sweep_arg(text: str):
    key, sep, values = text.partition("=")
    if not sep or not values:
        raise argparse.ArgumentTypeError(f"expected KEY=V1,V2,..., got {text!r}")
    return key.strip(), [v.strip() for v in values.split(",")]


def _coerce_sweep(key: str, raw: list) -> list:
    out = []
    for value in raw:
        if key == "scheme":
            out.append(value)
            continue
        try:
            out.append(int(value) if key == "v" else float(value))
        except ValueError:
            raise ConfigError(f"sweep.{key}", f"cannot parse {value!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lwint", description="Lightweight INT simulation runner")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run a scenario or a sweep and write metrics")
    p.add_argument("--config", required=True, type=Path, help="scenario JSON file")
    p.add_argument("--out", required=True, type=Path, help="results directory")
    p.add_argument("--seed", type=_seed, help="override the config seed")
    p.add_argument("--sweep", action="append", type=_sweep_arg, default=[], metavar="KEY=V1,V2",
                   help=f"sweep an axis ({', '.join(SWEEP_AXES)}); repeatable")
    p.add_argument("--jobs", type=int, default=1, help="parallel cells (default 1)")
    return parser


def run_cell(doc: dict, base_dir: str, seed: int | None, cell: dict):
    """Simulate one sweep cell; returns ``(summary, trace dicts)``."""
    scenario = build_scenario(doc, base_dir, seed=seed, cell=cell)
    result = run(scenario)
    collector, summary = evaluate(result)
    tag = {"scheme": str(scenario.scheme), "v": scenario.v, "bf_ratio": scenario.bf_ratio}
    traces = [{**tag, **t.to_dict()} for t in collector.traces]
    return summary, traces


def _csv_value(value):
    return "" if value is None else value


def write_results(out: Path, rows: list, traces: list, meta: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    columns = MetricsSummary.columns()
    with open(out / "metrics.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for summary in rows:
            writer.writerow({k: _csv_value(v) for k, v in summary.as_row().items()})
    with open(out / "traces.jsonl", "w") as fh:
        for t in traces:
            fh.write(json.dumps(t, separators=(",", ":")) + "\n")
    with open(out / "run_meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_run(args) -> int:
    doc = load_config(args.config)
    overrides = {key: _coerce_sweep(key, raw) for key, raw in args.sweep}
    cells = sweep_cells(doc, overrides)
    base_dir = str(args.config.parent)
    seed = args.seed
    if seed is None:
        seed = build_scenario(doc, base_dir, cell=cells[0]).seed

    # validate every cell before spending time on any simulation
    for cell in cells:
        build_scenario(doc, base_dir, seed=seed, cell=cell)

    if args.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(run_cell, [doc] * len(cells), [base_dir] * len(cells),
                                     [seed] * len(cells), cells))
    else:
        outcomes = [run_cell(doc, base_dir, seed, cell) for cell in cells]

    rows = [summary for summary, _ in outcomes]
    traces = [t for _, cell_traces in outcomes for t in cell_traces]
    meta = {
        "version": __version__,
        "seed": seed,
        "config": doc,
        "cells": [{"scheme": c["scheme"].value, "v": c["v"], "bf_ratio": c["bf_ratio"]} for c in cells],
    }
    write_results(args.out, rows, traces, meta)
    print(f"wrote {len(rows)} cell(s) to {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
    except ConfigError as exc:
        print(f"config error: {exc.field}: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 -- any other failure is a runtime error
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_RUNTIME
