"""Command-line entry point: ``run``, ``sweep``, ``wigner`` and ``report``.

Exit status: 0 on success, 1 on runtime failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import bench
from .ansatz import PARAMS_PER_LAYER, AnsatzConfig, apply_ansatz
from .fock import partial_trace_qubit
from .optimizers import KINDS
from .optimizers.base import canonical_kind
from .targets import TargetSpec
from .wigner import export_grid, wigner

OUTPUT_ENV = "QUMODEPREP_OUTPUT_DIR"


class UsageError(Exception):
    pass


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_ENV, "results")


def parse_target(text: str, cutoff: int | None = None) -> TargetSpec:
    """``local-gaussian``, ``gaussian:mean=3,std=0.5``, ``non-gaussian``, ``vacuum`` or ``file:PATH``."""
    family, _, rest = text.partition(":")
    kwargs = {}
    if family == "file":
        kwargs = {"family": "explicit", "path": rest}
    else:
        kwargs["family"] = family
        for item in filter(None, rest.split(",")):
            key, _, val = item.partition("=")
            if key not in ("mean", "std", "cutoff"):
                raise UsageError(f"unknown target option {key!r}")
            kwargs[key] = float(val) if key != "cutoff" else int(val)
    if cutoff is not None and "cutoff" not in kwargs:
        kwargs["cutoff"] = cutoff
    try:
        return TargetSpec(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _optimizer_type(text: str) -> str:
    try:
        return canonical_kind(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _parse_overrides(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise UsageError(f"override {item!r} is not key=value")
        out[key.strip()] = yaml.safe_load(val)
    return out


def _load_config(path) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file {path} does not exist")
    data = yaml.safe_load(p.read_text()) or {}
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a mapping")
    return data


def _dump_config(data: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(data, sort_keys=True))


def _print_rows(rows, stream=None) -> None:
    stream = stream or sys.stdout
    stream.write(bench.markdown_table(rows))


# ---------------------------------------------------------------- run


def cmd_run(args) -> int:
    grid = _load_config(args.config)
    flag_map = {
        "optimizer": args.optimizer, "layers": args.layers, "mode": args.mode, "shots": args.shots,
        "trials": args.trials, "base_seed": args.seed, "fd_step": args.fd_step,
        "threshold": args.threshold, "cutoff": args.cutoff,
    }
    for key, val in flag_map.items():
        if val is not None:
            for alias in (key + "s", key):
                grid.pop(alias, None)
            grid[key] = val
    if args.target is not None:
        grid.pop("targets", None)
        grid["target"] = parse_target(args.target, cutoff=args.cutoff).to_dict()
    if args.trace:
        grid["record_trace"] = True
    grid.update(_parse_overrides(args.set))
    configs = bench.expand_grid(grid)
    if len(configs) != 1:
        raise UsageError(f"run executes exactly one cell, the configuration describes {len(configs)}")
    cfg = configs[0]
    out_dir = args.output_dir or os.environ.get(OUTPUT_ENV)
    if out_dir:
        out = Path(out_dir)
        _dump_config({"grid": grid, "cells": [cfg.to_dict()]}, out / "config.resolved.yaml")
        rows, trials = bench.run_sweep([cfg], out, parallelism=args.parallelism)
        bench.emit_report(rows, trials, out)
    else:
        row, _ = bench.run_cell(cfg, parallelism=args.parallelism)
        rows = [row]
    _print_rows(rows)
    return 0


# ---------------------------------------------------------------- sweep


def cmd_sweep(args) -> int:
    grid = _load_config(args.config)
    grid.update(_parse_overrides(args.set))
    if args.seed is not None:
        grid["base_seed"] = args.seed
    configs = bench.expand_grid(grid)
    name = grid.get("name") or Path(args.config).stem
    out = Path(args.output_dir or default_output_dir()) / name
    _dump_config({"grid": grid, "cells": [c.to_dict() for c in configs]}, out / "config.resolved.yaml")

    def progress(cfg, row):
        print(f"[{cfg.cell_id}] {row['target']} {row['optimizer']} L={row['layers']} {row['mode']} "
              f"infidelity_mean={row['infidelity_mean']:.4g}", file=sys.stderr)

    rows, trials = bench.run_sweep(configs, out, parallelism=args.parallelism,
                                   resume=args.resume, on_cell=progress)
    bench.emit_report(rows, trials, out)
    _print_rows(rows)
    return 0


# ---------------------------------------------------------------- wigner


def _load_params(path) -> np.ndarray:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"params file {path} does not exist")
    data = json.loads(p.read_text())
    if isinstance(data, dict):
        for key in ("final_params", "params", "best_params"):
            if key in data:
                data = data[key]
                break
        else:
            raise UsageError(f"{path} holds no final_params/params entry")
    arr = np.asarray(data, dtype=float).ravel()
    if arr.size == 0 or arr.size % PARAMS_PER_LAYER:
        raise UsageError(f"parameter count {arr.size} is not a multiple of {PARAMS_PER_LAYER}")
    return arr


def cmd_wigner(args) -> int:
    if (args.target is None) == (args.params is None):
        raise UsageError("give exactly one of --target or --params")
    if args.points < 2 or not args.range > 0:
        raise UsageError("--points must be >= 2 and --range positive")
    if args.target is not None:
        spec = parse_target(args.target, cutoff=args.cutoff)
        psi = spec.resolve()
        rho = np.outer(psi, psi.conj())
        source = f"target {spec.label}"
    else:
        params = _load_params(args.params)
        layers = params.size // PARAMS_PER_LAYER
        cfg = AnsatzConfig(layers, args.cutoff)
        rho = partial_trace_qubit(apply_ansatz(params, cfg), cfg.cutoff)
        source = f"ansatz {layers} layers from {Path(args.params).name}"
    axis = np.linspace(-args.range, args.range, args.points)
    grid = wigner(rho, axis, axis, source=source)
    out = Path(args.output) if args.output else Path(args.output_dir or default_output_dir()) / "wigner.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    export_grid(grid, out)
    print(f"wrote {out}: W(0,0)={grid.at(0.0, 0.0):.6g} min={grid.values.min():.6g} "
          f"max={grid.values.max():.6g} integral={grid.integral():.6g}")
    return 0


# ---------------------------------------------------------------- report


def cmd_report(args) -> int:
    out = Path(args.directory)
    agg = out / "aggregate.csv"
    if not agg.is_file():
        print(f"error: {agg} not found; run a sweep first", file=sys.stderr)
        return 1
    rows = bench.read_aggregate(agg)
    if not rows:
        print(f"error: {agg} holds no rows; nothing to report", file=sys.stderr)
        return 1
    trials = bench.read_trials(out / "trials.jsonl")
    written = bench.emit_report(rows, trials, out)
    for path in written:
        print(path)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="qumodeprep", description=__doc__, formatter_class=fmt)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{run,sweep,wigner,report}")

    p = sub.add_parser("run", help="run one benchmark cell and print its row", formatter_class=fmt)
    p.add_argument("--config", help="YAML/JSON file with cell settings")
    p.add_argument("--target", help="local-gaussian | gaussian[:mean=..,std=..] | non-gaussian | vacuum | file:PATH")
    p.add_argument("--optimizer", type=_optimizer_type, help=f"one of {', '.join(KINDS)}")
    p.add_argument("--layers", type=int, help="ansatz layers")
    p.add_argument("--mode", choices=("ideal", "sampled"), help="objective evaluation mode")
    p.add_argument("--shots", type=int, help="shots per sampled evaluation (default 6144)")
    p.add_argument("--fd-step", type=float, help="finite-difference step (default 0.03 ideal, 0.08 sampled)")
    p.add_argument("--trials", type=int, help="replications (default 30)")
    p.add_argument("--seed", type=int, help="base seed (default 0)")
    p.add_argument("--threshold", type=float, help="non-convergence threshold on infidelity (default 0.1)")
    p.add_argument("--cutoff", type=int, help="Fock cutoff (default 10)")
    p.add_argument("--trace", action="store_true", help="record per-iteration traces")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
    p.add_argument("--parallelism", type=int, default=1, help="worker processes")
    p.add_argument("--output-dir", help=f"write archives here (default: ${OUTPUT_ENV} if set, else stdout only)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a grid of cells from a config file", formatter_class=fmt)
    p.add_argument("config", help="YAML/JSON sweep description")
    p.add_argument("--resume", action="store_true", help="reuse trials already in the archive")
    p.add_argument("--seed", type=int, default=None, help="override base_seed")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
    p.add_argument("--parallelism", type=int, default=1, help="worker processes")
    p.add_argument("--output-dir", default=None,
                   help=f"parent of results/<name> (default: ${OUTPUT_ENV} or ./results)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("wigner", help="export a Wigner grid as CSV", formatter_class=fmt)
    p.add_argument("--target", help="target spec, as for run")
    p.add_argument("--params", help="JSON file with final_params (a trial record or a list)")
    p.add_argument("--cutoff", type=int, default=10, help="Fock cutoff")
    p.add_argument("--range", type=float, default=5.0, help="grid covers [-range, range] in x and p")
    p.add_argument("--points", type=int, default=201, help="samples per axis")
    p.add_argument("--output", help="CSV path (default <output-dir>/wigner.csv)")
    p.add_argument("--output-dir", default=None, help=f"default: ${OUTPUT_ENV} or ./results")
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("report", help="rebuild tables and traces from a sweep directory", formatter_class=fmt)
    p.add_argument("directory", help="directory holding aggregate.csv and trials.jsonl")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "parallelism", 1) < 1:
        parser.error("--parallelism must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except KeyboardInterrupt:
        print("interrupted; finished cells are kept in the archive", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
