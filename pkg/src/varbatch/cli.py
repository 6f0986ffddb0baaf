"""Command-line interface.

Subcommands: ``synth``, ``plan``, ``stats`` and ``loss-check``. Options may
also come from a JSON file given with ``--config``; keys are the long option
names (``bucket-limits`` or ``bucket_limits``) and command-line flags win.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Sequence

from .errors import ConfigError, DataError, VarbatchError
from .manifest import (DEFAULT_SAMPLE_RATE, DistributionSpec, FORMATS, manifest_to_bytes, read_manifest,
                       seconds_to_samples, synth_manifest)
from .masked_loss import PaddedBatch, mask_invariance_holds, masked_sisnr_loss, masked_snr_loss
from .planner import BUCKET_LIMIT_MODES, STRATEGIES, BatchingConfig, DynamicSize, FixedSize, check_coverage, plan_epochs, plan_lines
from .runner import DEFAULT_SEEDS, REPORT_FORMATS, GridCell, SimulationError, SimulationSpec, plan_hash, render_report, run_simulation

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INVARIANT = 0, 2, 3, 4

DEFAULTS = {
    "sample_rate": DEFAULT_SAMPLE_RATE,
    "hours": 10.0,
    "mean_seconds": 16.0,
    "sigma": 0.16,
    "min_seconds": 2.0,
    "max_seconds": 40.0,
    "manifest_seed": 0,
    "strategy": ["random"],
    "fixed": [],
    "dynamic": [],
    "buckets": 10,
    "bucket_limits": "uniform",
    "seed": None,
    "epochs": 1,
    "format": None,
    "out": None,
    "manifest": None,
    "manifest_format": None,
    "epsilon": 1e-8,
    "delta": 1e3,
}


def _add_manifest_args(p: argparse.ArgumentParser, synth_only: bool = False) -> None:
    if not synth_only:
        p.add_argument("--manifest", help="CSV or JSONL manifest; synthesised when omitted")
        p.add_argument("--manifest-format", choices=FORMATS)
        p.add_argument("--manifest-seed", type=int, help="seed of the synthetic manifest (default 0)")
    p.add_argument("--sample-rate", type=int, metavar="HZ", help="default 16000")
    p.add_argument("--hours", type=float, help="synthetic dataset duration (default 10)")
    p.add_argument("--mean-seconds", type=float, help="synthetic mean length (default 16)")
    p.add_argument("--sigma", type=float, help="log-length standard deviation (default 0.16)")
    p.add_argument("--min-seconds", type=float, help="default 2")
    p.add_argument("--max-seconds", type=float, help="default 40")


def _add_batching_args(p: argparse.ArgumentParser, multi: bool) -> None:
    nargs = "+" if multi else None
    p.add_argument("--strategy", choices=STRATEGIES, nargs=nargs)
    p.add_argument("--fixed", type=int, nargs=nargs, metavar="K", help="sequences per batch")
    p.add_argument("--dynamic", type=float, nargs=nargs, metavar="SECONDS", help="padded size budget per batch")
    p.add_argument("--buckets", type=int, metavar="N", help="number of buckets (default 10)")
    p.add_argument("--bucket-limits", choices=BUCKET_LIMIT_MODES)
    p.add_argument("--seed", type=int, nargs="+", metavar="S")
    p.add_argument("--epochs", type=int, metavar="E")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varbatch", description=__doc__.split("\n")[0])
    parser.add_argument("--config", help="JSON file with default option values")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic length manifest")
    _add_manifest_args(p, synth_only=True)
    p.add_argument("--seed", type=int, nargs="+", metavar="S")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("plan", help="write the JSONL plan dump and its hash")
    _add_manifest_args(p)
    _add_batching_args(p, multi=False)
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("stats", help="simulate a configuration grid and report padding statistics")
    _add_manifest_args(p)
    _add_batching_args(p, multi=True)
    p.add_argument("--format", choices=REPORT_FORMATS)
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("loss-check", help="evaluate masked losses on a JSON batch fixture")
    p.add_argument("batch", help="JSON object with targets, estimates and valid_lengths")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float, help="perturbation applied to padded entries (default 1e3)")
    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    config = {k.replace("-", "_"): v for k, v in raw.items()}
    unknown = sorted(set(config) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return config


def _resolve(args: argparse.Namespace, config: dict) -> dict:
    given = {k: v for k, v in vars(args).items() if v is not None}
    if "fixed" in given or "dynamic" in given:
        # batch size flags replace the config file's sizes as a group
        config = {k: v for k, v in config.items() if k not in ("fixed", "dynamic")}
    opts = dict(DEFAULTS)
    opts.update(config)
    opts.update(given)
    return opts


def _as_list(value) -> list:
    if value is None:
        return []
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _distribution(opts: dict) -> DistributionSpec:
    try:
        return DistributionSpec.from_seconds(opts["mean_seconds"], opts["sigma"], opts["min_seconds"],
                                             opts["max_seconds"], opts["sample_rate"])
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(str(exc)) from None


def _manifest(opts: dict):
    if opts["manifest"] is not None:
        try:
            return read_manifest(opts["manifest"], opts["manifest_format"], opts["sample_rate"])
        except OSError as exc:
            raise DataError(f"cannot read manifest: {exc}") from None
    total = seconds_to_samples(opts["hours"] * 3600, opts["sample_rate"])
    return synth_manifest(_distribution(opts), total, opts["manifest_seed"], opts["sample_rate"])


def _size_modes(opts: dict) -> list:
    modes = [FixedSize(int(k)) for k in _as_list(opts["fixed"])]
    modes += [DynamicSize(seconds_to_samples(s, opts["sample_rate"])) for s in _as_list(opts["dynamic"])]
    return modes


def _emit(text: str | bytes, out: str | None) -> None:
    data = text.encode("utf-8") if isinstance(text, str) else text
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(out, "wb") as fh:
            fh.write(data)


def cmd_synth(opts: dict) -> int:
    seeds = _as_list(opts["seed"]) or [opts["manifest_seed"]]
    if len(seeds) != 1:
        raise ConfigError("synth takes exactly one --seed")
    total = seconds_to_samples(opts["hours"] * 3600, opts["sample_rate"])
    manifest = synth_manifest(_distribution(opts), total, seeds[0], opts["sample_rate"])
    fmt = opts["format"] or "csv"
    if fmt not in FORMATS:
        raise ConfigError(f"synth writes {FORMATS}, not {fmt!r}")
    _emit(manifest_to_bytes(manifest, fmt), opts["out"])
    return EXIT_OK


def cmd_plan(opts: dict) -> int:
    strategies = _as_list(opts["strategy"])
    seeds = _as_list(opts["seed"]) or [0]
    modes = _size_modes(opts)
    if len(strategies) != 1 or len(modes) != 1:
        raise ConfigError("plan needs exactly one --strategy and exactly one of --fixed/--dynamic")
    if len(seeds) != 1:
        raise ConfigError("plan takes exactly one --seed")
    manifest = _manifest(opts)
    config = BatchingConfig(strategies[0], modes[0], opts["buckets"], opts["bucket_limits"], seeds[0], opts["epochs"])
    plans = plan_epochs(manifest, config)
    for plan in plans:
        check_coverage(plan, manifest)
    _emit("".join(line + "\n" for line in plan_lines(plans)), opts["out"])
    digest = f"plan_hash={plan_hash(plans):016x}\n"
    (sys.stderr if opts["out"] is None else sys.stdout).write(digest)
    return EXIT_OK


def cmd_stats(opts: dict) -> int:
    modes = _size_modes(opts)
    if not modes:
        raise ConfigError("stats needs at least one --fixed or --dynamic size")
    cells = [GridCell(s, m, opts["buckets"], opts["bucket_limits"]) for s in _as_list(opts["strategy"]) for m in modes]
    fmt = opts["format"] or "json"
    if fmt not in REPORT_FORMATS:
        raise ConfigError(f"stats writes {REPORT_FORMATS}, not {fmt!r}")
    spec = SimulationSpec(cells=cells, seeds=_as_list(opts["seed"]) or list(DEFAULT_SEEDS), epochs=opts["epochs"],
                          sample_rate=opts["sample_rate"], report_path=opts["out"], report_format=fmt)
    manifest = _manifest(opts)
    results = run_simulation(spec, manifest)
    if opts["out"] is None:
        _emit(render_report(results, fmt, manifest.sample_rate), None)
    return EXIT_OK


def cmd_loss_check(opts: dict) -> int:
    try:
        with open(opts["batch"], encoding="utf-8") as fh:
            doc = json.load(fh)
        batch = PaddedBatch(doc["targets"], doc["estimates"], doc["valid_lengths"])
    except (OSError, json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise DataError(f"bad batch fixture {opts['batch']}: {exc}") from None
    eps = float(doc.get("epsilon", opts["epsilon"]))
    snr_fn = lambda b: masked_snr_loss(b, eps)  # noqa: E731
    sisnr_fn = lambda b: masked_sisnr_loss(b, eps)  # noqa: E731
    ok = mask_invariance_holds(batch, opts["delta"], (snr_fn, sisnr_fn))
    print(f"masked_snr_loss: {snr_fn(batch)!r}")
    print(f"masked_sisnr_loss: {sisnr_fn(batch)!r}")
    print(f"mask_invariance: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_INVARIANT


COMMANDS = {"synth": cmd_synth, "plan": cmd_plan, "stats": cmd_stats, "loss-check": cmd_loss_check}


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, SimulationError) and exc.__cause__ is not None:
        return _exit_code(exc.__cause__)
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, DataError):
        return EXIT_DATA
    return EXIT_INVARIANT


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    command = args.command
    try:
        opts = _resolve(args, _load_config(args.config))
        return COMMANDS[command](opts)
    except VarbatchError as exc:
        print(f"varbatch {command}: error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except (ValueError, TypeError) as exc:
        # stray bad values from a config file
        print(f"varbatch {command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
