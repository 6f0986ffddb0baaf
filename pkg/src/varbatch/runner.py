"""Multi-seed, multi-configuration simulations and their reports."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import dataclass
from typing import Sequence

from .errors import ConfigError, VarbatchError
from .manifest import DEFAULT_SAMPLE_RATE, DistributionSpec, Manifest, read_manifest, synth_manifest, total_length
from .planner import BatchingConfig, DynamicSize, EpochPlan, FixedSize, SizeMode, check_coverage, plan_epochs, plan_lines
from .stats import METRICS, Report, aggregate, epoch_stats

log = logging.getLogger(__name__)

DEFAULT_SEEDS = (0, 1, 2, 3, 4)
REPORT_FORMATS = ("csv", "json")


@dataclass(frozen=True)
class GridCell:
    """One batching configuration, without seed or epoch count."""

    strategy: str
    size_mode: SizeMode
    num_buckets: int = 10
    bucket_limit_mode: str = "uniform"

    @property
    def label(self) -> str:
        label = f"{self.strategy}/{self.size_mode}"
        if self.strategy == "bucket":
            label += f"/{self.num_buckets}-{self.bucket_limit_mode}"
        return label

    def config(self, seed: int, epochs: int) -> BatchingConfig:
        return BatchingConfig(self.strategy, self.size_mode, self.num_buckets, self.bucket_limit_mode, seed, epochs)


@dataclass
class SimulationSpec:
    cells: Sequence[GridCell]
    seeds: Sequence[int] = DEFAULT_SEEDS
    epochs: int = 1
    manifest_path: str | None = None
    manifest_format: str | None = None
    synth: DistributionSpec | None = None
    synth_total: int = 10 * 3600 * DEFAULT_SAMPLE_RATE
    synth_seed: int = 0
    sample_rate: int = DEFAULT_SAMPLE_RATE
    report_path: str | None = None
    report_format: str = "json"
    check_invariants: bool = True

    def __post_init__(self):
        if not self.cells:
            raise ConfigError("simulation grid is empty")
        if not self.seeds:
            raise ConfigError("no seeds given")
        if self.report_format not in REPORT_FORMATS:
            raise ConfigError(f"unknown report format {self.report_format!r}")

    def load_manifest(self) -> Manifest:
        if self.manifest_path is not None:
            return read_manifest(self.manifest_path, self.manifest_format, self.sample_rate)
        spec = self.synth or DistributionSpec.speech_like(self.sample_rate)
        return synth_manifest(spec, self.synth_total, self.synth_seed, self.sample_rate)


class SimulationError(VarbatchError):
    """A grid cell failed; ``partial`` holds the cells finished before it."""

    def __init__(self, message: str, cell: GridCell, partial: dict):
        super().__init__(message)
        self.cell = cell
        self.partial = partial


def run_cell(manifest: Manifest, cell: GridCell, seeds: Sequence[int], epochs: int,
             check_invariants: bool = True) -> Report:
    total = total_length(manifest)
    runs = []
    for seed in seeds:
        plans = plan_epochs(manifest, cell.config(seed, epochs))
        if check_invariants:
            for plan in plans:
                check_coverage(plan, manifest)
        runs.append([epoch_stats(plan, total) for plan in plans])
    return aggregate(runs)


def run_simulation(spec: SimulationSpec, manifest: Manifest | None = None) -> dict[GridCell, Report]:
    """Run every grid cell for every seed; returns reports in grid order.

    On failure the reports finished so far are written to
    ``spec.report_path`` (if set) and a :class:`SimulationError` is raised.
    """
    if manifest is None:
        manifest = spec.load_manifest()
    results: dict[GridCell, Report] = {}
    for cell in spec.cells:
        log.info("running %s over %d seed(s)", cell.label, len(spec.seeds))
        try:
            results[cell] = run_cell(manifest, cell, spec.seeds, spec.epochs, spec.check_invariants)
        except VarbatchError as exc:
            if spec.report_path:
                write_report_file(results, spec, manifest.sample_rate)
            raise SimulationError(f"grid cell {cell.label}: {exc}", cell, results) from exc
    if spec.report_path:
        write_report_file(results, spec, manifest.sample_rate)
    return results


# --------------------------------------------------------------------------
# Hashing and reports


def plan_hash(plans: Sequence[EpochPlan]) -> int:
    """64-bit BLAKE2b digest of the canonical JSONL plan dump."""
    h = hashlib.blake2b(digest_size=8)
    for line in plan_lines(plans):
        h.update(line.encode("utf-8"))
        h.update(b"\n")
    return int.from_bytes(h.digest(), "big")


def _size_fields(mode: SizeMode, sample_rate: int) -> dict:
    if isinstance(mode, FixedSize):
        return {"size_mode": "fixed", "size": mode.k}
    assert isinstance(mode, DynamicSize)
    return {"size_mode": "dynamic", "size": mode.budget / sample_rate}


def _cell_fields(cell: GridCell, sample_rate: int) -> dict:
    d = {"strategy": cell.strategy, **_size_fields(cell.size_mode, sample_rate)}
    d["buckets"] = cell.num_buckets if cell.strategy == "bucket" else ""
    d["bucket_limits"] = cell.bucket_limit_mode if cell.strategy == "bucket" else ""
    return d


_SAMPLE_METRICS = ("total_padding", "padded_volume", "peak_footprint", "footprint_mean", "footprint_std")


def report_rows(results: dict[GridCell, Report], sample_rate: int) -> list[dict]:
    """Flat rows, one per cell and metric. Sample-valued metrics also get a
    ``*_seconds`` twin."""
    rows = []
    for cell, report in results.items():
        n_seeds = len(report.per_epoch)
        epochs = len(report.per_epoch[0])
        base = _cell_fields(cell, sample_rate)
        for metric in METRICS:
            s = report.across_seeds[metric]
            rows.append({**base, "metric": metric, "mean": s.mean, "sem": s.sem, "seeds": n_seeds, "epochs": epochs})
            if metric in _SAMPLE_METRICS:
                rows.append({**base, "metric": f"{metric}_seconds", "mean": s.mean / sample_rate,
                             "sem": s.sem / sample_rate, "seeds": n_seeds, "epochs": epochs})
    return rows


CSV_FIELDS = ("strategy", "size_mode", "size", "buckets", "bucket_limits", "metric", "mean", "sem", "seeds", "epochs")


def render_report(results: dict[GridCell, Report], fmt: str, sample_rate: int) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in report_rows(results, sample_rate):
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "sample_rate": sample_rate,
            "cells": [{**_cell_fields(cell, sample_rate), "label": cell.label, **report.as_dict()}
                      for cell, report in results.items()],
        }
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def write_report_file(results: dict[GridCell, Report], spec: SimulationSpec, sample_rate: int) -> None:
    with open(spec.report_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_report(results, spec.report_format, sample_rate))
