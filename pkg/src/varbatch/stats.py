"""Zero-padding ratio, padded volume and batch footprint statistics.

ZPR is ``sum(padding) / sum(original lengths)``. The denominator is the
length of the dataset before any splitting, which splitting conserves.
A batch's footprint is ``count * padded_length``; it stands in for peak
memory, and the padded volume (sum of footprints) stands in for compute
time.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import CoverageError
from .packer import Batch
from .planner import EpochPlan

METRICS = (
    "zpr", "total_padding", "padded_volume", "batch_count",
    "peak_footprint", "footprint_mean", "footprint_std", "footprint_cv",
)


def padding_of_batch(batch: Batch) -> int:
    return sum(batch.padded_length - s.length for s in batch.segments)


def batch_footprint(batch: Batch) -> int:
    return len(batch.segments) * batch.padded_length


def _covered(plan: EpochPlan) -> int:
    return sum(s.length for s in plan.segments())


def zpr(plan: EpochPlan, original_total: int) -> float:
    covered = _covered(plan)
    if covered != original_total:
        raise CoverageError(f"plan covers {covered} samples but the dataset has {original_total}")
    return sum(padding_of_batch(b) for b in plan.batches) / original_total


@dataclass(frozen=True)
class EpochStats:
    zpr: float
    total_padding: int
    padded_volume: int
    batch_count: int
    peak_footprint: int
    footprint_mean: float
    footprint_std: float
    original_total: int

    @property
    def footprint_cv(self) -> float:
        """Coefficient of variation of batch footprints."""
        return self.footprint_std / self.footprint_mean

    def as_dict(self) -> dict:
        d = asdict(self)
        d["footprint_cv"] = self.footprint_cv
        return d


def epoch_stats(plan: EpochPlan, original_total: int) -> EpochStats:
    covered = _covered(plan)
    if covered != original_total:
        raise CoverageError(f"plan covers {covered} samples but the dataset has {original_total}")
    padding = sum(padding_of_batch(b) for b in plan.batches)
    footprints = [batch_footprint(b) for b in plan.batches]
    volume = sum(footprints)
    mean = volume / len(footprints)
    return EpochStats(
        zpr=padding / original_total,
        total_padding=padding,
        padded_volume=volume,
        batch_count=len(footprints),
        peak_footprint=max(footprints),
        footprint_mean=mean,
        footprint_std=math.sqrt(math.fsum((f - mean) ** 2 for f in footprints) / len(footprints)),
        original_total=original_total,
    )


@dataclass(frozen=True)
class Summary:
    mean: float
    sem: float


def summarize(values: Sequence[float]) -> Summary:
    """Mean and standard error of the mean (``std(ddof=1) / sqrt(n)``)."""
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot summarize an empty sequence")
    if x.size == 1:
        return Summary(float(x[0]), 0.0)
    return Summary(float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size)))


@dataclass(frozen=True)
class Report:
    """Statistics for one configuration over several seeds.

    ``per_epoch[s][e]`` holds the stats of seed ``s`` at epoch ``e``.
    ``across_epochs[s]`` summarises seed ``s`` over its epochs and
    ``across_seeds`` summarises the per-seed epoch means.
    """

    per_epoch: tuple[tuple[EpochStats, ...], ...]
    across_epochs: tuple[dict, ...]
    across_seeds: dict

    def as_dict(self) -> dict:
        return {
            "across_seeds": {m: asdict(s) for m, s in self.across_seeds.items()},
            "across_epochs": [{m: asdict(s) for m, s in d.items()} for d in self.across_epochs],
            "per_epoch": [[st.as_dict() for st in run] for run in self.per_epoch],
        }


def aggregate(runs: Sequence[Sequence[EpochStats]]) -> Report:
    """Reduce per-seed, per-epoch stats to mean and standard error."""
    if not runs or any(len(r) == 0 for r in runs):
        raise ValueError("aggregate needs at least one run with at least one epoch")
    across_epochs = []
    for run in runs:
        across_epochs.append({m: summarize([getattr(st, m) for st in run]) for m in METRICS})
    across_seeds = {m: summarize([d[m].mean for d in across_epochs]) for m in METRICS}
    return Report(tuple(tuple(r) for r in runs), tuple(across_epochs), across_seeds)
