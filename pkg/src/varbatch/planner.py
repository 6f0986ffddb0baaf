"""Per-epoch batch plans for random, sorted and bucket batching.

random
    Every epoch: shuffle the segments, pack them in that order, shuffle the
    resulting batches.
sorted
    Once: sort segments by ``(length, sequence_id, offset)`` and pack them.
    Every epoch: shuffle the batch order only.
bucket
    Once: assign segments to length buckets. Every epoch: shuffle inside
    each bucket, pack each bucket on its own, pool and shuffle the batches.
    With a single bucket this is exactly the random strategy.

All shuffles draw from :func:`varbatch.rng.derive_stream` so each epoch can
be planned independently of the others.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, TextIO, Union

from .errors import ConfigError, CoverageError
from .manifest import Manifest
from .packer import Batch, Segment, pack_dynamic, pack_fixed, split_sequences, whole_sequences
from .rng import check_seed, derive_stream

STRATEGIES = ("random", "sorted", "bucket")
BUCKET_LIMIT_MODES = ("uniform", "quantile")

__all__ = [
    "Batch", "Segment", "FixedSize", "DynamicSize", "BatchingConfig", "EpochPlan",
    "compute_bucket_limits", "assign_bucket", "prepare_segments", "plan_epoch", "plan_epochs",
    "check_coverage", "plan_lines", "dump_plans",
]


@dataclass(frozen=True)
class FixedSize:
    k: int

    def __str__(self) -> str:
        return f"fixed-{self.k}"


@dataclass(frozen=True)
class DynamicSize:
    """Cap on ``count * padded_length``, in samples."""

    budget: int

    def __str__(self) -> str:
        return f"dynamic-{self.budget}"


SizeMode = Union[FixedSize, DynamicSize]


@dataclass(frozen=True)
class BatchingConfig:
    strategy: str
    size_mode: SizeMode
    num_buckets: int = 10
    bucket_limit_mode: str = "uniform"
    seed: int = 0
    epochs: int = 1

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if isinstance(self.size_mode, FixedSize):
            if self.size_mode.k < 1:
                raise ConfigError(f"fixed batch size must be >= 1, got {self.size_mode.k}")
        elif isinstance(self.size_mode, DynamicSize):
            if self.size_mode.budget < 1:
                raise ConfigError(f"dynamic budget must be >= 1 sample, got {self.size_mode.budget}")
        else:
            raise ConfigError(f"size_mode must be FixedSize or DynamicSize, got {self.size_mode!r}")
        if self.num_buckets < 1:
            raise ConfigError(f"num_buckets must be >= 1, got {self.num_buckets}")
        if self.bucket_limit_mode not in BUCKET_LIMIT_MODES:
            raise ConfigError(f"unknown bucket limit mode {self.bucket_limit_mode!r}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        try:
            check_seed(self.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class EpochPlan:
    batches: tuple[Batch, ...]
    epoch_index: int

    def segments(self) -> Iterator[Segment]:
        for batch in self.batches:
            yield from batch.segments


# --------------------------------------------------------------------------
# Buckets


def compute_bucket_limits(lengths: Sequence[int], num_buckets: int, mode: str = "uniform") -> list:
    """Inner boundaries between ``num_buckets`` length buckets.

    ``uniform`` returns exact rationals ``min + j * (max - min) / num_buckets``.
    ``quantile`` returns the length found at 0-based position
    ``ceil(j * n / num_buckets)`` of the sorted lengths, so that with
    half-open buckets each bucket receives ``n / num_buckets`` sequences
    when the lengths are distinct and the division is exact.
    """
    if not lengths:
        raise ConfigError("cannot compute bucket limits of an empty length list")
    if num_buckets < 1:
        raise ConfigError(f"num_buckets must be >= 1, got {num_buckets}")
    if mode == "uniform":
        lo, hi = min(lengths), max(lengths)
        return [lo + Fraction(j * (hi - lo), num_buckets) for j in range(1, num_buckets)]
    if mode == "quantile":
        n = len(lengths)
        if num_buckets > n:
            raise ConfigError(f"quantile bucketing needs num_buckets <= n ({num_buckets} > {n})")
        ordered = sorted(lengths)
        return [ordered[-(-j * n // num_buckets)] for j in range(1, num_buckets)]
    raise ConfigError(f"unknown bucket limit mode {mode!r}")


def assign_bucket(length: int, boundaries: Sequence) -> int:
    """Index of the half-open interval ``[b_{j-1}, b_j)`` holding ``length``."""
    return bisect_right(boundaries, length)


# --------------------------------------------------------------------------
# Planning


def prepare_segments(manifest: Manifest, size_mode: SizeMode) -> list[Segment]:
    """Segments in stream order; sequences are split only when a dynamic
    budget is shorter than the longest sequence."""
    if isinstance(size_mode, DynamicSize) and size_mode.budget < manifest.max_length:
        return split_sequences(manifest, size_mode.budget)
    return whole_sequences(manifest)


def _pack(segments: Sequence[Segment], size_mode: SizeMode) -> list[Batch]:
    if isinstance(size_mode, FixedSize):
        return pack_fixed(segments, size_mode.k)
    return pack_dynamic(segments, size_mode.budget)


class _Planner:
    """Holds the epoch-independent state for one (manifest, config)."""

    def __init__(self, manifest: Manifest, config: BatchingConfig):
        self.config = config
        self.segments = prepare_segments(manifest, config.size_mode)
        strategy = config.strategy
        if strategy == "bucket":
            if config.num_buckets > len(self.segments):
                raise ConfigError(
                    f"num_buckets ({config.num_buckets}) exceeds the number of segments ({len(self.segments)})")
            if config.num_buckets == 1:
                strategy = "random"
        self.strategy = strategy
        if strategy == "sorted":
            ordered = sorted(self.segments, key=lambda s: (s.length, s.sequence_id, s.offset))
            self.sorted_batches = _pack(ordered, config.size_mode)
        elif strategy == "bucket":
            limits = compute_bucket_limits([s.length for s in self.segments], config.num_buckets,
                                           config.bucket_limit_mode)
            # lengths are integers, so comparing against ceil(b) is exact
            int_limits = [math.ceil(b) for b in limits]
            buckets: list[list[Segment]] = [[] for _ in range(config.num_buckets)]
            for seg in self.segments:
                buckets[assign_bucket(seg.length, int_limits)].append(seg)
            self.limits = limits
            self.buckets = [b for b in buckets if b]

    def epoch(self, epoch_index: int) -> EpochPlan:
        seed, mode = self.config.seed, self.config.size_mode
        if self.strategy == "random":
            order = list(self.segments)
            derive_stream(seed, "segments", epoch_index).shuffle(order)
            batches = _pack(order, mode)
        elif self.strategy == "sorted":
            batches = list(self.sorted_batches)
        else:
            rng = derive_stream(seed, "bucket-segments", epoch_index)
            batches = []
            for bucket in self.buckets:
                order = list(bucket)
                rng.shuffle(order)
                batches.extend(_pack(order, mode))
        derive_stream(seed, "batches", epoch_index).shuffle(batches)
        return EpochPlan(tuple(batches), epoch_index)


def plan_epoch(manifest: Manifest, config: BatchingConfig, epoch_index: int) -> EpochPlan:
    """Plan a single epoch; independent of every other epoch's plan."""
    return _Planner(manifest, config).epoch(epoch_index)


def plan_epochs(manifest: Manifest, config: BatchingConfig) -> list[EpochPlan]:
    planner = _Planner(manifest, config)
    return [planner.epoch(e) for e in range(config.epochs)]


def check_coverage(plan: EpochPlan, manifest: Manifest) -> None:
    """Raise :class:`CoverageError` unless every sample is covered exactly once."""
    by_seq: dict[str, list[tuple[int, int]]] = {}
    for seg in plan.segments():
        if seg.length < 1 or seg.offset < 0:
            raise CoverageError(f"invalid segment {seg}")
        by_seq.setdefault(seg.sequence_id, []).append((seg.offset, seg.length))
    for rec in manifest.records:
        pieces = sorted(by_seq.pop(rec.id, []))
        pos = 0
        for offset, length in pieces:
            if offset != pos:
                raise CoverageError(f"sequence {rec.id!r}: gap or overlap at sample {pos}")
            pos += length
        if pos != rec.length:
            raise CoverageError(f"sequence {rec.id!r}: covered {pos} of {rec.length} samples")
    if by_seq:
        raise CoverageError(f"plan references unknown sequences {sorted(by_seq)[:5]}")


# --------------------------------------------------------------------------
# Plan dump


_ENCODER = json.JSONEncoder(separators=(",", ":"))


def plan_lines(plans: Iterable[EpochPlan]) -> Iterator[str]:
    """Canonical JSONL lines, one per batch, with a fixed key order."""
    for plan in plans:
        for b, batch in enumerate(plan.batches):
            yield _ENCODER.encode({
                "epoch": plan.epoch_index,
                "batch": b,
                "segments": [list(s) for s in batch.segments],
                "padded_length": batch.padded_length,
            })


def dump_plans(plans: Iterable[EpochPlan], sink: TextIO) -> None:
    for line in plan_lines(plans):
        sink.write(line + "\n")

