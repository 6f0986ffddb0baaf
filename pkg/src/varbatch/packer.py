"""Segments, batches and the two packing rules.

``pack_fixed`` groups a fixed number of segments per batch. ``pack_dynamic``
caps the padded size ``count * padded_length`` of each batch. Both consume
the segment stream strictly in order and never look ahead.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

from .errors import ConfigError, PackingError
from .manifest import Manifest


class Segment(NamedTuple):
    """Contiguous slice ``[offset, offset + length)`` of a source sequence."""

    sequence_id: str
    offset: int
    length: int


class Batch:
    """Non-empty group of segments, zero-padded to the longest one."""

    __slots__ = ("segments", "padded_length")

    def __init__(self, segments: Iterable[Segment]):
        segments = tuple(segments)
        if not segments:
            raise PackingError("a batch needs at least one segment")
        self.segments = segments
        self.padded_length = max(s.length for s in segments)

    def __len__(self) -> int:
        return len(self.segments)

    def __eq__(self, other) -> bool:
        return isinstance(other, Batch) and self.segments == other.segments

    def __hash__(self) -> int:
        return hash(self.segments)

    def __repr__(self) -> str:
        return f"Batch(padded_length={self.padded_length}, segments={list(self.segments)!r})"

    @property
    def lengths(self) -> list[int]:
        return [s.length for s in self.segments]


def whole_sequences(manifest: Manifest) -> list[Segment]:
    """One segment per record, in manifest order."""
    return [Segment(r.id, 0, r.length) for r in manifest.records]


def split_sequences(manifest: Manifest, budget: int) -> list[Segment]:
    """Cut every sequence into ``budget``-long pieces plus a shorter remainder.

    A sequence of length ``L`` yields ``L // budget`` full segments followed
    by one segment of ``L % budget`` samples when that is non-zero.
    """
    if budget < 1:
        raise ConfigError(f"budget must be >= 1, got {budget}")
    segments = []
    for rec in manifest.records:
        for offset in range(0, rec.length, budget):
            segments.append(Segment(rec.id, offset, min(budget, rec.length - offset)))
    return segments


def pack_fixed(segments: Sequence[Segment], k: int) -> list[Batch]:
    if k < 1:
        raise ConfigError(f"batch size must be >= 1, got {k}")
    return [Batch(tuple(segments[i:i + k])) for i in range(0, len(segments), k)]


def pack_dynamic(segments: Iterable[Segment], budget: int) -> list[Batch]:
    """Greedy packing under ``count * padded_length <= budget``.

    A segment joins the open batch only if the batch would still respect the
    budget with it; otherwise the open batch is closed first.
    """
    if budget < 1:
        raise ConfigError(f"budget must be >= 1, got {budget}")
    batches: list[Batch] = []
    current: list[Segment] = []
    padded = 0
    for seg in segments:
        if seg.length > budget:
            raise PackingError(
                f"segment {seg.sequence_id}@{seg.offset} has length {seg.length} > budget {budget}; "
                "split sequences before dynamic packing")
        new_padded = max(padded, seg.length)
        if current and (len(current) + 1) * new_padded > budget:
            batches.append(Batch(tuple(current)))
            current, new_padded = [], seg.length
        current.append(seg)
        padded = new_padded
    if current:
        batches.append(Batch(tuple(current)))
    return batches
