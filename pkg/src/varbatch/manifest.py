"""Datasets of sequence lengths.

Lengths are always stored as integer sample counts. Seconds only appear at
the I/O boundary and are converted with ``floor(seconds * sample_rate)``
using exact decimal arithmetic.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import BinaryIO, Iterator, Sequence

import numpy as np

from .errors import ConfigError, ManifestError

DEFAULT_SAMPLE_RATE = 16000
FORMATS = ("csv", "jsonl")


@dataclass(frozen=True)
class SequenceRecord:
    id: str
    length: int


@dataclass(frozen=True)
class Manifest:
    """Ordered, immutable collection of sequence records.

    Record order matters: it is the starting order that the random strategy
    shuffles, so two manifests with the same records in a different order
    give different plans.
    """

    records: tuple[SequenceRecord, ...]
    sample_rate: int = DEFAULT_SAMPLE_RATE
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        if not records:
            raise ManifestError("manifest is empty")
        if not isinstance(self.sample_rate, int) or self.sample_rate < 1:
            raise ManifestError(f"sample_rate must be a positive integer, got {self.sample_rate!r}")
        index = {}
        for pos, rec in enumerate(records):
            if not isinstance(rec.length, int) or rec.length < 1:
                raise ManifestError(f"record {rec.id!r}: length must be a positive integer, got {rec.length!r}")
            if rec.id in index:
                raise ManifestError(f"duplicate id {rec.id!r}")
            index[rec.id] = pos
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_lengths(cls, lengths: Sequence[int], sample_rate: int = DEFAULT_SAMPLE_RATE) -> "Manifest":
        """Build a manifest with ids ``"0", "1", ...``; handy in tests."""
        return cls(tuple(SequenceRecord(str(i), int(n)) for i, n in enumerate(lengths)), sample_rate)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[SequenceRecord]:
        return iter(self.records)

    def __getitem__(self, seq_id: str) -> SequenceRecord:
        return self.records[self._index[seq_id]]

    @property
    def lengths(self) -> list[int]:
        return [r.length for r in self.records]

    @property
    def max_length(self) -> int:
        return max(r.length for r in self.records)


def total_length(manifest: Manifest) -> int:
    return sum(r.length for r in manifest.records)


def seconds_to_samples(seconds, sample_rate: int) -> int:
    """Floor conversion; ``seconds`` may be a str, int, float or Fraction."""
    if isinstance(seconds, float):
        # repr round-trips, so "2.0" style values convert exactly
        seconds = repr(seconds)
    return math.floor(Fraction(seconds) * sample_rate)


# --------------------------------------------------------------------------
# I/O


def _parse_csv_length(text: str, sample_rate: int) -> int:
    text = text.strip()
    if text.endswith("s"):
        return seconds_to_samples(text[:-1].strip(), sample_rate)
    if not text.lstrip("+-").isdigit():
        raise ValueError(f"length {text!r} is neither an integer sample count nor '<seconds>s'")
    return int(text)


def _read_csv(lines: list[str], sample_rate: int) -> list[SequenceRecord]:
    if not lines or [c.strip() for c in lines[0].split(",")] != ["id", "length"]:
        raise ManifestError("line 1: expected CSV header 'id,length'")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2 or not parts[0].strip():
            raise ManifestError(f"line {lineno}: expected 'id,length', got {line!r}")
        try:
            length = _parse_csv_length(parts[1], sample_rate)
        except (ValueError, ZeroDivisionError) as exc:
            raise ManifestError(f"line {lineno}: {exc}") from None
        records.append((lineno, SequenceRecord(parts[0].strip(), length)))
    return _checked(records)


def _read_jsonl(lines: list[str], sample_rate: int) -> list[SequenceRecord]:
    records = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(obj, dict) or "id" not in obj:
            raise ManifestError(f"line {lineno}: expected an object with an 'id' field")
        has_samples, has_seconds = "length_samples" in obj, "length_seconds" in obj
        if has_samples == has_seconds:
            raise ManifestError(f"line {lineno}: need exactly one of 'length_samples' or 'length_seconds'")
        if has_samples:
            length = obj["length_samples"]
            if not isinstance(length, int) or isinstance(length, bool):
                raise ManifestError(f"line {lineno}: length_samples must be an integer")
        else:
            seconds = obj["length_seconds"]
            if not isinstance(seconds, (int, float)) or isinstance(seconds, bool):
                raise ManifestError(f"line {lineno}: length_seconds must be a number")
            length = seconds_to_samples(seconds, sample_rate)
        records.append((lineno, SequenceRecord(str(obj["id"]), length)))
    return _checked(records)


def _checked(numbered: list[tuple[int, SequenceRecord]]) -> list[SequenceRecord]:
    seen: dict[str, int] = {}
    for lineno, rec in numbered:
        if rec.length < 1:
            raise ManifestError(f"line {lineno}: non-positive length {rec.length} for id {rec.id!r}")
        if rec.id in seen:
            raise ManifestError(f"line {lineno}: duplicate id {rec.id!r} (first seen on line {seen[rec.id]})")
        seen[rec.id] = lineno
    return [rec for _, rec in numbered]


def load_manifest(source: BinaryIO | bytes, format: str, sample_rate: int = DEFAULT_SAMPLE_RATE) -> Manifest:
    """Parse a CSV or JSONL manifest from a binary stream (or raw bytes).

    Errors carry the 1-based line number of the offending row.
    """
    if format not in FORMATS:
        raise ConfigError(f"unknown manifest format {format!r}; expected one of {FORMATS}")
    raw = source if isinstance(source, bytes) else source.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ManifestError(f"manifest is not valid UTF-8: {exc}") from None
    lines = text.split("\n")
    reader = _read_csv if format == "csv" else _read_jsonl
    return Manifest(tuple(reader(lines, sample_rate)), sample_rate)


def write_manifest(manifest: Manifest, sink: BinaryIO, format: str) -> None:
    """Inverse of :func:`load_manifest`; lengths are written in samples."""
    if format == "csv":
        lines = ["id,length"] + [f"{r.id},{r.length}" for r in manifest.records]
    elif format == "jsonl":
        lines = [json.dumps({"id": r.id, "length_samples": r.length}) for r in manifest.records]
    else:
        raise ConfigError(f"unknown manifest format {format!r}; expected one of {FORMATS}")
    sink.write(("\n".join(lines) + "\n").encode("utf-8"))


def manifest_to_bytes(manifest: Manifest, format: str) -> bytes:
    buf = io.BytesIO()
    write_manifest(manifest, buf, format)
    return buf.getvalue()


def format_for_path(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".jsonl", ".json", ".ndjson"):
        return "jsonl"
    if suffix == ".csv":
        return "csv"
    raise ConfigError(f"cannot infer manifest format from {str(path)!r}; pass it explicitly")


def read_manifest(path: str | Path, format: str | None = None, sample_rate: int = DEFAULT_SAMPLE_RATE) -> Manifest:
    with open(path, "rb") as fh:
        return load_manifest(fh, format or format_for_path(path), sample_rate)


# --------------------------------------------------------------------------
# Synthetic manifests


@dataclass(frozen=True)
class DistributionSpec:
    """Clipped lognormal over lengths in samples.

    ``location`` and ``scale`` are the mean and standard deviation of the
    natural log of the length (in samples) before clipping.
    """

    location: float
    scale: float
    min_length: int
    max_length: int
    family: str = "lognormal"

    def __post_init__(self):
        if self.family != "lognormal":
            raise ConfigError(f"unsupported length distribution {self.family!r}")
        if self.scale < 0:
            raise ConfigError("scale must be non-negative")
        if self.min_length < 1 or self.min_length > self.max_length:
            raise ConfigError(f"need 1 <= min_length <= max_length, got [{self.min_length}, {self.max_length}]")

    @classmethod
    def from_seconds(cls, mean_seconds: float, sigma: float, min_seconds: float, max_seconds: float,
                     sample_rate: int = DEFAULT_SAMPLE_RATE) -> "DistributionSpec":
        """Parametrise by the (unclipped) mean length in seconds."""
        location = math.log(mean_seconds * sample_rate) - sigma**2 / 2
        return cls(location, sigma, seconds_to_samples(min_seconds, sample_rate),
                   seconds_to_samples(max_seconds, sample_rate))

    @classmethod
    def speech_like(cls, sample_rate: int = DEFAULT_SAMPLE_RATE) -> "DistributionSpec":
        """Unimodal, right-skewed mixture lengths centred near 16 s.

        The shape parameter was picked so that random batching of 8
        sequences pads roughly a quarter of the data.
        """
        return cls.from_seconds(16.0, 0.16, 2.0, 40.0, sample_rate)


def synth_manifest(spec: DistributionSpec, total_duration: int, seed: int,
                   sample_rate: int = DEFAULT_SAMPLE_RATE) -> Manifest:
    """Draw lengths until their running sum first reaches ``total_duration``.

    Deterministic for a given ``(spec, total_duration, seed)``.
    """
    if total_duration < spec.max_length:
        raise ConfigError(f"total_duration ({total_duration}) must be >= max_length ({spec.max_length})")
    rng = np.random.Generator(np.random.PCG64(seed))
    lengths: list[int] = []
    total = 0
    chunk = max(16, int(total_duration / math.exp(spec.location)) + 16)
    while total < total_duration:
        draws = rng.lognormal(spec.location, spec.scale, size=chunk)
        draws = np.clip(np.floor(draws), spec.min_length, spec.max_length).astype(np.int64)
        for n in draws.tolist():
            lengths.append(n)
            total += n
            if total >= total_duration:
                break
    width = max(6, len(str(len(lengths) - 1)))
    records = tuple(SequenceRecord(f"{i:0{width}d}", n) for i, n in enumerate(lengths))
    return Manifest(records, sample_rate)
