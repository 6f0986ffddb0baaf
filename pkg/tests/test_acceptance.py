"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that ``conftest.py`` prints in the
terminal summary.
"""

from __future__ import annotations

import itertools
import json
import random
import time

import numpy as np

from oracles import min_padding_partition
from varbatch.cli import main
from varbatch.manifest import Manifest, total_length
from varbatch.masked_loss import (PaddedBatch, build_mask, masked_sisnr_loss, masked_snr_loss, si_snr, snr)
from varbatch.planner import (BatchingConfig, DynamicSize, FixedSize, check_coverage, plan_epochs, plan_lines,
                              prepare_segments)
from varbatch.runner import plan_hash
from varbatch.stats import epoch_stats, zpr

SR = 16000
SEEDS = (0, 1, 2, 3, 4)
RESULTS: list[str] = []


def record(number: int, name: str, ok: bool, detail: str) -> None:
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number} {name}: {detail}")


def seconds(s: float) -> int:
    return int(s * SR)


def recount_from_dump(lines: list[str], lengths_by_id: dict[str, int]) -> int:
    """Total padding recomputed from the JSONL dump alone, with a per-sample
    coverage check."""
    padding = 0
    covered: dict[str, list[int]] = {}
    for rec in json.loads("[" + ",".join(lines) + "]"):
        longest = max(n for _, _, n in rec["segments"])
        assert longest == rec["padded_length"]
        for seq_id, offset, n in rec["segments"]:
            padding += longest - n
            covered.setdefault(seq_id, []).extend(range(offset, offset + n))
    for seq_id, length in lengths_by_id.items():
        assert sorted(covered.pop(seq_id)) == list(range(length))
    assert not covered
    return padding


# --------------------------------------------------------------------------


def test_criterion_1_zpr_oracle_equivalence():
    """Every length multiset with n <= 8 and lengths in 1..10, every strategy,
    fixed and dynamic (splitting) size modes."""
    grid = [c for n in range(1, 9) for c in itertools.combinations_with_replacement(range(1, 11), n)]
    modes = (FixedSize(3), DynamicSize(6))
    start = time.perf_counter()
    checked = mismatches = 0
    for index, lengths in enumerate(grid):
        manifest = Manifest.from_lengths(lengths)
        total = sum(lengths)
        by_id = {r.id: r.length for r in manifest.records}
        for mode in modes:
            n_segments = len(prepare_segments(manifest, mode))
            for strategy in ("random", "sorted", "bucket"):
                config = BatchingConfig(strategy, mode, num_buckets=min(2, n_segments),
                                        bucket_limit_mode=("uniform", "quantile")[index % 2], seed=index % 7)
                plan, = plan_epochs(manifest, config)
                padding = recount_from_dump(list(plan_lines([plan])), by_id)
                if zpr(plan, total) != padding / total or epoch_stats(plan, total).total_padding != padding:
                    mismatches += 1
                checked += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 10.0
    record(1, "ZPR oracle equivalence", ok,
           f"{checked} plans over {len(grid)} manifests, {mismatches} mismatches, {elapsed:.1f} s (limit 10 s)")
    assert mismatches == 0
    assert elapsed < 10.0, f"exhaustive grid took {elapsed:.1f} s"


def test_criterion_2_zpr_trend_by_strategy(speech_manifest):
    start = time.perf_counter()
    total = total_length(speech_manifest)

    def mean_zpr(strategy, mode):
        return float(np.mean([zpr(plan_epochs(speech_manifest, BatchingConfig(strategy, mode, 10, "uniform", seed))[0],
                                  total) for seed in SEEDS]))

    fixed8, dyn128 = FixedSize(8), DynamicSize(seconds(128))
    z = {
        "random/fixed-8": mean_zpr("random", fixed8),
        "sorted/fixed-8": mean_zpr("sorted", fixed8),
        "bucket/fixed-8": mean_zpr("bucket", fixed8),
        "random/dyn-128s": mean_zpr("random", dyn128),
        "sorted/dyn-128s": mean_zpr("sorted", dyn128),
    }
    elapsed = time.perf_counter() - start
    checks = [
        0.15 <= z["random/fixed-8"] <= 0.35,
        z["sorted/fixed-8"] < 0.01,
        z["sorted/fixed-8"] < z["bucket/fixed-8"] < z["random/fixed-8"],
        0.15 <= z["random/dyn-128s"] <= 0.35,
        z["sorted/dyn-128s"] < 0.01,
        elapsed < 120,
    ]
    record(2, "ZPR trend by strategy", all(checks),
           ", ".join(f"{k}={v:.4f}" for k, v in z.items()) + f", {elapsed:.1f} s")
    assert all(checks), z


def test_criterion_3_budget_law(speech_manifest):
    batches = 0
    violations = 0
    for budget_s in (2, 4, 8, 16, 32, 64, 128):
        budget = seconds(budget_s)
        for strategy in ("random", "sorted", "bucket"):
            plan, = plan_epochs(speech_manifest, BatchingConfig(strategy, DynamicSize(budget), seed=budget_s))
            check_coverage(plan, speech_manifest)
            for b in plan.batches:
                batches += 1
                violations += len(b) * b.padded_length > budget
    record(3, "budget law", violations == 0, f"{batches} batches over 7 budgets x 3 strategies, {violations} violations")
    assert violations == 0


def test_criterion_4_sorted_packing_optimality():
    rng = random.Random(4)
    start = time.perf_counter()
    instances = failures = 0
    for k in (2, 4):
        for n in range(k, 9, k):
            for _ in range(150):
                lengths = [rng.randint(1, 50) for _ in range(n)]
                plan, = plan_epochs(Manifest.from_lengths(lengths), BatchingConfig("sorted", FixedSize(k)))
                sorted_padding = epoch_stats(plan, sum(lengths)).total_padding
                failures += sorted_padding != min_padding_partition(lengths, k)
                instances += 1
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 30
    record(4, "sorted packing optimality", ok, f"{instances} instances, {failures} failures, {elapsed:.1f} s")
    assert failures == 0 and elapsed < 30


def test_criterion_5_masked_loss():
    rng = np.random.default_rng(5)
    moved = worst_row = worst_scale = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        lengths = rng.integers(64, 1025, size=n)
        t_max = int(lengths.max() + rng.integers(0, 64))
        targets = rng.standard_normal((n, t_max))
        estimates = targets + rng.standard_normal((n, t_max)) * rng.uniform(0.1, 2.0)
        batch = PaddedBatch(targets, estimates, tuple(int(x) for x in lengths))
        mask = build_mask(batch.valid_lengths, t_max)

        junk = rng.standard_normal((n, t_max)) * 10.0 ** rng.uniform(-3, 6)
        other = PaddedBatch(np.where(mask, targets, junk), np.where(mask, estimates, junk[::-1] * 3), lengths)
        moved = max(moved, abs(masked_snr_loss(other) - masked_snr_loss(batch)),
                    abs(masked_sisnr_loss(other) - masked_sisnr_loss(batch)))

        rows = list(batch.rows())
        worst_row = max(worst_row,
                        abs(masked_snr_loss(batch) + np.mean([snr(t, e) for t, e in rows])),
                        abs(masked_sisnr_loss(batch) + np.mean([si_snr(t, e) for t, e in rows])))

        c = float(2.0 ** rng.uniform(-1, 1))
        scaled = PaddedBatch(targets, np.where(mask, c * estimates, estimates), lengths)
        worst_scale = max(worst_scale, abs(masked_sisnr_loss(scaled) - masked_sisnr_loss(batch)))
    ok = moved == 0.0 and worst_row <= 1e-10 and worst_scale <= 1e-6
    record(5, "masked-loss padding invariance", ok,
           f"masked perturbation change {moved}, per-row gap {worst_row:.2e}, SI-SNR scale drift {worst_scale:.2e} dB")
    assert moved == 0.0
    assert worst_row <= 1e-10
    assert worst_scale <= 1e-6


def test_criterion_6_limit_case_equivalences(speech_manifest):
    identical = 0
    cases = [(speech_manifest, (FixedSize(4), DynamicSize(seconds(8)), DynamicSize(seconds(128)))),
             (Manifest.from_lengths([9, 4, 4, 17, 1, 30, 12, 8, 8, 3]), (FixedSize(4), DynamicSize(20)))]
    for manifest, modes in cases:
        for mode in modes:
            for seed in (0, 99):
                rnd = plan_epochs(manifest, BatchingConfig("random", mode, seed=seed, epochs=2))
                bkt = plan_epochs(manifest, BatchingConfig("bucket", mode, num_buckets=1, seed=seed, epochs=2))
                assert "\n".join(plan_lines(rnd)).encode() == "\n".join(plan_lines(bkt)).encode()
                identical += 1

    rng = random.Random(6)
    matched = 0
    for k in (1, 2, 3, 4):
        for groups in (1, 2, 3, 5):
            for _ in range(20):
                lengths = rng.sample(range(1, 200), k * groups)
                m = Manifest.from_lengths(lengths)

                def compositions(plan):
                    return sorted(tuple(sorted(s.sequence_id for s in b.segments)) for b in plan.batches)

                srt, = plan_epochs(m, BatchingConfig("sorted", FixedSize(k), seed=rng.randrange(2**32)))
                bkt, = plan_epochs(m, BatchingConfig("bucket", FixedSize(k), num_buckets=groups,
                                                     bucket_limit_mode="quantile", seed=rng.randrange(2**32)))
                assert compositions(srt) == compositions(bkt)
                matched += 1
    record(6, "limit-case equivalences", True,
           f"{identical} single-bucket plans byte-identical to random, {matched} quantile-bucket plans match sorted")


def test_criterion_7_determinism(speech_manifest, tmp_path):
    outputs = {}
    for fmt in ("csv", "json"):
        runs = []
        for i in range(2):
            out = tmp_path / f"report{i}.{fmt}"
            code = main(["stats", "--hours", "2", "--strategy", "random", "sorted", "bucket", "--fixed", "8",
                         "--dynamic", "16", "128", "--seed", *map(str, SEEDS), "--epochs", "2",
                         "--format", fmt, "--out", str(out)])
            assert code == 0
            runs.append(out.read_bytes())
        outputs[fmt] = runs[0] == runs[1]

    digests = []
    distinct_pairs = 0
    for a, b in [(0, 1), (1, 2), (2, 3), (3, 4), (0, 12345)]:
        for strategy, mode in (("random", FixedSize(8)), ("sorted", DynamicSize(seconds(64))),
                               ("bucket", FixedSize(4))):
            ha = plan_hash(plan_epochs(speech_manifest, BatchingConfig(strategy, mode, seed=a, epochs=2)))
            hb = plan_hash(plan_epochs(speech_manifest, BatchingConfig(strategy, mode, seed=b, epochs=2)))
            distinct_pairs += ha != hb
            digests.append((ha, hb))
    ok = all(outputs.values()) and distinct_pairs == len(digests)
    record(7, "determinism", ok,
           f"stats byte-identical: {outputs}, plan_hash distinct for {distinct_pairs}/{len(digests)} seed pairs")
    assert all(outputs.values())
    assert distinct_pairs == len(digests)


def test_criterion_8_footprint_consistency(speech_manifest):
    total = total_length(speech_manifest)
    budget = seconds(128)
    details = []
    ok = True
    for strategy in ("random", "sorted", "bucket"):
        for seed in SEEDS:
            fixed_plan, = plan_epochs(speech_manifest, BatchingConfig(strategy, FixedSize(8), seed=seed))
            dyn_plan, = plan_epochs(speech_manifest, BatchingConfig(strategy, DynamicSize(budget), seed=seed))
            fixed, dyn = epoch_stats(fixed_plan, total), epoch_stats(dyn_plan, total)
            peak_batch = max(fixed_plan.batches, key=lambda b: len(b) * b.padded_length)
            longest_full = max(b.padded_length for b in fixed_plan.batches if len(b) == 8)
            ok &= dyn.footprint_cv < fixed.footprint_cv
            ok &= dyn.peak_footprint <= budget
            ok &= fixed.peak_footprint == 8 * longest_full and len(peak_batch) == 8
        details.append(f"{strategy}: cv fixed-8 {fixed.footprint_cv:.3f} vs dyn-128s {dyn.footprint_cv:.3f}")
    record(8, "footprint consistency", ok, "; ".join(details) + " (last seed)")
    assert ok
