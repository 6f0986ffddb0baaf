"""Zero-padding ratio of each strategy on 10 h of synthetic speech, 5 seeds."""

from varbatch.manifest import DistributionSpec, synth_manifest
from varbatch.planner import DynamicSize, FixedSize
from varbatch.runner import GridCell, run_cell

SR = 16000


def label(mode):
    return f"dynamic-{mode.budget // SR}s" if isinstance(mode, DynamicSize) else str(mode)

manifest = synth_manifest(DistributionSpec.speech_like(), 10 * 3600 * SR, seed=0, sample_rate=SR)

print(f"{'strategy':>8} {'size':>16} {'ZPR':>8} {'sem':>8}")
for mode in (FixedSize(8), DynamicSize(128 * SR)):
    for strategy in ("random", "sorted", "bucket"):
        report = run_cell(manifest, GridCell(strategy, mode), seeds=range(5), epochs=1)
        z = report.across_seeds["zpr"]
        print(f"{strategy:>8} {label(mode):>16} {z.mean:8.4f} {z.sem:8.4f}")
