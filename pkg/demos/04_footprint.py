"""Batch footprints (count x padded length) under fixed and dynamic sizing."""

from varbatch.manifest import DistributionSpec, synth_manifest, total_length
from varbatch.planner import BatchingConfig, DynamicSize, FixedSize, plan_epochs
from varbatch.stats import epoch_stats

SR = 16000


def label(mode):
    return f"dynamic-{mode.budget // SR}s" if isinstance(mode, DynamicSize) else str(mode)

manifest = synth_manifest(DistributionSpec.speech_like(), 10 * 3600 * SR, seed=0, sample_rate=SR)
total = total_length(manifest)

for strategy in ("random", "sorted", "bucket"):
    for mode in (FixedSize(8), DynamicSize(128 * SR)):
        plan, = plan_epochs(manifest, BatchingConfig(strategy, mode, seed=0))
        st = epoch_stats(plan, total)
        print(f"{strategy:>7} {label(mode):>16}: batches {st.batch_count:5d}  peak {st.peak_footprint / SR:6.1f} s"
              f"  mean {st.footprint_mean / SR:6.1f} s  cv {st.footprint_cv:.3f}")
