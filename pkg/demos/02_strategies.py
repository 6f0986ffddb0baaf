"""Plan one epoch with each strategy and look at the first few batches."""

from varbatch.manifest import Manifest
from varbatch.planner import BatchingConfig, DynamicSize, FixedSize, plan_epochs

manifest = Manifest.from_lengths([9, 4, 4, 17, 1, 30, 12, 8, 8, 3, 22, 15])

for mode in (FixedSize(3), DynamicSize(32)):
    print(f"== {mode}")
    for strategy in ("random", "sorted", "bucket"):
        plan, = plan_epochs(manifest, BatchingConfig(strategy, mode, num_buckets=3, seed=7))
        shown = " | ".join(",".join(str(s.length) for s in b.segments) for b in plan.batches)
        print(f"{strategy:>7}: {shown}")

# dynamic budgets shorter than the longest sequence split it into pieces
plan, = plan_epochs(manifest, BatchingConfig("sorted", DynamicSize(10)))
print("split pieces of id 5:", [tuple(s) for s in plan.segments() if s.sequence_id == "5"])
