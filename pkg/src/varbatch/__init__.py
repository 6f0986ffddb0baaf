"""Batch planning and padding statistics for variable-length sequence data."""

from .errors import ConfigError, CoverageError, DataError, InvariantError, ManifestError, PackingError, VarbatchError
from .manifest import (DistributionSpec, Manifest, SequenceRecord, load_manifest, read_manifest, synth_manifest,
                       total_length, write_manifest)
from .masked_loss import (PaddedBatch, build_mask, finite_difference_mask_check, masked_sisnr_loss,
                          masked_snr_loss)
from .packer import Batch, Segment, pack_dynamic, pack_fixed, split_sequences
from .planner import (BatchingConfig, DynamicSize, EpochPlan, FixedSize, assign_bucket, compute_bucket_limits,
                      plan_epochs)
from .runner import GridCell, SimulationSpec, plan_hash, run_simulation
from .stats import EpochStats, Report, aggregate, batch_footprint, epoch_stats, padding_of_batch, zpr

__version__ = "0.1.0"
