"""Build a synthetic speech-like manifest and round-trip it through CSV."""

import io

import numpy as np

from varbatch.manifest import DistributionSpec, load_manifest, synth_manifest, total_length, write_manifest

SR = 16000

spec = DistributionSpec.speech_like()
manifest = synth_manifest(spec, total_duration=2 * 3600 * SR, seed=0, sample_rate=SR)
lengths = np.array(manifest.lengths) / SR
print(f"{len(manifest)} utterances, {total_length(manifest) / SR / 3600:.2f} h")
print(f"duration mean {lengths.mean():.1f} s, min {lengths.min():.1f} s, max {lengths.max():.1f} s")

buf = io.BytesIO()
write_manifest(manifest, buf, "csv")
again = load_manifest(buf.getvalue(), "csv", sample_rate=SR)
print("csv round trip identical:", again == manifest)
print(buf.getvalue().decode().splitlines()[:4])
