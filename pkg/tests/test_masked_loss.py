import math
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from varbatch.masked_loss import (PaddedBatch, build_mask, finite_difference_mask_check, mask_invariance_holds,
                                  masked_sisnr_loss, masked_snr_loss, si_snr, snr)


def test_build_mask():
    np.testing.assert_array_equal(build_mask([1], 2), [[True, False]])
    np.testing.assert_array_equal(build_mask([2], 2), [[True, True]])
    np.testing.assert_array_equal(build_mask([3, 1], 3), [[True, True, True], [True, False, False]])
    with pytest.raises(ValueError):
        build_mask([4], 3)


def test_snr_hand_example():
    batch = PaddedBatch([[3.0, 4.0]], [[3.0, 0.0]], [2])
    assert masked_snr_loss(batch, epsilon=0.0) == pytest.approx(-10 * math.log10(25 / 16), abs=1e-12)
    assert masked_snr_loss(batch, epsilon=0.0) == pytest.approx(-1.9382, abs=1e-4)


def test_snr_perfect_estimate_is_epsilon_limited():
    batch = PaddedBatch([[3.0, 4.0]], [[3.0, 4.0]], [2])
    assert masked_snr_loss(batch, epsilon=1e-8) == pytest.approx(-10 * math.log10(25 / 1e-8), abs=1e-6)
    assert masked_snr_loss(batch, epsilon=1e-8) == pytest.approx(-93.98, abs=5e-3)


def test_masked_values_are_never_read():
    a = PaddedBatch([[1.0, 2.0, 0.0]], [[0.5, 2.5, 0.0]], [2])
    b = PaddedBatch([[1.0, 2.0, np.nan]], [[0.5, 2.5, np.inf]], [2])
    assert masked_snr_loss(a) == masked_snr_loss(b)
    assert masked_sisnr_loss(a) == masked_sisnr_loss(b)


def test_sisnr_hand_projection():
    batch = PaddedBatch([[1.0, 0.0]], [[1.0, 1.0]], [2])
    assert masked_sisnr_loss(batch) == pytest.approx(0.0, abs=1e-6)


def test_sisnr_perfect_estimates_are_epsilon_limited():
    t = np.array([0.6, -0.8, 0.0, 0.0])
    t = t - t.mean()
    t /= np.linalg.norm(t)
    one = -masked_sisnr_loss(PaddedBatch([t], [t], [4]))
    two = -masked_sisnr_loss(PaddedBatch([t], [2 * t], [4]))
    assert one >= 80 - 1e-6 and two >= 80
    # the epsilon floor in the denominator does not scale with the estimate
    assert two - one == pytest.approx(20 * math.log10(2), abs=1e-3)


def test_sisnr_constant_target_warns():
    with pytest.warns(RuntimeWarning):
        masked_sisnr_loss(PaddedBatch([[0.0, 0.0]], [[1.0, 2.0]], [2]))


def test_finite_difference_check():
    batch = PaddedBatch([[3.0, 4.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]], [[3.0, 0.0, 0.0, 0.0], [0.5, 0.2, 0.0, 0.0]],
                        [2, 2])
    assert finite_difference_mask_check(batch, (0, 2), 1e3) == 0.0
    assert finite_difference_mask_check(batch, (1, 3), 1e3) == 0.0
    assert finite_difference_mask_check(batch, (1, 2), -7.0, masked_sisnr_loss) == 0.0
    assert finite_difference_mask_check(batch, (0, 1), 1e-3) != 0.0
    assert finite_difference_mask_check(batch, (0, 0), 0.0) == 0.0


def test_pooled_reduction():
    batch = PaddedBatch([[3.0, 4.0], [1.0, 0.0]], [[3.0, 0.0], [0.0, 0.0]], [2, 1])
    assert masked_snr_loss(batch, 0.0, "pooled") == pytest.approx(-10 * math.log10(26 / 17))
    with pytest.raises(ValueError):
        masked_snr_loss(batch, reduction="sum")


def test_rows_need_valid_samples():
    with pytest.raises(ValueError):
        masked_snr_loss(PaddedBatch([[1.0]], [[1.0]], [0]))


def test_shape_validation():
    with pytest.raises(ValueError):
        PaddedBatch([[1.0, 2.0]], [[1.0]], [1])
    with pytest.raises(ValueError):
        PaddedBatch([[1.0, 2.0]], [[1.0, 2.0]], [3])
    with pytest.raises(ValueError):
        PaddedBatch([[1.0, 2.0]], [[1.0, 2.0]], [1, 1])


@st.composite
def padded_batches(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    n = draw(st.integers(1, 5))
    lengths = rng.integers(2, 40, size=n)
    t_max = int(lengths.max()) + draw(st.integers(0, 5))
    targets = rng.standard_normal((n, t_max))
    estimates = targets + rng.standard_normal((n, t_max)) * rng.uniform(0.1, 2.0)
    return PaddedBatch(targets, estimates, tuple(int(x) for x in lengths)), rng


@settings(max_examples=200)
@given(padded_batches())
def test_padding_invariance_and_row_equivalence(drawn):
    batch, rng = drawn
    mask = build_mask(batch.valid_lengths, batch.targets.shape[1])
    junk = rng.standard_normal(batch.targets.shape) * 1e6
    other = PaddedBatch(np.where(mask, batch.targets, junk), np.where(mask, batch.estimates, -junk),
                        batch.valid_lengths)
    assert masked_snr_loss(other) == masked_snr_loss(batch)
    assert masked_sisnr_loss(other) == masked_sisnr_loss(batch)
    assert mask_invariance_holds(batch)

    rows = list(batch.rows())
    assert masked_snr_loss(batch) == pytest.approx(-np.mean([snr(t, e) for t, e in rows]), abs=1e-10)
    assert masked_sisnr_loss(batch) == pytest.approx(-np.mean([si_snr(t, e) for t, e in rows]), abs=1e-10)


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1), st.floats(0.5, 2.0))
def test_sisnr_scale_invariance(seed, c):
    # audio-sized rows; with additive epsilon the invariance only holds while
    # the scaled error energy stays far above epsilon
    rng = np.random.default_rng(seed)
    lengths = rng.integers(64, 1024, size=3)
    targets = rng.standard_normal((3, 1024))
    estimates = targets + rng.standard_normal((3, 1024)) * rng.uniform(0.1, 2.0)
    batch = PaddedBatch(targets, estimates, tuple(int(n) for n in lengths))
    mask = build_mask(batch.valid_lengths, batch.targets.shape[1])
    scaled = PaddedBatch(batch.targets, np.where(mask, c * batch.estimates, batch.estimates), batch.valid_lengths)
    assert abs(masked_sisnr_loss(scaled) - masked_sisnr_loss(batch)) <= 1e-6
