"""Masked SNR and SI-SNR losses over zero-padded batches.

Each row is sliced to its valid length before any arithmetic, so values in
padded positions are never read. Losses are negated dB values (lower is
better), averaged over sequences by default.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

DEFAULT_EPSILON = 1e-8
REDUCTIONS = ("mean", "pooled")


@dataclass(frozen=True)
class PaddedBatch:
    targets: np.ndarray
    estimates: np.ndarray
    valid_lengths: tuple[int, ...]

    def __post_init__(self):
        targets = np.asarray(self.targets, dtype=np.float64)
        estimates = np.asarray(self.estimates, dtype=np.float64)
        lengths = tuple(int(n) for n in self.valid_lengths)
        if targets.ndim != 2 or targets.shape != estimates.shape:
            raise ValueError(f"targets and estimates must be N x T matrices of equal shape, "
                             f"got {targets.shape} and {estimates.shape}")
        if len(lengths) != targets.shape[0]:
            raise ValueError(f"expected {targets.shape[0]} valid lengths, got {len(lengths)}")
        if any(n < 0 or n > targets.shape[1] for n in lengths):
            raise ValueError(f"valid lengths must lie in [0, {targets.shape[1]}]")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "estimates", estimates)
        object.__setattr__(self, "valid_lengths", lengths)

    @classmethod
    def from_sequences(cls, targets: Sequence, estimates: Sequence) -> "PaddedBatch":
        """Zero-pad lists of 1-D signals into a batch."""
        lengths = [len(t) for t in targets]
        t_max = max(lengths)
        tgt = np.zeros((len(lengths), t_max))
        est = np.zeros((len(lengths), t_max))
        for i, (t, e) in enumerate(zip(targets, estimates)):
            if len(e) != len(t):
                raise ValueError(f"row {i}: target and estimate lengths differ")
            tgt[i, :len(t)] = t
            est[i, :len(e)] = e
        return cls(tgt, est, tuple(lengths))

    def rows(self):
        for i, n in enumerate(self.valid_lengths):
            yield self.targets[i, :n], self.estimates[i, :n]


def build_mask(valid_lengths: Sequence[int], t_max: int) -> np.ndarray:
    lengths = np.asarray(valid_lengths, dtype=np.int64)
    if np.any(lengths > t_max):
        raise ValueError(f"valid lengths must not exceed t_max={t_max}")
    return np.arange(t_max)[None, :] < lengths[:, None]


def _snr_terms(target: np.ndarray, estimate: np.ndarray) -> tuple[float, float]:
    return float(np.dot(target, target)), float(np.dot(target - estimate, target - estimate))


def _sisnr_terms(target: np.ndarray, estimate: np.ndarray, epsilon: float) -> tuple[float, float]:
    s = target - target.mean()
    s_hat = estimate - estimate.mean()
    energy = float(np.dot(s, s))
    if energy == 0.0:
        warnings.warn("SI-SNR target is constant over its valid region; value is epsilon-defined",
                      RuntimeWarning, stacklevel=3)
    s_target = (float(np.dot(s_hat, s)) / (energy + epsilon)) * s
    e = s_hat - s_target
    return float(np.dot(s_target, s_target)), float(np.dot(e, e))


def snr(target: np.ndarray, estimate: np.ndarray, epsilon: float = DEFAULT_EPSILON) -> float:
    """SNR in dB of a single unpadded signal pair."""
    num, den = _snr_terms(np.asarray(target, dtype=np.float64), np.asarray(estimate, dtype=np.float64))
    return 10.0 * np.log10((num + epsilon) / (den + epsilon))


def si_snr(target: np.ndarray, estimate: np.ndarray, epsilon: float = DEFAULT_EPSILON) -> float:
    """Scale-invariant SNR in dB of a single unpadded signal pair."""
    num, den = _sisnr_terms(np.asarray(target, dtype=np.float64), np.asarray(estimate, dtype=np.float64),
                            epsilon)
    return 10.0 * np.log10((num + epsilon) / (den + epsilon))


def _reduce(terms: list[tuple[float, float]], epsilon: float, reduction: str) -> float:
    if reduction == "mean":
        return -float(np.mean([10.0 * np.log10((n + epsilon) / (d + epsilon)) for n, d in terms]))
    if reduction == "pooled":
        num = sum(n for n, _ in terms)
        den = sum(d for _, d in terms)
        return -float(10.0 * np.log10((num + epsilon) / (den + epsilon)))
    raise ValueError(f"unknown reduction {reduction!r}; expected one of {REDUCTIONS}")


def _check_rows(batch: PaddedBatch) -> None:
    if any(n < 1 for n in batch.valid_lengths):
        raise ValueError("every row needs at least one valid sample")


def masked_snr_loss(batch: PaddedBatch, epsilon: float = DEFAULT_EPSILON, reduction: str = "mean") -> float:
    """Negative SNR over valid samples only.

    ``reduction="mean"`` averages per-sequence SNRs in dB; ``"pooled"``
    sums signal and error energies over the whole batch first.
    """
    _check_rows(batch)
    return _reduce([_snr_terms(t, e) for t, e in batch.rows()], epsilon, reduction)


def masked_sisnr_loss(batch: PaddedBatch, epsilon: float = DEFAULT_EPSILON, reduction: str = "mean") -> float:
    _check_rows(batch)
    return _reduce([_sisnr_terms(t, e, epsilon) for t, e in batch.rows()], epsilon, reduction)


def finite_difference_mask_check(
    batch: PaddedBatch,
    position: tuple[int, int],
    delta: float,
    loss: Callable[[PaddedBatch], float] = masked_snr_loss,
) -> float:
    """Change in ``loss`` when one estimate entry is shifted by ``delta``.

    Exactly zero whenever ``position`` lies in the padded region.
    """
    row, col = position
    perturbed = batch.estimates.copy()
    perturbed[row, col] += delta
    return loss(PaddedBatch(batch.targets, perturbed, batch.valid_lengths)) - loss(batch)


def mask_invariance_holds(batch: PaddedBatch, delta: float = 1e3,
                          losses: Sequence[Callable[[PaddedBatch], float]] = (masked_snr_loss, masked_sisnr_loss),
                          ) -> bool:
    """Perturb every padded position of targets and estimates at once and
    check that no loss moves by even one bit."""
    mask = build_mask(batch.valid_lengths, batch.targets.shape[1])
    perturbed = PaddedBatch(np.where(mask, batch.targets, batch.targets + delta),
                            np.where(mask, batch.estimates, batch.estimates - delta),
                            batch.valid_lengths)
    return all(fn(perturbed) == fn(batch) for fn in losses)
