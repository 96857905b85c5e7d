"""Boundary-aware loss weights for target token sequences.

Positions whose target token contains the BPE space marker get
``boundary_weight`` (2.0 by default), everything else 1.0, and the loss is

    L = sum_i w_i * CE(y_i, p_i)

computed here from externally supplied log-probabilities so a trainer can
check its own implementation against it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Sequence

import numpy as np

from .bpe import BoundaryTokenSet
from .exceptions import LengthMismatch, MalformedDistribution, NonPositiveWeight

BASE_WEIGHT = 1.0
BOUNDARY_WEIGHT = 2.0
NORMALIZATION_TOL = 1e-6


@dataclass(frozen=True)
class WeightMask:
    weights: np.ndarray
    boundary_weight: float = BOUNDARY_WEIGHT
    base_weight: float = BASE_WEIGHT

    def __len__(self) -> int:
        return len(self.weights)

    def tolist(self) -> list[float]:
        return [float(w) for w in self.weights]


def compute_mask(targets: Sequence[int], boundary: BoundaryTokenSet | Collection[int],
                 boundary_weight: float = BOUNDARY_WEIGHT, *,
                 ignore_ids: Collection[int] = (),
                 weight_successor: bool = False) -> WeightMask:
    """Per-position weights for ``targets``.

    ``ignore_ids`` (padding and the like) get weight 0. With
    ``weight_successor`` the position right after a boundary token is
    weighted as well, which targets the first character of the next word
    rather than the space token itself.
    """
    if not boundary_weight > 0:
        raise NonPositiveWeight(f"boundary weight must be positive, got {boundary_weight}")
    ids = boundary.ids if isinstance(boundary, BoundaryTokenSet) else frozenset(boundary)
    ignore = frozenset(ignore_ids)
    n = len(targets)
    weights = np.full(n, BASE_WEIGHT, dtype=np.float64)
    hit = np.fromiter((t in ids for t in targets), dtype=bool, count=n)
    if weight_successor and n > 1:
        hit[1:] |= hit[:-1]
    weights[hit] = boundary_weight
    if ignore:
        weights[np.fromiter((t in ignore for t in targets), dtype=bool, count=n)] = 0.0
    return WeightMask(weights, float(boundary_weight), BASE_WEIGHT)


@dataclass(frozen=True)
class PredictionBatch:
    log_probs: np.ndarray  # (N, V)
    targets: np.ndarray  # (N,)

    @property
    def vocab_size(self) -> int:
        return self.log_probs.shape[1]

    @classmethod
    def from_lists(cls, log_probs, targets, vocab_size: int | None = None) -> PredictionBatch:
        targets = np.asarray(targets, dtype=np.int64).reshape(-1)
        lp = np.asarray(log_probs, dtype=np.float64)
        if lp.size == 0:
            lp = lp.reshape(len(targets), vocab_size or 0)
        batch = cls(lp, targets)
        batch.validate(vocab_size)
        return batch

    def validate(self, vocab_size: int | None = None) -> None:
        lp = self.log_probs
        if lp.ndim != 2:
            raise MalformedDistribution("log_probs must be a 2-D array (positions x vocab)")
        if len(lp) != len(self.targets):
            raise LengthMismatch(f"{len(lp)} distributions for {len(self.targets)} targets")
        if vocab_size is not None and lp.shape[1] != vocab_size:
            raise MalformedDistribution(f"expected vocab size {vocab_size}, got {lp.shape[1]}")
        if len(self.targets) and (self.targets.min() < 0 or self.targets.max() >= lp.shape[1]):
            raise MalformedDistribution("target id outside the vocabulary")
        if len(lp):
            mass = np.exp(lp).sum(axis=1)
            bad = np.flatnonzero(~(np.abs(mass - 1.0) <= NORMALIZATION_TOL))
            if bad.size:
                raise MalformedDistribution(
                    f"position {int(bad[0])} sums to {mass[bad[0]]!r}, not 1"
                )


@dataclass(frozen=True)
class LossResult:
    sum: float
    mean: float
    per_position: np.ndarray
    weight_total: float

    def to_dict(self) -> dict:
        return {
            "sum": self.sum,
            "mean": self.mean,
            "weight_total": self.weight_total,
            "per_position": [float(x) for x in self.per_position],
        }


def weighted_cross_entropy(batch: PredictionBatch, mask: WeightMask | Sequence[float]) -> LossResult:
    """``sum`` is the unnormalized weighted loss, ``mean`` divides by the total weight.

    With zero total weight (all positions ignored, or no positions) the
    mean is reported as 0.
    """
    weights = np.asarray(mask.weights if isinstance(mask, WeightMask) else mask, dtype=np.float64)
    if len(weights) != len(batch.targets):
        raise LengthMismatch(f"mask has {len(weights)} weights for {len(batch.targets)} targets")
    batch.validate()
    nll = -batch.log_probs[np.arange(len(batch.targets)), batch.targets]
    per_position = weights * nll
    # Ignored positions may carry -inf log-probs; keep them out of the sum.
    per_position[weights == 0] = 0.0
    total = float(per_position.sum())
    w_total = float(weights.sum())
    return LossResult(total, total / w_total if w_total > 0 else 0.0, per_position, w_total)
