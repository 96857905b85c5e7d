import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from geezocr.bpe import BoundaryTokenSet
from geezocr.exceptions import LengthMismatch, MalformedDistribution, NonPositiveWeight
from geezocr.weighting import PredictionBatch, compute_mask, weighted_cross_entropy

from oracles import weighted_ce_bruteforce

HA, G, LA = 300, 220, 301
BOUNDARY = BoundaryTokenSet(frozenset({G}))


def uniform(n, v):
    return PredictionBatch.from_lists(np.full((n, v), -math.log(v)), [0] * n)


def log_softmax(x):
    x = x - x.max(axis=1, keepdims=True)
    return x - np.log(np.exp(x).sum(axis=1, keepdims=True))


def test_compute_mask_examples():
    assert compute_mask([HA, G, LA], BOUNDARY).tolist() == [1.0, 2.0, 1.0]
    assert compute_mask([HA, G, LA], BoundaryTokenSet(frozenset())).tolist() == [1.0, 1.0, 1.0]
    assert compute_mask([], BOUNDARY).tolist() == []


def test_compute_mask_options():
    assert compute_mask([HA, G, LA, 1], BOUNDARY, ignore_ids={1}).tolist() == [1, 2, 1, 0]
    assert compute_mask([HA, G, LA], BOUNDARY, weight_successor=True).tolist() == [1, 2, 2]
    assert compute_mask([HA, G, LA], {G}, 3.5).tolist() == [1, 3.5, 1]
    for bad in (0.0, -1.0):
        with pytest.raises(NonPositiveWeight):
            compute_mask([G], BOUNDARY, bad)


def test_perfect_prediction_has_zero_loss():
    lp = np.full((3, 4), -np.inf)
    lp[np.arange(3), [0, 2, 3]] = 0.0
    batch = PredictionBatch.from_lists(lp, [0, 2, 3])
    assert weighted_cross_entropy(batch, [1, 2, 1]).sum == 0.0


def test_uniform_examples():
    assert weighted_cross_entropy(uniform(3, 4), [1, 1, 1]).sum == pytest.approx(3 * math.log(4), abs=1e-12)
    res = weighted_cross_entropy(uniform(3, 4), [1, 2, 1])
    assert res.sum == pytest.approx(4 * math.log(4), abs=1e-12)
    assert res.mean == pytest.approx(math.log(4), abs=1e-12)


def test_per_position_and_ignored_positions():
    lp = log_softmax(np.array([[1.0, 2.0, 0.5], [0.0, 0.0, 3.0]]))
    res = weighted_cross_entropy(PredictionBatch.from_lists(lp, [1, 2]), [2.0, 0.0])
    assert res.per_position[0] == pytest.approx(-2 * lp[0, 1])
    assert res.per_position[1] == 0.0
    assert res.mean == pytest.approx(-lp[0, 1])


def test_validation():
    with pytest.raises(LengthMismatch):
        weighted_cross_entropy(uniform(3, 4), [1, 1])
    with pytest.raises(MalformedDistribution):
        PredictionBatch.from_lists([[0.0, 0.0]], [0])
    with pytest.raises(MalformedDistribution):
        PredictionBatch.from_lists([[-math.log(2)] * 2], [5])
    with pytest.raises(LengthMismatch):
        PredictionBatch.from_lists([[-math.log(2)] * 2], [0, 1])


@st.composite
def batches(draw):
    v = draw(st.integers(2, 12))
    n = draw(st.integers(1, 10))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    lp = log_softmax(rng.normal(size=(n, v)) * 3)
    targets = rng.integers(0, v, n)
    return PredictionBatch.from_lists(lp, targets), rng


@given(batches(), st.floats(1.0, 5.0))
def test_matches_bruteforce_and_monotone(data, bw):
    batch, rng = data
    boundary = set(rng.integers(0, batch.vocab_size, 2).tolist())
    mask = compute_mask(batch.targets.tolist(), boundary, bw)
    got = weighted_cross_entropy(batch, mask)
    expected = weighted_ce_bruteforce(batch.log_probs, batch.targets, mask.weights)
    assert got.sum == pytest.approx(expected, rel=1e-9, abs=1e-12)
    plain = weighted_cross_entropy(batch, compute_mask(batch.targets.tolist(), boundary, 1.0))
    assert got.sum >= plain.sum - 1e-12


@given(batches(), st.floats(0.1, 10.0))
def test_scaling_weights(data, c):
    batch, _ = data
    w = np.where(batch.targets % 2 == 0, 2.0, 1.0)
    a = weighted_cross_entropy(batch, w)
    b = weighted_cross_entropy(batch, w * c)
    assert b.sum == pytest.approx(a.sum * c, rel=1e-12, abs=1e-12)
    assert b.mean == pytest.approx(a.mean, rel=1e-12, abs=1e-12)


@given(batches())
def test_mask_reads_only_targets(data):
    batch, rng = data
    other = PredictionBatch.from_lists(log_softmax(rng.normal(size=batch.log_probs.shape)),
                                       batch.targets)
    m1 = compute_mask(batch.targets.tolist(), {0, 1})
    m2 = compute_mask(other.targets.tolist(), {0, 1})
    assert m1.tolist() == m2.tolist()
