import math

import pytest
import numpy as np

from .fixtures import *
from ..common import NonFiniteError
from ..detection import (LOSS_COMPONENTS, loss_coefficients, loss_ind_ood, loss_mean_constraint,
                         loss_supervised, loss_total, loss_triplet, sample_linked_pairs,
                         sample_triplets, train_ind_edges)
from ..models.parameters import LossWeights
from ..utils import stage_rng

STAR_IND_EDGES = [(0, 1), (0, 2), (0, 3)]


def test_train_ind_edges(ten_node_graph, ten_node_split):
    edges = train_ind_edges(ten_node_graph, ten_node_split)
    train = set(ten_node_split.train_idx.tolist())
    for i, j in edges:
        assert i in train and j in train
    expected = [e for e in TEN_EDGES if e[0] in train and e[1] in train]
    assert sorted(map(tuple, edges.tolist())) == sorted(expected)


def test_linked_pairs_cap():
    pseudo_edges = np.array([(i % 7, 100 + i) for i in range(50)])
    pairs = sample_linked_pairs(pseudo_edges, 300, stage_rng(0, 'pairs', 1))
    assert len(pairs) == 50
    assert sorted(map(tuple, pairs.tolist())) == sorted(map(tuple, pseudo_edges.tolist()))


def test_linked_pairs_sample():
    pseudo_edges = np.array([(i % 7, 100 + i) for i in range(50)])
    first = sample_linked_pairs(pseudo_edges, 20, stage_rng(4, 'pairs', 3))
    second = sample_linked_pairs(pseudo_edges, 20, stage_rng(4, 'pairs', 3))
    assert np.array_equal(first, second)
    assert len({tuple(p) for p in first.tolist()}) == 20
    assert sample_linked_pairs(pseudo_edges, 0, stage_rng(4, 'pairs', 3)).shape == (0, 2)
    with pytest.raises(ValueError) as e:
        sample_linked_pairs([], 10, stage_rng(4, 'pairs', 3))
    assert 'no pseudo edges' in str(e.value)


def test_triplets_counting():
    triplets = sample_triplets(STAR_IND_EDGES, [(0, 10)], 100, stage_rng(0, 'triplets'))
    assert sorted(map(tuple, triplets.tolist())) == [(1, 0, 10), (2, 0, 10), (3, 0, 10)]


def test_triplets_skip_isolated_center():
    triplets = sample_triplets(STAR_IND_EDGES, [(0, 10), (5, 11)], 100,
                               stage_rng(0, 'triplets'))
    assert len(triplets) == 3
    assert 5 not in triplets[:, 1]


def test_triplets_no_center():
    with pytest.raises(ValueError) as e:
        sample_triplets(STAR_IND_EDGES, [(5, 11)], 10, stage_rng(0, 'triplets'))
    assert 'no eligible triplet center' in str(e.value)


def test_triplets_sample():
    ind_edges = [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (3, 4)]
    pseudo_edges = [(0, 10), (2, 10), (3, 11), (4, 12)]
    triplets = sample_triplets(ind_edges, pseudo_edges, 5, stage_rng(2, 'triplets', 0))
    assert len(triplets) == 5
    assert len({tuple(t) for t in triplets.tolist()}) == 5
    ind_set = {frozenset(e) for e in ind_edges}
    for i, c, j in triplets:
        assert frozenset((i, c)) in ind_set
        assert (c, j) in pseudo_edges
    again = sample_triplets(ind_edges, pseudo_edges, 5, stage_rng(2, 'triplets', 0))
    assert np.array_equal(triplets, again)


def test_loss_ind_ood_examples():
    assert loss_ind_ood([(0, 1)], [-5.0, -2.0], 1.0)[0] == 0.0
    assert loss_ind_ood([(0, 1)], [-2.0, -2.0], 1.0)[0] == 1.0
    value, grad = loss_ind_ood([(0, 1), (2, 3)], [-3.0, -2.0, -5.0, -1.0], 2.0)
    assert value == pytest.approx(0.5)
    assert grad.tolist() == [0.5, -0.5, 0.0, 0.0]


def test_loss_ind_ood_edge_cases():
    value, grad = loss_ind_ood(np.zeros((0, 2)), [1.0, 2.0], 1.0)
    assert value == 0.0 and np.all(grad == 0.0)
    with pytest.raises(IndexError):
        loss_ind_ood([(0, 5)], [1.0, 2.0], 1.0)
    with pytest.raises(NonFiniteError):
        loss_ind_ood([(0, 1)], [np.nan, 2.0], 1.0)


def test_loss_ind_ood_decreases_with_gap():
    before = loss_ind_ood([(0, 1)], [-2.0, -1.5], 1.0)[0]
    after = loss_ind_ood([(0, 1)], [-2.0, -1.2], 1.0)[0]
    assert after < before


def test_loss_mean_constraint_examples():
    assert loss_mean_constraint([-6.0, -6.0], [-1.0], 1.0)[0] == 0.0
    value, grad_ind, grad_ood = loss_mean_constraint([-3.0, -1.0], [-2.0, -2.0, -2.0], 1.0)
    assert value == 1.0
    assert grad_ind.tolist() == [0.5, 0.5]
    assert np.allclose(grad_ood, -1.0 / 3)
    value, _, grad_ood = loss_mean_constraint([-3.0], [], 1.0)
    assert value == 0.0 and grad_ood.shape == (0,)


def test_loss_triplet_examples():
    assert loss_triplet([(0, 1, 2)], [-5.0, -5.0, -2.0])[0] == 0.0
    value, grad = loss_triplet([(0, 1, 2)], [-4.0, -6.0, -6.0])
    assert value == 2.0
    # d/dE_i = sign(E_i - E_c), d/dE_c = 1 - sign, d/dE_j = -1
    assert grad.tolist() == [1.0, 0.0, -1.0]
    assert loss_triplet([(0, 1, 2)], [-3.0, -3.0, -3.0])[0] == 0.0


def test_losses_shift_invariance():
    energies = stage_rng(1, 'energies').normal(size=8)
    triplets = [(0, 1, 5), (2, 1, 6), (3, 4, 7)]
    pairs = [(0, 5), (1, 6), (4, 7)]
    for shift in (-3.7, 12.0):
        assert loss_triplet(triplets, energies + shift)[0] == \
            pytest.approx(loss_triplet(triplets, energies)[0], abs=1e-12)
        assert loss_ind_ood(pairs, energies + shift, 1.0)[0] == \
            pytest.approx(loss_ind_ood(pairs, energies, 1.0)[0], abs=1e-12)


def test_hinges_non_negative():
    rng = stage_rng(2, 'energies')
    for _ in range(20):
        energies = rng.normal(scale=3.0, size=6)
        assert loss_ind_ood([(0, 3), (1, 4), (2, 5)], energies, 1.0)[0] >= 0.0
        assert loss_triplet([(0, 1, 3), (2, 1, 4)], energies)[0] >= 0.0
        assert loss_mean_constraint(energies[:3], energies[3:], 1.0)[0] >= 0.0


def test_loss_supervised_examples():
    value, grad = loss_supervised(np.zeros((4, 3)), [0, 1, 2, 0])
    assert value == pytest.approx(math.log(3))
    assert np.allclose(grad.sum(axis=1), 0.0)
    assert loss_supervised([[20.0, -20.0]], [0])[0] < 1e-8
    value, _ = loss_supervised([[1.0, 0.0], [0.0, 1.0]], [0, 1])
    assert value == pytest.approx(math.log(1 + math.exp(-1)), abs=1e-12)
    assert value == pytest.approx(0.313262, abs=1e-6)


def test_loss_supervised_gradient():
    logits = np.array([[0.3, -1.2, 0.8], [1.5, 0.1, -0.4]])
    labels = [2, 0]
    _, grad = loss_supervised(logits, labels)
    step = 1e-6
    for index in np.ndindex(logits.shape):
        plus, minus = logits.copy(), logits.copy()
        plus[index] += step
        minus[index] -= step
        numeric = (loss_supervised(plus, labels)[0] - loss_supervised(minus, labels)[0]) / (2 * step)
        assert numeric == pytest.approx(grad[index], abs=1e-8)


def test_loss_supervised_errors():
    with pytest.raises(ValueError):
        loss_supervised(np.zeros((0, 2)), [])
    with pytest.raises(ValueError):
        loss_supervised(np.zeros((2, 2)), [0, 2])
    with pytest.raises(ValueError):
        loss_supervised(np.zeros((2, 2)), [0])


def test_loss_coefficients():
    coefficients = loss_coefficients(LossWeights(lambda1=0.2, lambda2=0.3, lambda_mean=0.5))
    assert sorted(coefficients) == sorted(LOSS_COMPONENTS)
    assert coefficients['l_mean'] == pytest.approx(0.1)
    assert loss_coefficients(LossWeights(use_mean_constraint=False))['l_mean'] == 0.0


def test_loss_total_weights():
    ones = np.ones(3)
    components = {name: (1.0, ones) for name in LOSS_COMPONENTS}
    weights = LossWeights(lambda1=0.1, lambda2=0.1, use_mean_constraint=False)
    total, grad = loss_total(components, weights)
    assert total == pytest.approx(1.2)
    assert np.allclose(grad, 1.2)


def test_loss_total_ablation_identity():
    rng = stage_rng(5, 'components')
    components = {name: (float(rng.random()), rng.normal(size=4)) for name in LOSS_COMPONENTS}
    total, grad = loss_total(components, LossWeights(lambda1=0.0, lambda2=0.0))
    assert total == components['l_sup'][0]
    assert np.array_equal(grad, components['l_sup'][1])


def test_loss_total_linearity():
    rng = stage_rng(6, 'components')
    components = {name: (float(rng.random()), rng.normal(size=5)) for name in LOSS_COMPONENTS}
    weights = LossWeights(lambda1=0.4, lambda2=0.7, use_mean_constraint=False)
    _, grad = loss_total(components, weights)
    expected = components['l_sup'][1] + 0.4 * components['l_pairs'][1] + \
        0.7 * components['l_triplet'][1]
    assert np.allclose(grad, expected, rtol=1e-12)


def test_loss_total_errors():
    with pytest.raises(NonFiniteError) as e:
        loss_total({'l_sup': (1.0, None), 'l_pairs': (np.nan, None)}, LossWeights())
    assert e.value.component == 'l_pairs'
    with pytest.raises(KeyError):
        loss_total({'l_other': (1.0, None)}, LossWeights())
