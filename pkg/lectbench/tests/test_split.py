import pytest
import numpy as np

from .fixtures import *
from ..common import NodeSplit, SplitError, TextAttributedGraph, build_split
from ..models.parameters import SplitSpec
from ..utils.seeding import stage_rng


def test_split_counts(ten_node_graph, ten_node_split):
    assert len(ten_node_split.test_ood_idx) == 4
    assert ten_node_split.test_ood_idx.tolist() == [6, 7, 8, 9]
    # 6 IND nodes: floor(0.5 * 6) train, floor(0.25 * 6) val, the rest test.
    assert len(ten_node_split.train_idx) == 3
    assert len(ten_node_split.val_idx) == 1
    assert len(ten_node_split.test_ind_idx) == 2
    assert ten_node_split.num_ind_classes == 2
    assert ten_node_split.ind_class_remap == {0: 0, 1: 1}


def test_split_partition(small_graph, small_split):
    sets = [small_split.train_idx, small_split.val_idx,
            small_split.test_ind_idx, small_split.test_ood_idx]
    union = np.concatenate(sets)
    assert len(union) == len(set(union.tolist()))
    assert sorted(union.tolist()) == np.nonzero(small_graph.is_labeled())[0].tolist()
    ind = np.concatenate(sets[:3])
    assert not np.any(small_graph.labels[ind] == 3)
    assert np.all(small_graph.labels[small_split.test_ood_idx] == 3)


def test_split_determinism(ten_node_graph):
    spec = SplitSpec(ood_classes=[2], train_fraction=0.5, val_fraction=0.25, seed=7)
    assert build_split(ten_node_graph, spec) == build_split(ten_node_graph, spec)
    other = build_split(ten_node_graph, spec.replace(seed=8))
    assert len(other.train_idx) == 3


def test_split_single_shuffle(ten_node_graph, ten_node_split):
    # One permutation of every IND node, classes are not balanced per set.
    ind_nodes = np.array([0, 1, 2, 3, 4, 5])
    shuffled = ind_nodes[stage_rng(7, 'split').permutation(6)]
    assert ten_node_split.train_idx.tolist() == sorted(shuffled[:3].tolist())
    assert ten_node_split.val_idx.tolist() == sorted(shuffled[3:4].tolist())
    assert ten_node_split.test_ind_idx.tolist() == sorted(shuffled[4:].tolist())

def test_split_errors(ten_node_graph):
    with pytest.raises(SplitError) as e:
        build_split(ten_node_graph, SplitSpec(ood_classes=[0, 1, 2]))
    assert 'no IND classes remain' in str(e.value)
    with pytest.raises(SplitError):
        build_split(ten_node_graph, SplitSpec(ood_classes=[5]))

    graph = TextAttributedGraph(['a', 'b', 'c'], [0, 0, 2], [], 3)
    with pytest.raises(SplitError):
        build_split(graph, SplitSpec(ood_classes=[2]))


def test_split_spec_checks():
    with pytest.raises(ValueError):
        SplitSpec(train_fraction=0.8, val_fraction=0.2)
    with pytest.raises(ValueError):
        SplitSpec(ood_classes=[])
    with pytest.raises(ValueError):
        SplitSpec(train_fraction=0.0)


def test_remap(small_graph, small_split):
    labels = small_split.remap_labels(small_graph.labels[small_split.train_idx])
    assert set(labels.tolist()) == {0, 1, 2}
    with pytest.raises(SplitError):
        small_split.remap_labels([3])


def test_split_dict(ten_node_split):
    assert NodeSplit.from_dict(ten_node_split.to_dict()) == ten_node_split


def test_unlabeled_left_out():
    graph = TextAttributedGraph(['a', 'b', 'c', 'd', 'e'], [0, None, 1, 1, 0], [], 2)
    split = build_split(graph, SplitSpec(ood_classes=[1], seed=1))
    all_nodes = np.concatenate([split.train_idx, split.val_idx,
                                split.test_ind_idx, split.test_ood_idx])
    assert 1 not in all_nodes.tolist()
