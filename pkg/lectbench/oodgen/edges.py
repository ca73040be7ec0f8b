"""
File: edges.py
Description: Random wiring of the pseudo-OOD nodes to training IND nodes.
"""

import math

import numpy as np

from ..common.errors import SplitError


def default_num_pseudo(nb_train):
    """Default number of pseudo-OOD nodes: 10% of the training nodes, at
    least 8."""
    return max(8, int(math.floor(0.1 * nb_train)))


def resolve_counts(split, cfg):
    """(num_pseudo, c_max) of a configuration, with 0 meaning 'derived'."""
    num_pseudo = cfg.num_pseudo or default_num_pseudo(len(split.train_idx))
    c_max = cfg.c_max or split.num_ind_classes
    return num_pseudo, c_max


def init_pseudo_edges(split, num_pseudo, c_max, first_id, rng):
    """Connect every pseudo node to between 1 and c_max training IND nodes.

    For each pseudo node, in id order, a degree k is drawn uniformly in
    {1, ..., c_max} and capped at the number of training nodes, then k
    distinct training nodes are drawn uniformly without replacement.

    Args:
        split (NodeSplit): Provides the training IND nodes.
        num_pseudo (int): Number of pseudo nodes N_o.
        c_max (int): Maximum degree of a pseudo node. Strictly positive.
        first_id (int): Id of the first pseudo node (the original node
            count).
        rng (np.random.Generator): Random stream of the stage.

    Returns:
        tuple: (edges, neighbors) where edges is an int64 array of
            (ind_node, pseudo_node) rows, grouped by pseudo node, and
            neighbors a list holding the sorted IND neighbors of each pseudo
            node.

    Raises:
        SplitError: if the training set is empty.

    """
    if c_max < 1:
        raise ValueError("c_max must be strictly positive")
    train_idx = split.train_idx
    if len(train_idx) == 0:
        raise SplitError("cannot wire pseudo nodes: the training set is empty")

    edges = []
    neighbors = []
    for offset in range(num_pseudo):
        degree = min(int(rng.integers(1, c_max + 1)), len(train_idx))
        chosen = np.sort(rng.choice(train_idx, size=degree, replace=False))
        neighbors.append([int(v) for v in chosen])
        edges.extend((int(v), first_id + offset) for v in chosen)
    return np.asarray(edges, np.int64).reshape(-1, 2), neighbors


def pseudo_modes(num_pseudo, mode):
    """Generation mode of every pseudo node.

    In mixed mode the first ceil(N/2) nodes are near and the others far.
    """
    if mode == 'mixed':
        nb_near = (num_pseudo + 1) // 2
        return ['near'] * nb_near + ['far'] * (num_pseudo - nb_near)
    if mode not in ('near', 'far'):
        raise ValueError("Unknown generation mode {}".format(mode))
    return [mode] * num_pseudo
