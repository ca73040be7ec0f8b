"""
File: split.py
Description: Construction of the IND / OOD node split by label shift: whole
classes are held out of training and their nodes form the OOD test set.
"""

import math

import numpy as np

from .errors import SplitError
from ..utils.seeding import stage_rng


class NodeSplit(object):
    """Disjoint node index sets of a label-shift split.

    Args:
        train_idx (np.ndarray): Training IND nodes.
        val_idx (np.ndarray): Validation IND nodes.
        test_ind_idx (np.ndarray): Test IND nodes.
        test_ood_idx (np.ndarray): Nodes of the OOD classes.
        ind_class_remap (dict): Original class id -> contiguous IND id.

    Attributes:
        num_ind_classes (int): C_ind, the number of retained classes.

    """
    def __init__(self, train_idx, val_idx, test_ind_idx, test_ood_idx,
                 ind_class_remap):
        self.train_idx = _frozen(train_idx)
        self.val_idx = _frozen(val_idx)
        self.test_ind_idx = _frozen(test_ind_idx)
        self.test_ood_idx = _frozen(test_ood_idx)
        self.ind_class_remap = dict(ind_class_remap)
        self.num_ind_classes = len(self.ind_class_remap)

    def remap_labels(self, labels):
        """Map original class ids to the contiguous IND ids.

        Raises:
            SplitError: if a label belongs to an OOD class.

        """
        try:
            return np.array([self.ind_class_remap[int(label)]
                             for label in labels], dtype=np.int64)
        except KeyError as e:
            raise SplitError("label {} is not an IND class".format(e.args[0]))

    def ind_class_ids(self):
        """Original class ids in contiguous-id order."""
        return [original for original, _ in
                sorted(self.ind_class_remap.items(), key=lambda kv: kv[1])]

    def to_dict(self):
        return {'train_idx': self.train_idx.tolist(),
                'val_idx': self.val_idx.tolist(),
                'test_ind_idx': self.test_ind_idx.tolist(),
                'test_ood_idx': self.test_ood_idx.tolist(),
                'ind_class_remap': {str(k): v for k, v in
                                    sorted(self.ind_class_remap.items())}}

    @classmethod
    def from_dict(cls, data):
        remap = {int(k): int(v) for k, v in data['ind_class_remap'].items()}
        return cls(data['train_idx'], data['val_idx'], data['test_ind_idx'],
                   data['test_ood_idx'], remap)

    def __eq__(self, other):
        return isinstance(other, NodeSplit) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return ('NodeSplit(train={:d}, val={:d}, test_ind={:d}, '
                'test_ood={:d}, ind_classes={:d})'.format(
                    len(self.train_idx), len(self.val_idx),
                    len(self.test_ind_idx), len(self.test_ood_idx),
                    self.num_ind_classes))


def _frozen(indexes):
    array = np.array(sorted(int(i) for i in indexes), dtype=np.int64)
    array.flags.writeable = False
    return array


def build_split(graph, spec):
    """Split the labeled nodes of a graph by label shift.

    IND nodes (labels outside spec.ood_classes) are shuffled with the split
    seed, then the first floor(train_fraction * n) go to training, the next
    floor(val_fraction * n) to validation and the rest to the IND test set.
    Every node of an OOD class goes to the OOD test set. Unlabeled nodes are
    left out of every set.

    Args:
        graph (TextAttributedGraph): The graph to split.
        spec (SplitSpec): The split specification.

    Returns:
        NodeSplit

    Raises:
        SplitError: if an OOD class id is out of range, if no IND class
            remains, or if a class has no node.

    """
    ood_classes = set(spec.ood_classes)
    for c in ood_classes:
        if c >= graph.num_classes:
            raise SplitError("OOD class {:d} out of range [0, {:d})".format(
                c, graph.num_classes))
    ind_classes = [c for c in range(graph.num_classes) if c not in ood_classes]
    if not ind_classes:
        raise SplitError("no IND classes remain")

    counts = np.bincount(graph.labels[graph.is_labeled()],
                         minlength=graph.num_classes)
    empty = [c for c in range(graph.num_classes) if counts[c] == 0]
    if empty:
        raise SplitError("class {:d} has no node".format(empty[0]))

    labels = graph.labels
    is_ood = np.isin(labels, sorted(ood_classes))
    ind_nodes = np.nonzero(graph.is_labeled() & ~is_ood)[0]
    ood_nodes = np.nonzero(is_ood)[0]

    rng = stage_rng(spec.seed, 'split')
    shuffled = ind_nodes[rng.permutation(len(ind_nodes))]
    nb_train = int(math.floor(spec.train_fraction * len(ind_nodes)))
    nb_val = int(math.floor(spec.val_fraction * len(ind_nodes)))

    remap = {c: i for i, c in enumerate(ind_classes)}
    return NodeSplit(shuffled[:nb_train],
                     shuffled[nb_train:nb_train + nb_val],
                     shuffled[nb_train + nb_val:],
                     ood_nodes,
                     remap)
