"""
File: graph.py
Description: Text-attributed graphs: nodes carrying a text and an optional
class label, linked by undirected edges.
"""

import numpy as np

from .errors import GraphFormatError
from ..utils.hashing import sha256_json

UNLABELED = -1


def canonical_edges(edges, node_count=None):
    """Canonicalize an undirected edge list.

    Every pair is written (min, max); duplicates are dropped and the result
    is sorted.

    Args:
        edges (iterable): of (int, int) pairs.
        node_count (int): If given, endpoints must lie in [0, node_count).

    Returns:
        np.ndarray: of shape (m, 2), dtype int64.

    Raises:
        GraphFormatError: on a self-loop or an out-of-range endpoint.

    """
    edges = np.asarray(list(edges) if not isinstance(edges, np.ndarray)
                       else edges, dtype=np.int64).reshape(-1, 2)
    if len(edges) == 0:
        return np.zeros((0, 2), np.int64)

    loops = np.nonzero(edges[:, 0] == edges[:, 1])[0]
    if len(loops):
        i = int(loops[0])
        raise GraphFormatError("self-loop ({:d}, {:d})".format(*edges[i]),
                               'edges[{:d}]'.format(i))
    if node_count is not None:
        bad = np.nonzero((edges < 0).any(axis=1) |
                         (edges >= node_count).any(axis=1))[0]
        if len(bad):
            i = int(bad[0])
            raise GraphFormatError("dangling edge ({:d}, {:d}) in a graph of "
                                   "{:d} nodes".format(edges[i][0], edges[i][1],
                                                       node_count),
                                   'edges[{:d}]'.format(i))

    canonical = np.sort(edges, axis=1)
    return np.unique(canonical, axis=0)


class TextAttributedGraph(object):
    """Graph whose nodes carry a text attribute.

    The graph is immutable once built: arrays are flagged read-only.

    Args:
        texts (list): of str, one text per node.
        labels (list): of int, class id per node, None or -1 for an unlabeled
            node.
        edges (iterable): of (int, int) undirected pairs. Canonicalized.
        num_classes (int): Number of classes over all original labels.
        class_names (list): of str, display name per class. Default is
            'class_<i>'.

    Attributes:
        node_count (int): Number of nodes.
        texts (tuple): of str.
        labels (np.ndarray): of int64, UNLABELED (-1) for unlabeled nodes.
        edges (np.ndarray): of shape (m, 2), canonical (i < j) and sorted.
        num_classes (int): Number of classes.
        class_names (tuple): of str.

    """
    def __init__(self, texts, labels, edges, num_classes, class_names=None):
        texts = tuple(texts)
        labels = [UNLABELED if label is None else label for label in labels]
        if len(texts) != len(labels):
            raise GraphFormatError("{:d} texts for {:d} labels".format(
                len(texts), len(labels)))
        if num_classes < 1:
            raise GraphFormatError("num_classes must be positive")
        for i, text in enumerate(texts):
            if not isinstance(text, str):
                raise GraphFormatError("text is not a string",
                                       'nodes[{:d}]'.format(i))

        labels = np.asarray(labels, dtype=np.int64).reshape(-1)
        bad = np.nonzero((labels < UNLABELED) | (labels >= num_classes))[0]
        if len(bad):
            i = int(bad[0])
            raise GraphFormatError("label {:d} out of range [0, {:d})".format(
                labels[i], num_classes), 'nodes[{:d}]'.format(i))

        if class_names is None:
            class_names = ['class_{:d}'.format(c) for c in range(num_classes)]
        class_names = tuple(class_names)
        if len(class_names) != num_classes:
            raise GraphFormatError("{:d} class names for {:d} classes".format(
                len(class_names), num_classes))

        self.node_count = len(texts)
        self.texts = texts
        self.labels = labels
        self.edges = canonical_edges(edges, self.node_count)
        self.num_classes = int(num_classes)
        self.class_names = class_names

        self.labels.flags.writeable = False
        self.edges.flags.writeable = False

    @property
    def edge_count(self):
        return len(self.edges)

    def is_labeled(self):
        """Boolean mask of the labeled nodes."""
        return self.labels != UNLABELED

    def nodes_of_class(self, class_id):
        return np.nonzero(self.labels == class_id)[0]

    def homophily(self):
        """Fraction of edges between two nodes of the same class.

        Edges with an unlabeled endpoint are ignored.

        Returns:
            float: the edge homophily ratio, None if no edge has two labeled
                endpoints.

        """
        if not len(self.edges):
            return None
        left = self.labels[self.edges[:, 0]]
        right = self.labels[self.edges[:, 1]]
        both = (left != UNLABELED) & (right != UNLABELED)
        if not np.any(both):
            return None
        return float(np.mean(left[both] == right[both]))

    def to_dict(self):
        """JSON-ready form, the graph file format."""
        nodes = []
        for i in range(self.node_count):
            label = int(self.labels[i])
            nodes.append({'id': i,
                          'text': self.texts[i],
                          'label': None if label == UNLABELED else label})
        return {'nodes': nodes,
                'edges': self.edges.tolist(),
                'num_classes': self.num_classes,
                'class_names': list(self.class_names)}

    def graph_hash(self):
        return sha256_json(self.to_dict())

    def summary(self):
        """Statistics printed by the ingest command."""
        labeled = self.is_labeled()
        return {'nodes': self.node_count,
                'edges': self.edge_count,
                'classes': self.num_classes,
                'labeled': int(np.sum(labeled)),
                'homophily': self.homophily()}

    def __repr__(self):
        return '{}(nodes={:d}, edges={:d}, classes={:d})'.format(
            self.__class__.__name__, self.node_count, self.edge_count,
            self.num_classes)


class AugmentedGraph(TextAttributedGraph):
    """Graph enhanced with pseudo-OOD nodes.

    Pseudo nodes are appended after the original nodes, carry no label and
    are flagged in `is_pseudo`.

    Attributes:
        original_node_count (int): Number of nodes of the source graph.
        is_pseudo (np.ndarray): of bool, True for the pseudo-OOD nodes.
        pseudo_edges (np.ndarray): of shape (m, 2), the (ind, pseudo)
            pseudo edges in their original orientation.

    """
    def __init__(self, graph, pseudo_texts, pseudo_edges):
        pseudo_texts = list(pseudo_texts)
        pseudo_edges = np.asarray(pseudo_edges, dtype=np.int64).reshape(-1, 2)
        texts = list(graph.texts) + pseudo_texts
        labels = list(graph.labels) + [UNLABELED] * len(pseudo_texts)
        all_edges = np.concatenate([graph.edges, pseudo_edges], axis=0)
        super().__init__(texts, labels, all_edges, graph.num_classes,
                         graph.class_names)

        self.original_node_count = graph.node_count
        self.is_pseudo = np.zeros(self.node_count, bool)
        self.is_pseudo[graph.node_count:] = True
        self.is_pseudo.flags.writeable = False
        self.pseudo_edges = pseudo_edges
        self.pseudo_edges.flags.writeable = False

    @property
    def pseudo_count(self):
        return self.node_count - self.original_node_count

    def pseudo_nodes(self):
        return np.arange(self.original_node_count, self.node_count)
