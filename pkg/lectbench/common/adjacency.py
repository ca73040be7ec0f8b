"""
File: adjacency.py
Description: Symmetric normalization of the adjacency matrix with self-loops,
D^-1/2 (A + I) D^-1/2, used by the graph convolution layers.
"""

import numpy as np
import scipy.sparse as sp

from .errors import GraphFormatError
from .graph import canonical_edges


def normalized_adjacency(graph, extra_edges=(), node_count=None):
    """Build the normalized adjacency of a graph.

    Args:
        graph (TextAttributedGraph): Source of the nodes and edges.
        extra_edges (iterable): of (int, int), undirected edges added to the
            graph ones (pseudo-node endpoints allowed when node_count covers
            them).
        node_count (int): Size of the matrix. Default is graph.node_count.

    Returns:
        scipy.sparse.csr_matrix: symmetric, float64, of shape
            (node_count, node_count).

    Raises:
        GraphFormatError: if an edge references a node >= node_count.

    """
    n = graph.node_count if node_count is None else int(node_count)
    if n < graph.node_count:
        raise GraphFormatError("matrix of size {:d} cannot hold {:d} "
                               "nodes".format(n, graph.node_count))

    extra = canonical_edges(extra_edges, n)
    edges = canonical_edges(np.concatenate([graph.edges, extra], axis=0), n)
    return normalize_edges(edges, n)


def normalize_edges(edges, n):
    """D^-1/2 (A + I) D^-1/2 for a canonical undirected edge array."""
    rows = np.concatenate([edges[:, 0], edges[:, 1], np.arange(n)])
    cols = np.concatenate([edges[:, 1], edges[:, 0], np.arange(n)])
    values = np.ones(len(rows), np.float64)
    a_tilde = sp.csr_matrix((values, (rows, cols)), shape=(n, n))

    degree = np.asarray(a_tilde.sum(axis=1)).reshape(-1)
    inv_sqrt = sp.diags(1.0 / np.sqrt(degree))
    adj = (inv_sqrt @ a_tilde @ inv_sqrt).tocsr()
    adj.sort_indices()
    return adj
