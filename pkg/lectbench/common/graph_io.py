"""
File: graph_io.py
Description: Reading and writing text-attributed graphs in the JSON graph
file format:

    {"nodes": [{"id": int, "text": str, "label": int|null}, ...],
     "edges": [[int, int], ...],
     "num_classes": int,
     "class_names": [str, ...]}          (optional)
"""

import json

from loguru import logger

from .errors import GraphFormatError
from .graph import TextAttributedGraph


def graph_from_dict(data):
    """Validate a decoded graph file and build the graph.

    Node ids must cover 0..n-1 exactly once, in any order.

    Raises:
        GraphFormatError: naming the first offending record.

    """
    if not isinstance(data, dict):
        raise GraphFormatError("graph file must hold a JSON object")
    for key in ('nodes', 'edges', 'num_classes'):
        if key not in data:
            raise GraphFormatError("missing key '{}'".format(key))
    unknown = set(data) - {'nodes', 'edges', 'num_classes', 'class_names'}
    if unknown:
        raise GraphFormatError("unknown keys {}".format(sorted(unknown)))

    num_classes = data['num_classes']
    if not isinstance(num_classes, int) or isinstance(num_classes, bool) \
            or num_classes < 1:
        raise GraphFormatError("num_classes must be a positive integer",
                               'num_classes')

    nodes = data['nodes']
    if not isinstance(nodes, list):
        raise GraphFormatError("'nodes' must be a list")
    n = len(nodes)
    texts = [None] * n
    labels = [None] * n
    for position, node in enumerate(nodes):
        locator = 'nodes[{:d}]'.format(position)
        if not isinstance(node, dict) or 'id' not in node or 'text' not in node:
            raise GraphFormatError("node needs 'id' and 'text'", locator)
        node_id = node['id']
        if not isinstance(node_id, int) or isinstance(node_id, bool) \
                or not 0 <= node_id < n:
            raise GraphFormatError("id {!r} out of range [0, {:d})".format(
                node_id, n), locator)
        if texts[node_id] is not None:
            raise GraphFormatError("duplicated id {:d}".format(node_id),
                                   locator)
        if not isinstance(node['text'], str):
            raise GraphFormatError("text must be a string", locator)
        label = node.get('label')
        if label is not None:
            if not isinstance(label, int) or isinstance(label, bool) \
                    or not 0 <= label < num_classes:
                raise GraphFormatError("label {!r} out of range [0, "
                                       "{:d})".format(label, num_classes),
                                       locator)
        texts[node_id] = node['text']
        labels[node_id] = label

    edges = data['edges']
    if not isinstance(edges, list):
        raise GraphFormatError("'edges' must be a list")
    for position, edge in enumerate(edges):
        locator = 'edges[{:d}]'.format(position)
        if not isinstance(edge, (list, tuple)) or len(edge) != 2 or \
                not all(isinstance(e, int) and not isinstance(e, bool)
                        for e in edge):
            raise GraphFormatError("edge must be a pair of integers", locator)
        i, j = edge
        if not (0 <= i < n and 0 <= j < n):
            raise GraphFormatError("dangling edge [{:d}, {:d}] in a graph "
                                   "of {:d} nodes".format(i, j, n), locator)
        if i == j:
            raise GraphFormatError("self-loop [{:d}, {:d}]".format(i, j),
                                   locator)

    class_names = data.get('class_names')
    if class_names is not None:
        if not isinstance(class_names, list) or \
                not all(isinstance(c, str) for c in class_names):
            raise GraphFormatError("class_names must be a list of strings",
                                   'class_names')

    return TextAttributedGraph(texts, labels, edges, num_classes, class_names)


def load_graph_json(path):
    """Load and validate a graph file.

    Duplicated and reversed edges are collapsed.

    Args:
        path (str): Path of the JSON graph file.

    Returns:
        TextAttributedGraph

    Raises:
        GraphFormatError: on malformed content.

    """
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise GraphFormatError("invalid JSON: {}".format(e.msg),
                                   'line {:d}'.format(e.lineno))
    graph = graph_from_dict(data)
    raw_edges = len(data['edges'])
    if raw_edges != graph.edge_count:
        logger.info("{}: {:d} duplicated edges collapsed", path,
                    raw_edges - graph.edge_count)
    return graph


def save_graph_json(graph, path):
    """Write a graph in its canonical form."""
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(graph.to_dict(), f, sort_keys=True)
        f.write('\n')
