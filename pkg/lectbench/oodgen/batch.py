"""
File: batch.py
Description: Pseudo-OOD batches: wiring, text generation, persistence and the
augmentation of the source graph.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from loguru import logger

from ..common.errors import GenerationError, GraphFormatError
from ..common.graph import AugmentedGraph
from ..utils.hashing import canonical_json, sha256_json
from ..utils.seeding import stage_rng
from .edges import init_pseudo_edges, pseudo_modes, resolve_counts


class PseudoOodSkeleton(object):
    """Pseudo nodes wired to the graph, before any text is generated.

    Attributes:
        first_id (int): Id of the first pseudo node.
        edges (np.ndarray): (ind_node, pseudo_node) rows.
        neighbors (list): Sorted IND neighbors of each pseudo node.
        neighbor_labels (list): Sorted distinct class names of those
            neighbors.
        modes (list): 'near' or 'far' per pseudo node.
        ind_class_names (list): Names of the IND classes.

    """
    def __init__(self, first_id, edges, neighbors, neighbor_labels, modes,
                 ind_class_names):
        self.first_id = first_id
        self.edges = edges
        self.neighbors = neighbors
        self.neighbor_labels = neighbor_labels
        self.modes = modes
        self.ind_class_names = list(ind_class_names)

    @property
    def node_ids(self):
        return list(range(self.first_id, self.first_id + len(self.modes)))


def build_skeleton(graph, split, cfg):
    """Draw the pseudo nodes and their edges to training IND nodes.

    Args:
        graph (TextAttributedGraph): The source graph.
        split (NodeSplit): Its IND / OOD split.
        cfg (OodGenConfig): Generation parameters.

    Returns:
        PseudoOodSkeleton

    """
    num_pseudo, c_max = resolve_counts(split, cfg)
    rng = stage_rng(cfg.seed, 'pseudo_edges')
    edges, neighbors = init_pseudo_edges(split, num_pseudo, c_max,
                                         graph.node_count, rng)
    neighbor_labels = [sorted({graph.class_names[graph.labels[v]]
                               for v in node_neighbors})
                       for node_neighbors in neighbors]
    ind_class_names = [graph.class_names[c] for c in split.ind_class_ids()]
    logger.debug("{:d} pseudo nodes, {:d} pseudo edges (c_max {:d})",
                 num_pseudo, len(edges), c_max)
    return PseudoOodSkeleton(graph.node_count, edges, neighbors,
                             neighbor_labels, pseudo_modes(num_pseudo, cfg.mode),
                             ind_class_names)


class PseudoOodBatch(object):
    """Generated pseudo-OOD nodes.

    Args:
        first_id (int): Id of the first pseudo node, the node count of the
            source graph.
        edges (np.ndarray): (ind_node, pseudo_node) rows.
        texts (list): of str, one non-empty text per pseudo node, Q_o.
        meta (list): of dict, per node {'mode', 'chosen_category',
            'neighbor_labels'}.
        generator_id (str): Identifier of the generator.
        transcripts (list): Optional chat transcripts, one per node.

    """
    def __init__(self, first_id, edges, texts, meta, generator_id,
                 transcripts=None):
        self.first_id = int(first_id)
        self.edges = np.asarray(edges, np.int64).reshape(-1, 2)
        self.texts = list(texts)
        self.meta = list(meta)
        self.generator_id = generator_id
        self.transcripts = transcripts
        if len(self.meta) != len(self.texts):
            raise ValueError("{:d} meta records for {:d} texts".format(
                len(self.meta), len(self.texts)))

    def __len__(self):
        return len(self.texts)

    @property
    def node_ids(self):
        return np.arange(self.first_id, self.first_id + len(self.texts))

    def mode_counts(self):
        counts = {'near': 0, 'far': 0}
        for record in self.meta:
            counts[record['mode']] += 1
        return counts

    def to_dict(self):
        return {'first_id': self.first_id,
                'edges': self.edges.tolist(),
                'texts': self.texts,
                'meta': self.meta,
                'generator': self.generator_id}

    @classmethod
    def from_dict(cls, data):
        return cls(data['first_id'], data['edges'], data['texts'],
                   data['meta'], data['generator'])

    def batch_hash(self):
        return sha256_json(self.to_dict())

    def save(self, path):
        """Write the batch as canonical JSON, and its transcripts (if any) as
        JSON lines in `<path>.transcripts.jsonl`."""
        with open(path, 'w', encoding='utf-8') as f:
            f.write(canonical_json(self.to_dict()))
            f.write('\n')
        if self.transcripts:
            with open(path + '.transcripts.jsonl', 'w', encoding='utf-8') as f:
                for node_id, transcript in zip(self.node_ids, self.transcripts):
                    f.write(canonical_json({'node_id': int(node_id),
                                            'messages': transcript}))
                    f.write('\n')

    @staticmethod
    def load(path):
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        try:
            return PseudoOodBatch.from_dict(data)
        except (KeyError, TypeError) as e:
            raise GraphFormatError("{} is not a pseudo-OOD batch "
                                   "({})".format(path, e))


def generate_texts(skeleton, generator, concurrency=1):
    """Fill the texts of a skeleton.

    Pseudo nodes are generated independently, `concurrency` at a time. The
    batch is built only once every node succeeded.

    Args:
        skeleton (PseudoOodSkeleton): Wired pseudo nodes.
        generator (TextGenerator): The text generator.
        concurrency (int): Nodes generated in parallel.

    Returns:
        PseudoOodBatch

    Raises:
        GenerationError: identifying the first failing pseudo node.

    """
    node_ids = skeleton.node_ids

    def _generate(offset):
        node_id = node_ids[offset]
        result = generator.generate(node_id, skeleton.ind_class_names,
                                    skeleton.neighbor_labels[offset],
                                    skeleton.modes[offset])
        if not result.text or not result.text.strip():
            raise GenerationError("empty completion", node_id=node_id)
        return result

    if concurrency > 1 and len(node_ids) > 1:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            results = list(pool.map(_generate, range(len(node_ids))))
    else:
        results = [_generate(offset) for offset in range(len(node_ids))]

    meta = [{'mode': mode, 'chosen_category': result.category,
             'neighbor_labels': labels}
            for mode, result, labels in zip(skeleton.modes, results,
                                            skeleton.neighbor_labels)]
    transcripts = [result.transcript for result in results]
    if not any(transcripts):
        transcripts = None
    logger.info("generated {:d} pseudo-OOD texts with {}", len(results),
                generator.generator_id)
    return PseudoOodBatch(skeleton.first_id, skeleton.edges,
                          [result.text for result in results], meta,
                          generator.generator_id, transcripts)


def with_texts(batch, generator, ind_class_names):
    """Regenerate the texts of a batch, keeping its nodes, edges and modes."""
    skeleton = PseudoOodSkeleton(batch.first_id, batch.edges, None,
                                 [record['neighbor_labels'] for record in batch.meta],
                                 [record['mode'] for record in batch.meta],
                                 ind_class_names)
    return generate_texts(skeleton, generator)


def augment_graph(graph, split, batch):
    """Enhance a graph with a pseudo-OOD batch.

    Args:
        graph (TextAttributedGraph): The source graph.
        split (NodeSplit): Its split; pseudo nodes may only link to training
            nodes.
        batch (PseudoOodBatch): Nodes numbered right after the source ones.

    Returns:
        AugmentedGraph

    Raises:
        GraphFormatError: if the batch ids collide with the graph nodes, if
            an edge does not join a training node to a pseudo node, or if a
            pseudo node has no edge.

    """
    if batch.first_id != graph.node_count:
        raise GraphFormatError("pseudo node ids start at {:d} but the graph "
                               "has {:d} nodes".format(batch.first_id,
                                                       graph.node_count))
    last_id = batch.first_id + len(batch)
    if len(batch.edges):
        ind_side, pseudo_side = batch.edges[:, 0], batch.edges[:, 1]
        bad = np.nonzero(~np.isin(ind_side, split.train_idx) |
                         (pseudo_side < batch.first_id) |
                         (pseudo_side >= last_id))[0]
        if len(bad):
            i = int(bad[0])
            raise GraphFormatError("pseudo edge ({:d}, {:d}) does not join a "
                                   "training node to a pseudo node".format(
                                       *batch.edges[i]),
                                   'edges[{:d}]'.format(i))
    wired = set(batch.edges[:, 1].tolist()) if len(batch.edges) else set()
    for node_id in batch.node_ids:
        if int(node_id) not in wired:
            raise GraphFormatError("pseudo node {:d} has no edge".format(
                node_id))
    return AugmentedGraph(graph, batch.texts, batch.edges)
