"""
File: synthetic.py
Description: Desk-scale benchmark graph: a stochastic block model whose node
texts are keyword sentences drawn from one vocabulary per class. The last
class is held out as OOD.
"""

import numpy as np

from ...common.graph import TextAttributedGraph
from ...common.split import build_split
from ...models.parameters import ExperimentConfig, SplitSpec
from ...utils.seeding import stage_rng

CLASS_NAMES = ('Neural Networks', 'Probabilistic Methods', 'Theory',
               'Genetic Algorithms')

VOCABULARIES = (
    ('neuron', 'backpropagation', 'perceptron', 'layer', 'activation',
     'convolution', 'recurrent', 'weights', 'gradient', 'dropout',
     'autoencoder', 'hidden', 'sigmoid', 'epoch', 'embedding', 'tensor',
     'relu', 'pooling', 'attention', 'feedforward'),
    ('bayesian', 'posterior', 'prior', 'likelihood', 'markov', 'inference',
     'sampling', 'gaussian', 'variational', 'marginal', 'belief',
     'conditional', 'mixture', 'expectation', 'stochastic', 'density',
     'evidence', 'graphical', 'latent', 'dirichlet'),
    ('theorem', 'proof', 'lemma', 'complexity', 'bound', 'polynomial',
     'decidable', 'automata', 'reduction', 'hardness', 'axiom', 'corollary',
     'combinatorial', 'lattice', 'logic', 'formal', 'regular', 'grammar',
     'approximation', 'asymptotic'),
    ('chromosome', 'mutation', 'crossover', 'fitness', 'population',
     'selection', 'evolutionary', 'genome', 'offspring', 'elitism',
     'tournament', 'allele', 'breeding', 'generation', 'phenotype',
     'genotype', 'niche', 'speciation', 'recombination', 'survival'),
)

SHARED_WORDS = ('paper', 'method', 'results', 'study', 'approach',
                'experiments', 'model', 'analysis')

NODES_PER_CLASS = 150
P_IN = 0.05
P_OUT = 0.005
OOD_CLASS = 3

# Loss settings of the benchmark runs, laid under any user configuration.
SYNTH_CONFIG = {'loss': {'gamma': 3.0, 'lambda2': 0.05}}


class SyntheticBenchmark(object):
    """Graph, split and expected properties of the synthetic benchmark.

    Attributes:
        graph (TextAttributedGraph): 600 nodes in 4 classes.
        split (NodeSplit): Label-shift split holding out class 3.
        expected (dict): Construction constants and expected edge counts.

    """
    def __init__(self, graph, split, expected):
        self.graph = graph
        self.split = split
        self.expected = expected


def _node_text(rng, class_id, nb_class_words=6, nb_shared_words=2):
    words = list(rng.choice(VOCABULARIES[class_id], size=nb_class_words,
                            replace=False))
    words += list(rng.choice(SHARED_WORDS, size=nb_shared_words,
                             replace=False))
    rng.shuffle(words)
    return "This {} discusses {}.".format(words[0], ", ".join(words[1:]))


def synthetic_graph(seed, nodes_per_class=NODES_PER_CLASS, p_in=P_IN,
                    p_out=P_OUT):
    """Stochastic block model graph with class-specific node texts.

    Args:
        seed (int): Seed of the construction.
        nodes_per_class (int): Block size.
        p_in (float): Edge probability within a class.
        p_out (float): Edge probability between classes.

    Returns:
        TextAttributedGraph

    """
    rng = stage_rng(seed, 'synthetic')
    nb_classes = len(CLASS_NAMES)
    labels = np.repeat(np.arange(nb_classes), nodes_per_class)
    texts = [_node_text(rng, int(label)) for label in labels]

    rows, cols = np.triu_indices(len(labels), k=1)
    same = labels[rows] == labels[cols]
    draws = rng.random(len(rows))
    keep = np.where(same, draws < p_in, draws < p_out)
    edges = np.stack([rows[keep], cols[keep]], axis=1)
    return TextAttributedGraph(texts, labels.tolist(), edges, nb_classes,
                               CLASS_NAMES)


def synth_benchmark(seed=0, split_spec=None):
    """Build the synthetic benchmark.

    Args:
        seed (int): Seed of the graph (and of the split when split_spec is
            not given).
        split_spec (SplitSpec): Default holds out class 3 with the default
            fractions.

    Returns:
        SyntheticBenchmark

    """
    graph = synthetic_graph(seed)
    if split_spec is None:
        split_spec = SplitSpec(ood_classes=[OOD_CLASS], seed=seed)
    split = build_split(graph, split_spec)
    nb_classes = len(CLASS_NAMES)
    pairs_in = nb_classes * NODES_PER_CLASS * (NODES_PER_CLASS - 1) / 2
    pairs_out = (nb_classes * NODES_PER_CLASS) * \
        (nb_classes * NODES_PER_CLASS - 1) / 2 - pairs_in
    expected = {'node_count': nb_classes * NODES_PER_CLASS,
                'ood_test': NODES_PER_CLASS,
                'intra_edges': P_IN * pairs_in,
                'inter_edges': P_OUT * pairs_out}
    return SyntheticBenchmark(graph, split, expected)


def synth_config(data=None):
    """ExperimentConfig of the synthetic benchmark runs.

    Args:
        data (dict): Config tables overriding the benchmark settings, as read
            from a config file.

    Returns:
        ExperimentConfig

    """
    return ExperimentConfig.from_dict(merge_tables(SYNTH_CONFIG, data))


def merge_tables(defaults, data=None):
    """Config tables of data laid over defaults, key by key."""
    merged = {name: dict(table) for name, table in defaults.items()}
    for name, table in (data or {}).items():
        if isinstance(table, dict) and name in merged:
            merged[name].update(table)
        else:
            merged[name] = table
    return merged
