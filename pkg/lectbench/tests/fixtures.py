import pytest
import numpy as np
import scipy.sparse as sp

from ..common import TextAttributedGraph, build_split, normalized_adjacency
from ..default.benchmarks.synthetic import synthetic_graph
from ..models.parameters import ExperimentConfig, ModelConfig, SplitSpec
from ..models.net import init_params
from ..utils import stage_rng

TEN_LABELS = [0, 0, 0, 1, 1, 1, 2, 2, 2, 2]
TEN_EDGES = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8),
             (8, 9), (0, 2), (3, 5)]
CLASS_NAMES = ['Neural Networks', 'Theory', 'Genetic Algorithms']

SMALL_NODES_PER_CLASS = 20
SMALL_P_IN = 0.3
SMALL_P_OUT = 0.02

TOY_NODES = 6
TOY_CLASSES = 2
TOY_IN_DIM = 5

ENCODER_DIM = 32
NB_EPOCHS = 6


class FakeResponse(object):
    def __init__(self, status_code=200, payload=None, text=None):
        self.status_code = status_code
        self._payload = payload
        self.text = text if text is not None else str(payload)

    def json(self):
        if self._payload is None:
            raise ValueError("no JSON")
        return self._payload


class FakeSession(object):
    """Stand-in for requests.Session answering with a function of the
    payload."""
    def __init__(self, answer):
        self.answer = answer
        self.payloads = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.payloads.append(json)
        return self.answer(json)

    def close(self):
        pass


def embeddings_answer(dim):
    def answer(payload):
        data = [{'embedding': [float(len(text))] + [0.0] * (dim - 1)}
                for text in payload['input']]
        return FakeResponse(200, {'data': data})
    return answer


def chat_answer(contents):
    """Answers cycling through the given contents."""
    state = {'calls': 0}

    def answer(payload):
        content = contents[state['calls'] % len(contents)]
        state['calls'] += 1
        return FakeResponse(200, {'choices': [{'message': {'content':
                                                           content}}]})
    return answer


@pytest.fixture
def ten_node_graph():
    texts = ['node {:d} about topic {:d}'.format(i, label)
             for i, label in enumerate(TEN_LABELS)]
    return TextAttributedGraph(texts, TEN_LABELS, TEN_EDGES, 3, CLASS_NAMES)


@pytest.fixture
def ten_node_split(ten_node_graph):
    return build_split(ten_node_graph, SplitSpec(ood_classes=[2],
                                                 train_fraction=0.5,
                                                 val_fraction=0.25, seed=7))


@pytest.fixture
def small_graph():
    return synthetic_graph(3, nodes_per_class=SMALL_NODES_PER_CLASS,
                           p_in=SMALL_P_IN, p_out=SMALL_P_OUT)


@pytest.fixture
def small_split(small_graph):
    return build_split(small_graph, SplitSpec(ood_classes=[3], seed=3))


@pytest.fixture
def small_config():
    return ExperimentConfig(
        encoder={'dim': ENCODER_DIM},
        model={'proj_dim': 16, 'hidden_dim': 8, 'seed': 11},
        oodgen={'num_pseudo': 8, 'seed': 11},
        train={'epochs': NB_EPOCHS, 'log_every': 2, 'num_pairs': 20,
               'num_triplets': 10, 'seeds': [0, 1]})


@pytest.fixture
def toy_adjacency():
    edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (1, 4)]
    graph = TextAttributedGraph([''] * TOY_NODES, [0, 1, 0, 1, 0, 1], edges,
                                TOY_CLASSES)
    return normalized_adjacency(graph)


@pytest.fixture
def toy_embeddings():
    return stage_rng(5, 'toy_embeddings').normal(size=(TOY_NODES, TOY_IN_DIM))


@pytest.fixture
def toy_model_config():
    return ModelConfig(in_dim=TOY_IN_DIM, proj_dim=4, hidden_dim=3,
                       out_dim=TOY_CLASSES, dropout=0.0, seed=2)


@pytest.fixture
def toy_params(toy_model_config):
    params = init_params(toy_model_config, stage_rng(2, 'init'))
    rng = stage_rng(2, 'perturb')
    # Non-trivial biases and batch-norm affine parameters.
    params.b_proj = rng.normal(size=params.b_proj.shape)
    params.b1 = rng.normal(size=params.b1.shape)
    params.bn_gamma = 1.0 + 0.3 * rng.normal(size=params.bn_gamma.shape)
    params.bn_beta = 0.5 + 0.1 * rng.normal(size=params.bn_beta.shape)
    params.b2 = rng.normal(size=params.b2.shape)
    return params


@pytest.fixture
def dense_identity():
    return sp.csr_matrix(np.eye(1))
