import pytest
import numpy as np
import scipy.sparse as sp

from .fixtures import *
from ..common import DimensionMismatchError, NonFiniteError
from ..models.net import TRAINABLE, ModelParams, backward, forward, init_params
from ..models.parameters import ModelConfig
from ..utils import stage_rng

FD_STEP = 1e-6
FD_TOLERANCE = 1e-4


def zero_params(cfg):
    params = init_params(cfg, stage_rng(0, 'init'))
    for name in ('w_proj', 'w1', 'w2'):
        setattr(params, name, np.zeros_like(getattr(params, name)))
    return params


def objective(params, embeddings, adj, upstream):
    z, trace = forward(params, embeddings, adj, mode='train', dropout=0.0)
    return float(np.sum(z * upstream)), trace


def test_init_params(toy_model_config):
    params = init_params(toy_model_config, stage_rng(2, 'init'))
    assert params.w_proj.shape == (TOY_IN_DIM, 4)
    assert params.w1.shape == (4, 3)
    assert params.w2.shape == (3, TOY_CLASSES)
    assert np.all(params.bn_gamma == 1.0) and np.all(params.bn_running_var == 1.0)
    limit = np.sqrt(6.0 / (TOY_IN_DIM + 4))
    assert np.all(np.abs(params.w_proj) <= limit)
    assert params == init_params(toy_model_config, stage_rng(2, 'init'))
    assert params.in_dim == TOY_IN_DIM and params.out_dim == TOY_CLASSES
    with pytest.raises(KeyError):
        ModelParams({'w_proj': params.w_proj})


def test_bias_identity(toy_model_config, toy_adjacency):
    params = zero_params(toy_model_config)
    params.b2 = np.array([0.25, -1.5])
    z, _ = forward(params, np.zeros((TOY_NODES, TOY_IN_DIM)), toy_adjacency)
    assert np.array_equal(z, np.tile(params.b2, (TOY_NODES, 1)))


def test_eval_determinism(toy_params, toy_embeddings, toy_adjacency):
    first, _ = forward(toy_params, toy_embeddings, toy_adjacency, mode='eval')
    second, _ = forward(toy_params, toy_embeddings, toy_adjacency, mode='eval')
    assert np.array_equal(first, second)


def test_single_node_chain(dense_identity):
    cfg = ModelConfig(in_dim=1, proj_dim=1, hidden_dim=1, out_dim=1)
    params = ModelParams({'w_proj': [[2.0]], 'b_proj': [0.5], 'w1': [[1.5]], 'b1': [-1.0],
                          'bn_gamma': [0.8], 'bn_beta': [0.1], 'w2': [[-3.0]], 'b2': [0.4],
                          'bn_running_mean': [0.2], 'bn_running_var': [4.0]})
    assert params.in_dim == cfg.in_dim
    x = 1.25
    hp = x * 2.0 + 0.5
    u = hp * 1.5 - 1.0
    y = 0.8 * (u - 0.2) / np.sqrt(4.0 + 1e-5) + 0.1
    expected = max(y, 0.0) * -3.0 + 0.4
    z, _ = forward(params, np.array([[x]]), dense_identity, mode='eval')
    assert z.shape == (1, 1)
    assert z[0, 0] == pytest.approx(expected, abs=1e-12)


def test_train_mode_running_stats(toy_params, toy_embeddings, toy_adjacency):
    _, trace = forward(toy_params, toy_embeddings, toy_adjacency, mode='train',
                       rng=stage_rng(0, 'dropout'), dropout=0.5)
    u = trace.ah @ toy_params.w1 + toy_params.b1
    expected_mean = 0.9 * toy_params.bn_running_mean + 0.1 * u.mean(axis=0)
    assert np.allclose(trace.running_mean, expected_mean)
    assert np.allclose(trace.running_var,
                       0.9 * toy_params.bn_running_var + 0.1 * u.var(axis=0, ddof=1))
    assert set(np.unique(trace.mask)) <= {0.0, 2.0}


def test_forward_errors(toy_params, toy_embeddings, toy_adjacency):
    with pytest.raises(DimensionMismatchError):
        forward(toy_params, toy_embeddings[:, :3], toy_adjacency)
    with pytest.raises(DimensionMismatchError):
        forward(toy_params, toy_embeddings[:4], toy_adjacency)
    with pytest.raises(ValueError):
        forward(toy_params, toy_embeddings, toy_adjacency, mode='train', dropout=0.5)
    with pytest.raises(ValueError):
        forward(toy_params, toy_embeddings, toy_adjacency, mode='predict')

    broken = toy_embeddings.copy()
    broken[2, 1] = np.inf
    with pytest.raises(NonFiniteError) as e:
        forward(toy_params, broken, toy_adjacency)
    assert e.value.component == 'projector'

    params = toy_params.copy()
    params.bn_running_var = -np.ones_like(params.bn_running_var)
    with pytest.raises(NonFiniteError) as e:
        forward(params, toy_embeddings, toy_adjacency)
    assert e.value.component == 'batchnorm'


def test_backward_requires_train_trace(toy_params, toy_embeddings, toy_adjacency):
    z, trace = forward(toy_params, toy_embeddings, toy_adjacency, mode='eval')
    with pytest.raises(ValueError):
        backward(trace, np.ones_like(z))


def test_backward_stale_trace(toy_params, toy_embeddings, toy_adjacency):
    params = toy_params.copy()
    z, trace = forward(params, toy_embeddings, toy_adjacency, mode='train', dropout=0.0)
    params.version += 1
    with pytest.raises(ValueError):
        backward(trace, np.ones_like(z))


def test_backward_linearity(toy_params, toy_embeddings, toy_adjacency):
    z, trace = forward(toy_params, toy_embeddings, toy_adjacency, mode='train', dropout=0.0)
    zero = backward(trace, np.zeros_like(z))
    assert sorted(zero) == sorted(TRAINABLE)
    for name, grad in zero.items():
        assert grad.shape == getattr(toy_params, name).shape
        assert np.all(grad == 0.0)

    upstream = stage_rng(1, 'upstream').normal(size=z.shape)
    single = backward(trace, upstream)
    double = backward(trace, 2.0 * upstream)
    for name in TRAINABLE:
        assert np.allclose(double[name], 2.0 * single[name], rtol=1e-12, atol=1e-14)


def test_gradient_check(toy_params, toy_embeddings, toy_adjacency):
    upstream = stage_rng(3, 'upstream').normal(size=(TOY_NODES, TOY_CLASSES))
    _, trace = objective(toy_params, toy_embeddings, toy_adjacency, upstream)
    grads = backward(trace, upstream)

    for name in TRAINABLE:
        numeric = np.zeros_like(getattr(toy_params, name))
        for index in np.ndindex(numeric.shape):
            shifted = []
            for step in (FD_STEP, -FD_STEP):
                params = toy_params.copy()
                getattr(params, name)[index] += step
                shifted.append(objective(params, toy_embeddings, toy_adjacency, upstream)[0])
            numeric[index] = (shifted[0] - shifted[1]) / (2 * FD_STEP)
        # b1 is cancelled by the batch statistics, its gradient is zero.
        scale = max(np.linalg.norm(numeric) + np.linalg.norm(grads[name]), 1e-3)
        assert np.linalg.norm(numeric - grads[name]) / scale < FD_TOLERANCE, name


def test_gradient_check_with_dropout(toy_params, toy_embeddings, toy_adjacency):
    upstream = stage_rng(4, 'upstream').normal(size=(TOY_NODES, TOY_CLASSES))

    def loss(params):
        z, trace = forward(params, toy_embeddings, toy_adjacency, mode='train',
                           rng=stage_rng(8, 'dropout'), dropout=0.3)
        return float(np.sum(z * upstream)), trace

    _, trace = loss(toy_params)
    grads = backward(trace, upstream)
    numeric = np.zeros_like(toy_params.w1)
    for index in np.ndindex(numeric.shape):
        params = toy_params.copy()
        params.w1[index] += FD_STEP
        plus = loss(params)[0]
        params.w1[index] -= 2 * FD_STEP
        numeric[index] = (plus - loss(params)[0]) / (2 * FD_STEP)
    scale = np.linalg.norm(numeric) + np.linalg.norm(grads['w1'])
    assert np.linalg.norm(numeric - grads['w1']) / scale < FD_TOLERANCE


def test_sparse_formats_agree(toy_params, toy_embeddings, toy_adjacency):
    csr, _ = forward(toy_params, toy_embeddings, toy_adjacency)
    coo, _ = forward(toy_params, toy_embeddings, sp.coo_matrix(toy_adjacency).tocsr())
    assert np.allclose(csr, coo, rtol=0, atol=1e-14)
