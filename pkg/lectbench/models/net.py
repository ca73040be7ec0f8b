"""
File: net.py
Description: Projector followed by a two-layer graph convolution, with batch
normalization and dropout between the layers:

    H' = H Wp + bp
    U  = A H' W1 + b1
    R  = dropout(relu(batchnorm(U)))
    Z  = A R W2 + b2

Forward keeps every activation needed by the exact reverse pass in a
ForwardTrace. Everything is computed in float64.
"""

import numpy as np

from ..common.errors import DimensionMismatchError, NonFiniteError
from ..utils.decorators import requires_mode

TRAINABLE = ('w_proj', 'b_proj', 'w1', 'b1', 'bn_gamma', 'bn_beta', 'w2',
             'b2')
RUNNING = ('bn_running_mean', 'bn_running_var')


class ModelParams(object):
    """Trainable weights and batch-norm running statistics.

    Attributes:
        w_proj, b_proj: projector, (in_dim, proj_dim) and (proj_dim,).
        w1, b1: first convolution, (proj_dim, hidden_dim) and (hidden_dim,).
        bn_gamma, bn_beta: batch-norm affine parameters, (hidden_dim,).
        w2, b2: second convolution, (hidden_dim, out_dim) and (out_dim,).
        bn_running_mean, bn_running_var: running statistics, (hidden_dim,).
        version (int): Bumped by every optimizer step.

    """
    def __init__(self, arrays, version=0):
        missing = [name for name in TRAINABLE + RUNNING if name not in arrays]
        if missing:
            raise KeyError("Missing parameters {}".format(missing))
        for name in TRAINABLE + RUNNING:
            setattr(self, name, np.array(arrays[name], np.float64))
        self.version = version

    @property
    def in_dim(self):
        return self.w_proj.shape[0]

    @property
    def out_dim(self):
        return self.w2.shape[1]

    def trainable(self):
        return {name: getattr(self, name) for name in TRAINABLE}

    def as_arrays(self):
        return {name: getattr(self, name) for name in TRAINABLE + RUNNING}

    def copy(self):
        return ModelParams({name: value.copy() for name, value in
                            self.as_arrays().items()}, self.version)

    def all_finite(self):
        return all(np.all(np.isfinite(value))
                   for value in self.as_arrays().values())

    def __eq__(self, other):
        return (isinstance(other, ModelParams) and
                all(np.array_equal(getattr(self, name), getattr(other, name))
                    for name in TRAINABLE + RUNNING))


def glorot_uniform(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_params(cfg, rng):
    """Glorot-uniform weights, zero biases, identity batch norm.

    Args:
        cfg (ModelConfig): Dimensions.
        rng (np.random.Generator): Initialisation stream.

    """
    return ModelParams({
        'w_proj': glorot_uniform(rng, cfg.in_dim, cfg.proj_dim),
        'b_proj': np.zeros(cfg.proj_dim),
        'w1': glorot_uniform(rng, cfg.proj_dim, cfg.hidden_dim),
        'b1': np.zeros(cfg.hidden_dim),
        'bn_gamma': np.ones(cfg.hidden_dim),
        'bn_beta': np.zeros(cfg.hidden_dim),
        'w2': glorot_uniform(rng, cfg.hidden_dim, cfg.out_dim),
        'b2': np.zeros(cfg.out_dim),
        'bn_running_mean': np.zeros(cfg.hidden_dim),
        'bn_running_var': np.ones(cfg.hidden_dim),
    })


class ForwardTrace(object):
    """Activations of one forward pass.

    Attributes:
        mode (str): 'train' or 'eval'.
        version (int): Version of the parameters used.
        running_mean, running_var (np.ndarray): Running statistics updated
            with this pass's batch statistics (train mode), for the trainer
            to commit; None in eval mode.

    """
    def __init__(self, mode, version, **activations):
        self.mode = mode
        self.version = version
        self.running_mean = None
        self.running_var = None
        for name, value in activations.items():
            setattr(self, name, value)


def _check_finite(value, layer):
    if not np.all(np.isfinite(value)):
        raise NonFiniteError(layer)


def forward(params, embeddings, adj, mode='eval', rng=None, dropout=0.5,
            bn_momentum=0.1, bn_eps=1e-5):
    """Logits of every node.

    Train mode normalizes with the batch statistics over all nodes and
    applies inverted dropout; eval mode uses the running statistics and no
    dropout, and is a deterministic function of its inputs.

    Args:
        params (ModelParams): The weights.
        embeddings (np.ndarray): (n, in_dim) frozen text embeddings.
        adj (scipy.sparse matrix): (n, n) normalized adjacency.
        mode (str): 'train' or 'eval'.
        rng (np.random.Generator): Dropout stream, required in train mode.
        dropout (float): Dropout rate in [0, 1).
        bn_momentum (float): Weight of the batch statistics in the running
            ones.
        bn_eps (float): Batch-norm epsilon.

    Returns:
        tuple: (np.ndarray (n, out_dim) logits, ForwardTrace).

    Raises:
        DimensionMismatchError: on inconsistent shapes.
        NonFiniteError: naming the first layer producing a non-finite value.

    """
    if mode not in ('train', 'eval'):
        raise ValueError("Unknown forward mode {}".format(mode))
    if mode == 'train' and rng is None and dropout > 0:
        raise ValueError("A train-mode forward needs a random generator")
    h = np.asarray(embeddings, np.float64)
    if h.ndim != 2 or h.shape[1] != params.in_dim:
        raise DimensionMismatchError("embeddings of shape {} for an input "
                                     "dimension {:d}".format(h.shape,
                                                             params.in_dim))
    if adj.shape != (h.shape[0], h.shape[0]):
        raise DimensionMismatchError("adjacency of shape {} for {:d} "
                                     "nodes".format(adj.shape, h.shape[0]))

    hp = h @ params.w_proj + params.b_proj
    _check_finite(hp, 'projector')
    ah = adj @ hp
    u = ah @ params.w1 + params.b1
    _check_finite(u, 'conv1')

    if mode == 'train':
        n = u.shape[0]
        mean = u.mean(axis=0)
        var = u.var(axis=0)
        unbiased = var * n / (n - 1) if n > 1 else var
        running_mean = (1 - bn_momentum) * params.bn_running_mean + \
            bn_momentum * mean
        running_var = (1 - bn_momentum) * params.bn_running_var + \
            bn_momentum * unbiased
    else:
        mean = params.bn_running_mean
        var = params.bn_running_var
    inv_std = 1.0 / np.sqrt(var + bn_eps)
    xhat = (u - mean) * inv_std
    y = params.bn_gamma * xhat + params.bn_beta
    _check_finite(y, 'batchnorm')
    r = np.maximum(y, 0.0)

    if mode == 'train' and dropout > 0:
        mask = (rng.random(r.shape) >= dropout) / (1.0 - dropout)
    else:
        mask = None
    d = r * mask if mask is not None else r

    ad = adj @ d
    z = ad @ params.w2 + params.b2
    _check_finite(z, 'conv2')

    trace = ForwardTrace(mode, params.version, h=h, adj=adj, ah=ah,
                         xhat=xhat, inv_std=inv_std, y=y, mask=mask, ad=ad,
                         params=params)
    if mode == 'train':
        trace.running_mean = running_mean
        trace.running_var = running_var
    return z, trace


@requires_mode('train')
def backward(trace, grad_logits):
    """Gradients of a scalar objective with respect to the trainable
    parameters, given its gradient with respect to the logits.

    Batch normalization is differentiated through the batch statistics, and
    dropout through the mask that was drawn.

    Args:
        trace (ForwardTrace): From a train-mode forward.
        grad_logits (np.ndarray): (n, out_dim).

    Returns:
        dict: parameter name -> gradient, for every trainable parameter.

    Raises:
        ValueError: if the parameters changed since the forward pass or the
            gradient shape is wrong.

    """
    params = trace.params
    if params.version != trace.version:
        raise ValueError("The trace was recorded with parameters version "
                         "{:d}, they are now at {:d}".format(trace.version,
                                                             params.version))
    dz = np.asarray(grad_logits, np.float64)
    if dz.shape != (trace.h.shape[0], params.out_dim):
        raise DimensionMismatchError("logits gradient of shape {}".format(
            dz.shape))
    adj_t = trace.adj.T
    grads = {}

    grads['w2'] = trace.ad.T @ dz
    grads['b2'] = dz.sum(axis=0)
    dd = adj_t @ (dz @ params.w2.T)
    dr = dd * trace.mask if trace.mask is not None else dd
    dy = dr * (trace.y > 0)

    xhat = trace.xhat
    grads['bn_gamma'] = np.sum(dy * xhat, axis=0)
    grads['bn_beta'] = dy.sum(axis=0)
    dxhat = dy * params.bn_gamma
    n = dxhat.shape[0]
    du = trace.inv_std / n * (n * dxhat - dxhat.sum(axis=0) -
                              xhat * np.sum(dxhat * xhat, axis=0))

    grads['w1'] = trace.ah.T @ du
    grads['b1'] = du.sum(axis=0)
    dhp = adj_t @ (du @ params.w1.T)
    grads['w_proj'] = trace.h.T @ dhp
    grads['b_proj'] = dhp.sum(axis=0)
    return grads
