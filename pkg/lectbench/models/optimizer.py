"""
File: optimizer.py
Description: Adam with bias correction and coupled weight decay (the decay
is added to the gradients).
"""

import numpy as np

from ..common.errors import NonFiniteError
from .net import ModelParams, TRAINABLE


class AdamState(object):
    """First and second moment estimates of every trainable parameter.

    Attributes:
        step (int): Number of steps taken.
        m (dict): First moments.
        v (dict): Second moments.

    """
    def __init__(self, m, v, step=0):
        self.m = m
        self.v = v
        self.step = step

    @classmethod
    def zeros_like(cls, params):
        return cls({name: np.zeros_like(value) for name, value in
                    params.trainable().items()},
                   {name: np.zeros_like(value) for name, value in
                    params.trainable().items()})

    def copy(self):
        return AdamState({k: v.copy() for k, v in self.m.items()},
                         {k: v.copy() for k, v in self.v.items()},
                         self.step)


def adam_step(params, grads, state, lr=0.001, weight_decay=0.0005,
              betas=(0.9, 0.999), eps=1e-8):
    """One Adam update.

    Args:
        params (ModelParams): Current parameters, left untouched.
        grads (dict): Gradient of every trainable parameter.
        state (AdamState): Current moments, left untouched.
        lr (float): Learning rate.
        weight_decay (float): Coupled L2 coefficient.
        betas (tuple): Moment decay rates.
        eps (float): Denominator offset.

    Returns:
        tuple: (ModelParams, AdamState), the updated copies. The batch-norm
            running statistics are carried over unchanged.

    Raises:
        NonFiniteError: on a non-finite gradient.
        ValueError: if the state does not match the parameters.

    """
    beta1, beta2 = betas
    step = state.step + 1
    arrays = params.as_arrays()
    new_arrays = dict(arrays)
    new_m, new_v = {}, {}
    for name in TRAINABLE:
        value = arrays[name]
        grad = np.asarray(grads[name], np.float64)
        if not np.all(np.isfinite(grad)):
            raise NonFiniteError('gradient of {}'.format(name))
        if state.m[name].shape != value.shape or grad.shape != value.shape:
            raise ValueError("shape mismatch for the parameter {}".format(name))
        if weight_decay:
            grad = grad + weight_decay * value
        m = beta1 * state.m[name] + (1 - beta1) * grad
        v = beta2 * state.v[name] + (1 - beta2) * grad * grad
        m_hat = m / (1 - beta1 ** step)
        v_hat = v / (1 - beta2 ** step)
        new_arrays[name] = value - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[name] = m
        new_v[name] = v
    return (ModelParams(new_arrays, params.version + 1),
            AdamState(new_m, new_v, step))
