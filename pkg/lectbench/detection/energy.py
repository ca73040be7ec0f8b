"""
File: energy.py
Description: Energy scores of nodes and the thresholded IND / OOD decision.

The energy of a node with logits z is E = -log(sum_c exp(z_c)). In-
distribution nodes have lower energies; a node is accepted as IND when its
energy is lower or equal to the threshold tau.
"""

import math

import numpy as np
from scipy.special import logsumexp, softmax

IND = 0
OOD = 1


def energy(logits):
    """Energy of one node.

    Args:
        logits (np.ndarray): Vector of C >= 1 finite logits.

    Returns:
        float

    Raises:
        ValueError: on empty logits.

    """
    logits = np.asarray(logits, np.float64).reshape(-1)
    if logits.size == 0:
        raise ValueError("energy of empty logits")
    return float(-logsumexp(logits))


def energies(logits):
    """Energy of every row of a logits matrix."""
    logits = np.asarray(logits, np.float64)
    if logits.ndim != 2 or logits.shape[1] == 0:
        raise ValueError("logits must be a non-empty (n, C) matrix")
    return -logsumexp(logits, axis=1)


def energy_grad(logits):
    """Jacobian-vector form of the energy: dE_i/dz_i = -softmax(z_i)."""
    return -softmax(np.asarray(logits, np.float64), axis=1)


def calibrate_tau(ind_val_energies, target_tpr=0.95):
    """Smallest energy accepting at least target_tpr of the IND validation
    nodes (empirical quantile, no interpolation).

    Raises:
        ValueError: on an empty input or a target outside (0, 1].

    """
    values = np.sort(np.asarray(ind_val_energies, np.float64).reshape(-1))
    if values.size == 0:
        raise ValueError("cannot calibrate a threshold without energies")
    if not 0.0 < target_tpr <= 1.0:
        raise ValueError("target_tpr must lie in (0, 1]")
    # k-th smallest with k / n >= target_tpr; the small tolerance absorbs the
    # rounding of products such as 0.9 * 10.
    k = int(math.ceil(target_tpr * values.size - 1e-9))
    return float(values[max(k, 1) - 1])


class Detector(object):
    """Energy threshold detector.

    Args:
        tau (float): Threshold, energies <= tau are IND.

    """
    def __init__(self, tau):
        self.tau = float(tau)

    @classmethod
    def calibrated(cls, ind_val_energies, target_tpr=0.95):
        return cls(calibrate_tau(ind_val_energies, target_tpr))

    def detect(self, energy_values):
        return detect(energy_values, self)

    def __repr__(self):
        return 'Detector(tau={!r})'.format(self.tau)


def detect(energy_values, detector):
    """Per-node decision, IND (0) iff energy <= tau, else OOD (1)."""
    energy_values = np.asarray(energy_values, np.float64)
    return np.where(energy_values <= detector.tau, IND, OOD)


def decision_name(decision):
    return 'IND' if decision == IND else 'OOD'
