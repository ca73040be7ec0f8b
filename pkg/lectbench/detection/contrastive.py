"""
File: contrastive.py
Description: Sampling of the contrastive pairs and the terms of the training
objective.

Every loss returns its value and its gradient. Hinge and absolute value
subgradients are taken as 0 at their kinks.
"""

import numpy as np
from scipy.special import log_softmax, softmax

from ..common.errors import NonFiniteError
from ..utils.decorators import finite_result

LOSS_COMPONENTS = ('l_sup', 'l_pairs', 'l_mean', 'l_triplet')


def train_ind_edges(graph, split):
    """Edges of the source graph joining two training IND nodes."""
    if not len(graph.edges):
        return np.zeros((0, 2), np.int64)
    in_train = np.zeros(graph.node_count, bool)
    in_train[split.train_idx] = True
    keep = in_train[graph.edges[:, 0]] & in_train[graph.edges[:, 1]]
    return graph.edges[keep]


def sample_linked_pairs(pseudo_edges, count, rng):
    """Draw linked IND-OOD pairs uniformly without replacement from the
    pseudo edges.

    Args:
        pseudo_edges (np.ndarray): (ind_node, pseudo_node) rows.
        count (int): Pairs wanted, capped at the number of pseudo edges.
        rng (np.random.Generator): Stream of the epoch.

    Returns:
        np.ndarray: of shape (k, 2), k = min(count, len(pseudo_edges)).

    Raises:
        ValueError: if there is no pseudo edge.

    """
    pseudo_edges = np.asarray(pseudo_edges, np.int64).reshape(-1, 2)
    if len(pseudo_edges) == 0:
        raise ValueError("no pseudo edges")
    size = min(int(count), len(pseudo_edges))
    return pseudo_edges[rng.choice(len(pseudo_edges), size=size,
                                   replace=False)]


def _neighbor_table(ind_edges):
    table = {}
    for a, b in np.asarray(ind_edges, np.int64).reshape(-1, 2):
        table.setdefault(int(a), []).append(int(b))
        table.setdefault(int(b), []).append(int(a))
    return {node: sorted(set(neighbors)) for node, neighbors in table.items()}


def sample_triplets(ind_edges, pseudo_edges, count, rng):
    """Draw distinct (v_i, v_c, v_j) triplets.

    A pseudo edge (v_c, v_j) is drawn uniformly among the edges whose center
    v_c has an IND training neighbor, then v_i uniformly among those
    neighbors. Duplicated triplets are redrawn. When count reaches the
    number of possible triplets, all of them are returned.

    Args:
        ind_edges (np.ndarray): Edges between training IND nodes.
        pseudo_edges (np.ndarray): (ind_node, pseudo_node) rows.
        count (int): Triplets wanted.
        rng (np.random.Generator): Stream of the epoch.

    Returns:
        np.ndarray: of shape (k, 3), rows (v_i, v_c, v_j).

    Raises:
        ValueError: if no center has both an IND training neighbor and a
            pseudo neighbor.

    """
    neighbors = _neighbor_table(ind_edges)
    pseudo_edges = np.asarray(pseudo_edges, np.int64).reshape(-1, 2)
    eligible = [(int(c), int(j)) for c, j in pseudo_edges
                if int(c) in neighbors]
    if not eligible:
        raise ValueError("no eligible triplet center")

    total = sum(len(neighbors[c]) for c, _ in eligible)
    if count >= total:
        triplets = [(i, c, j) for c, j in eligible for i in neighbors[c]]
        return np.asarray(triplets, np.int64).reshape(-1, 3)

    chosen = []
    seen = set()
    while len(chosen) < count:
        c, j = eligible[int(rng.integers(len(eligible)))]
        i = neighbors[c][int(rng.integers(len(neighbors[c])))]
        if (i, c, j) not in seen:
            seen.add((i, c, j))
            chosen.append((i, c, j))
    return np.asarray(chosen, np.int64).reshape(-1, 3)


def _check_indexes(indexes, nb_energies):
    if indexes.size and (indexes.min() < 0 or indexes.max() >= nb_energies):
        raise IndexError("a sampled node has no energy")


@finite_result('l_pairs')
def loss_ind_ood(pairs, energies, gamma):
    """Mean over pairs of max(0, gamma - (E_ood - E_ind)).

    Args:
        pairs (np.ndarray): (ind_node, pseudo_node) rows.
        energies (np.ndarray): Energies of every node.
        gamma (float): Margin.

    Returns:
        tuple: (float, np.ndarray gradient with respect to energies).

    """
    energies = np.asarray(energies, np.float64)
    pairs = np.asarray(pairs, np.int64).reshape(-1, 2)
    grad = np.zeros_like(energies)
    if len(pairs) == 0:
        return 0.0, grad
    _check_indexes(pairs, len(energies))

    ind, ood = pairs[:, 0], pairs[:, 1]
    margins = gamma - (energies[ood] - energies[ind])
    active = (margins > 0).astype(np.float64) / len(pairs)
    np.add.at(grad, ind, active)
    np.add.at(grad, ood, -active)
    return float(np.mean(np.maximum(margins, 0.0))), grad


@finite_result('l_mean')
def loss_mean_constraint(ind_energies, ood_energies, gamma_mean):
    """max(0, gamma_mean - (mean(E_ood) - mean(E_ind))).

    Returns:
        tuple: (float, gradient on ind_energies, gradient on ood_energies).
            An empty set makes the term vanish.

    """
    ind_energies = np.asarray(ind_energies, np.float64)
    ood_energies = np.asarray(ood_energies, np.float64)
    grad_ind = np.zeros_like(ind_energies)
    grad_ood = np.zeros_like(ood_energies)
    if ind_energies.size == 0 or ood_energies.size == 0:
        return 0.0, grad_ind, grad_ood

    margin = gamma_mean - (np.mean(ood_energies) - np.mean(ind_energies))
    if margin <= 0:
        return 0.0, grad_ind, grad_ood
    grad_ind[:] = 1.0 / ind_energies.size
    grad_ood[:] = -1.0 / ood_energies.size
    return float(margin), grad_ind, grad_ood


@finite_result('l_triplet')
def loss_triplet(triplets, energies):
    """Mean over triplets of max(0, |E_i - E_c| - (E_j - E_c)).

    Returns:
        tuple: (float, np.ndarray gradient with respect to energies).

    """
    energies = np.asarray(energies, np.float64)
    triplets = np.asarray(triplets, np.int64).reshape(-1, 3)
    grad = np.zeros_like(energies)
    if len(triplets) == 0:
        return 0.0, grad
    _check_indexes(triplets, len(energies))

    i, c, j = triplets[:, 0], triplets[:, 1], triplets[:, 2]
    gap = energies[i] - energies[c]
    terms = np.abs(gap) - (energies[j] - energies[c])
    active = (terms > 0).astype(np.float64) / len(triplets)
    sign = np.sign(gap)
    np.add.at(grad, i, active * sign)
    np.add.at(grad, c, active * (1.0 - sign))
    np.add.at(grad, j, -active)
    return float(np.mean(np.maximum(terms, 0.0))), grad


@finite_result('l_sup')
def loss_supervised(logits, labels):
    """Mean cross-entropy of labeled logits.

    Args:
        logits (np.ndarray): (n, C) logits of the training nodes.
        labels (np.ndarray): n labels in [0, C).

    Returns:
        tuple: (float, np.ndarray gradient with respect to logits).

    Raises:
        ValueError: on an empty set or a label out of range.

    """
    logits = np.asarray(logits, np.float64)
    labels = np.asarray(labels, np.int64).reshape(-1)
    n, nb_classes = logits.shape
    if n == 0:
        raise ValueError("no labeled node")
    if len(labels) != n:
        raise ValueError("{:d} labels for {:d} logits rows".format(len(labels),
                                                                   n))
    if labels.min() < 0 or labels.max() >= nb_classes:
        raise ValueError("label out of range [0, {:d})".format(nb_classes))

    rows = np.arange(n)
    value = -np.mean(log_softmax(logits, axis=1)[rows, labels])
    grad = softmax(logits, axis=1)
    grad[rows, labels] -= 1.0
    return float(value), grad / n


def loss_coefficients(weights):
    """Multiplier of every loss component in the total objective."""
    mean_weight = weights.lambda_mean if weights.use_mean_constraint else 0.0
    return {'l_sup': 1.0,
            'l_pairs': weights.lambda1,
            'l_mean': weights.lambda1 * mean_weight,
            'l_triplet': weights.lambda2}


def loss_total(components, weights):
    """L_sup + lambda1 * (L_pairs + lambda_mean * L_mean) + lambda2 * L_triplet.

    Args:
        components (dict): Component name ('l_sup', 'l_pairs', 'l_mean',
            'l_triplet') -> (value, gradient). Gradients share one shape;
            missing components count as 0.
        weights (LossWeights): The weights.

    Returns:
        tuple: (float, np.ndarray or None), the total and its gradient.
            Components with a zero coefficient are left out entirely.

    Raises:
        NonFiniteError: naming the first non-finite component.

    """
    for name, (value, _) in components.items():
        if name not in LOSS_COMPONENTS:
            raise KeyError("Unknown loss component {}".format(name))
        if not np.isfinite(value):
            raise NonFiniteError(name)

    total = 0.0
    grad = None
    for name, coefficient in loss_coefficients(weights).items():
        if coefficient == 0.0 or name not in components:
            continue
        value, component_grad = components[name]
        total = total + coefficient * value
        if component_grad is not None:
            scaled = coefficient * np.asarray(component_grad, np.float64)
            grad = scaled if grad is None else grad + scaled
    return total, grad
