"""
File: metrics.py
Description: OOD detection and IND classification metrics.

Scores are energies, higher meaning more OOD. AUROC and AUPR treat OOD as
the positive class; FPR95 fixes its operating point by the IND acceptance
rate (the detector threshold), and reports the OOD fraction accepted.
"""

import numpy as np
from scipy.stats import rankdata
from sklearn.metrics import average_precision_score

from .energy import calibrate_tau


class ScoredSet(object):
    """Scores with their ground truth.

    Args:
        scores (np.ndarray): One score per node, higher is more OOD.
        is_ood (np.ndarray): Parallel booleans.

    """
    def __init__(self, scores, is_ood):
        self.scores = np.asarray(scores, np.float64).reshape(-1)
        self.is_ood = np.asarray(is_ood, bool).reshape(-1)
        if self.scores.shape != self.is_ood.shape:
            raise ValueError("{:d} scores for {:d} labels".format(
                len(self.scores), len(self.is_ood)))

    @classmethod
    def from_groups(cls, ind_scores, ood_scores):
        ind_scores = np.asarray(ind_scores, np.float64).reshape(-1)
        ood_scores = np.asarray(ood_scores, np.float64).reshape(-1)
        return cls(np.concatenate([ind_scores, ood_scores]),
                   np.concatenate([np.zeros(len(ind_scores), bool),
                                   np.ones(len(ood_scores), bool)]))

    @property
    def ind_scores(self):
        return self.scores[~self.is_ood]

    @property
    def ood_scores(self):
        return self.scores[self.is_ood]

    def check_both_classes(self):
        nb_ood = int(np.sum(self.is_ood))
        if nb_ood == 0 or nb_ood == len(self.is_ood):
            raise ValueError("the scored set needs both IND and OOD nodes")


def auroc(scored):
    """Area under the ROC curve, OOD positive.

    Mann-Whitney statistic computed from the rank sum of the OOD scores,
    ties taking their mid rank: P(ood > ind) + 0.5 P(ood == ind).
    """
    scored.check_both_classes()
    ranks = rankdata(scored.scores, method='average')
    nb_ood = int(np.sum(scored.is_ood))
    nb_ind = len(scored.scores) - nb_ood
    rank_sum = np.sum(ranks[scored.is_ood])
    return float((rank_sum - nb_ood * (nb_ood + 1) / 2.0) / (nb_ood * nb_ind))


def aupr(scored):
    """Area under the precision-recall curve, OOD positive.

    Step-wise sum over the distinct thresholds taken in decreasing order,
    tied scores forming a single threshold.
    """
    scored.check_both_classes()
    return float(average_precision_score(scored.is_ood, scored.scores))


def fpr_at_tpr(scored, tpr=0.95):
    """Fraction of OOD nodes accepted as IND at the threshold accepting
    `tpr` of the IND nodes."""
    scored.check_both_classes()
    tau = calibrate_tau(scored.ind_scores, tpr)
    return float(np.mean(scored.ood_scores <= tau))


def ind_accuracy(logits, labels):
    """Fraction of nodes whose argmax logit is their label (ties go to the
    lowest class id)."""
    logits = np.asarray(logits, np.float64)
    labels = np.asarray(labels, np.int64).reshape(-1)
    if len(labels) == 0:
        raise ValueError("accuracy of an empty set")
    return float(np.mean(np.argmax(logits, axis=1) == labels))
