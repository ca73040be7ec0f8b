from .energy import energy, energies, energy_grad, calibrate_tau, detect, Detector, IND, OOD
from .contrastive import (sample_linked_pairs, sample_triplets, train_ind_edges, loss_ind_ood,
                          loss_mean_constraint, loss_triplet, loss_supervised, loss_total,
                          loss_coefficients, LOSS_COMPONENTS)
from .metrics import ScoredSet, auroc, aupr, fpr_at_tpr, ind_accuracy
