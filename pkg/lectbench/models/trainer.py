"""
File: trainer.py
Description: Training loop over the graph enhanced with pseudo-OOD nodes,
and the evaluation protocol.

One epoch is one full-graph train-mode forward pass whose logits feed the
supervised loss and, through their energies, the contrastive losses; then
one reverse pass and one Adam step. The text embeddings are computed once
and never change.
"""

import csv
import json
import os

import numpy as np
from loguru import logger

from ..common.adjacency import normalized_adjacency
from ..common.split import NodeSplit
from ..common.errors import (DimensionMismatchError, DivergenceError,
                             NonFiniteError, SplitError)
from ..detection.contrastive import (LOSS_COMPONENTS, loss_ind_ood,
                                     loss_mean_constraint, loss_supervised,
                                     loss_total, loss_triplet,
                                     sample_linked_pairs, sample_triplets,
                                     train_ind_edges)
from ..detection.energy import Detector, calibrate_tau, decision_name, \
    energies, energy_grad
from ..detection.metrics import ScoredSet, aupr, auroc, fpr_at_tpr, \
    ind_accuracy
from ..encoders.text_encoder import encode_all
from ..oodgen.batch import PseudoOodBatch, augment_graph, with_texts
from ..oodgen.generators import RandomTextGenerator
from ..utils.hashing import sha256_array
from ..utils.seeding import stage_rng
from .checkpoint import Checkpoint
from .net import backward, forward, init_params
from .optimizer import AdamState, adam_step

LOSS_LOG = 'loss_log.jsonl'
FINAL_CHECKPOINT = 'final.ckpt'
LAST_CHECKPOINT = 'last.ckpt'
BEST_CHECKPOINT = 'best.ckpt'
ENERGY_DUMP = 'energies.csv'
MANIFEST = 'manifest.json'
REPORT = 'report.json'

METRICS = ('ind_acc', 'auroc', 'aupr', 'fpr95')


class EvalReport(object):
    """Metrics of a trained model, as fractions in [0, 1].

    AUROC and AUPR take OOD as the positive class; FPR95 is the fraction of
    OOD nodes accepted at the threshold accepting 95% (target_tpr) of the
    IND test nodes. The OOD metrics are None when the split has no OOD node.

    Attributes:
        ind_acc, auroc, aupr, fpr95 (float): The metrics.
        tau (float): Detector threshold, calibrated on IND validation
            energies only.
        target_tpr (float): IND acceptance rate of tau and of FPR95.
        seed (int): Root seed of the run.
        epoch (int): Epochs trained.
        config_hash (str): Hash of the experiment config.

    """
    def __init__(self, ind_acc, auroc, aupr, fpr95, tau, target_tpr, seed,
                 epoch, config_hash, nb_test_ind=0, nb_test_ood=0):
        self.ind_acc = ind_acc
        self.auroc = auroc
        self.aupr = aupr
        self.fpr95 = fpr95
        self.tau = tau
        self.target_tpr = target_tpr
        self.seed = seed
        self.epoch = epoch
        self.config_hash = config_hash
        self.nb_test_ind = nb_test_ind
        self.nb_test_ood = nb_test_ood

    @property
    def has_ood_metrics(self):
        return self.auroc is not None

    def metric(self, name):
        return getattr(self, name)

    def to_dict(self):
        return {'ind_acc': self.ind_acc, 'auroc': self.auroc,
                'aupr': self.aupr, 'fpr95': self.fpr95, 'tau': self.tau,
                'target_tpr': self.target_tpr, 'seed': self.seed,
                'epoch': self.epoch, 'config_hash': self.config_hash,
                'nb_test_ind': self.nb_test_ind,
                'nb_test_ood': self.nb_test_ood,
                'conventions': {'auroc': 'OOD positive, energy score',
                                'aupr': 'OOD positive, energy score',
                                'fpr95': 'threshold by IND true positive rate',
                                'tau': 'IND validation energies only'}}

    @classmethod
    def from_dict(cls, data):
        return cls(data['ind_acc'], data['auroc'], data['aupr'],
                   data['fpr95'], data['tau'], data['target_tpr'],
                   data['seed'], data['epoch'], data['config_hash'],
                   data.get('nb_test_ind', 0), data.get('nb_test_ood', 0))

    def save(self, path):
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write('\n')

    def __eq__(self, other):
        return isinstance(other, EvalReport) and \
            self.to_dict() == other.to_dict()

    def __repr__(self):
        def fmt(value):
            return 'n/a' if value is None else '{:.4f}'.format(value)
        return ('EvalReport(ind_acc={}, auroc={}, aupr={}, fpr95={}, '
                'tau={:.4f})'.format(fmt(self.ind_acc), fmt(self.auroc),
                                     fmt(self.aupr), fmt(self.fpr95),
                                     self.tau))


class RunManifest(object):
    """Everything needed to identify and reproduce a training run.

    Attributes:
        report (EvalReport): Final evaluation.
        params (ModelParams): Final parameters (not serialized).
        loss_history (list): of dict, the loss log records (not serialized).

    """
    def __init__(self, **fields):
        self.params = fields.pop('params', None)
        self.loss_history = fields.pop('loss_history', [])
        self.report = fields.pop('report')
        self.fields = fields

    def __getattr__(self, key):
        if key == 'fields':
            raise AttributeError(key)
        try:
            return self.fields[key]
        except KeyError:
            raise AttributeError(key)

    def to_dict(self):
        data = dict(self.fields)
        data['report'] = self.report.to_dict()
        return data

    def save(self, path):
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write('\n')


def thread_count():
    """BLAS thread setting of the process, as recorded in manifests."""
    for variable in ('OMP_NUM_THREADS', 'OPENBLAS_NUM_THREADS',
                     'MKL_NUM_THREADS'):
        if os.environ.get(variable):
            return '{}={}'.format(variable, os.environ[variable])
    return 'default'


def compute_embeddings(graph, encoder, cache=None, encoder_seed=0,
                       max_workers=1):
    """Embedding matrix of every node text (through the cache if given)."""
    def _compute():
        return encode_all(graph.texts, encoder, max_workers)

    if cache is None:
        return _compute()
    return cache.get_or_compute(graph.graph_hash(), encoder, encoder_seed,
                                _compute)


def prepare_run(graph, split, batch, encoder, config, cache=None,
                donor_texts=None):
    """Augmented graph, embeddings and adjacency of a run.

    The random-text ablation replaces the batch texts first, keeping its
    edges.

    Returns:
        tuple: (batch, augmented graph, embeddings, adjacency).

    """
    if config.train.random_text_ood:
        ind_class_names = [graph.class_names[c] for c in split.ind_class_ids()]
        batch = with_texts(batch, RandomTextGenerator(config.oodgen.seed,
                                                      donor_texts),
                           ind_class_names)
    augmented = augment_graph(graph, split, batch)
    embeddings = compute_embeddings(augmented, encoder, cache,
                                    config.encoder.seed,
                                    config.encoder.concurrency)
    embeddings.flags.writeable = False
    adj = normalized_adjacency(augmented)
    return batch, augmented, embeddings, adj


def model_config(config, encoder, split):
    return config.model.replace(in_dim=encoder.dim,
                                out_dim=split.num_ind_classes)


def _forward(params, embeddings, adj, model_cfg, mode, rng=None):
    return forward(params, embeddings, adj, mode, rng,
                   dropout=model_cfg.dropout,
                   bn_momentum=model_cfg.bn_momentum,
                   bn_eps=model_cfg.bn_eps)


def _energy_gradient(grad_energies, grad_of_energy):
    return grad_energies[:, None] * grad_of_energy


def training_objective(logits, train_idx, train_labels, weights, pairs=None,
                       triplets=None, pseudo_nodes=None):
    """Total loss of one step and its gradient with respect to the logits.

    Every term reads the same logits; the contrastive ones go through the
    node energies.

    Args:
        logits (np.ndarray): (n, C) logits of the augmented graph.
        train_idx (np.ndarray): Training IND nodes.
        train_labels (np.ndarray): Their labels remapped to [0, C).
        weights (LossWeights): Effective loss weights.
        pairs (np.ndarray): Linked (ind, pseudo) pairs, None without the
            linked-pair group.
        triplets (np.ndarray): (v_i, v_c, v_j) rows, None without the
            triplet term.
        pseudo_nodes (np.ndarray): Pseudo node ids, for the mean-energy
            constraint.

    Returns:
        tuple: (float total, dict of components, np.ndarray (n, C) gradient).

    """
    components = {}
    l_sup, grad_rows = loss_supervised(logits[train_idx], train_labels)
    grad_sup = np.zeros_like(logits)
    grad_sup[train_idx] = grad_rows
    components['l_sup'] = (l_sup, grad_sup)

    if pairs is not None or triplets is not None:
        node_energies = energies(logits)
        grad_of_energy = energy_grad(logits)
    if pairs is not None:
        value, grad = loss_ind_ood(pairs, node_energies, weights.gamma)
        components['l_pairs'] = (value,
                                 _energy_gradient(grad, grad_of_energy))
        if weights.use_mean_constraint and pseudo_nodes is not None:
            value, grad_ind, grad_ood = loss_mean_constraint(
                node_energies[train_idx], node_energies[pseudo_nodes],
                weights.gamma_mean)
            grad = np.zeros_like(node_energies)
            grad[train_idx] = grad_ind
            grad[pseudo_nodes] = grad_ood
            components['l_mean'] = (value,
                                    _energy_gradient(grad, grad_of_energy))
    if triplets is not None:
        value, grad = loss_triplet(triplets, node_energies)
        components['l_triplet'] = (value,
                                   _energy_gradient(grad, grad_of_energy))

    total, grad_logits = loss_total(components, weights)
    return total, components, grad_logits


def _proxy_auroc(params, embeddings, adj, model_cfg, split, pseudo_nodes):
    """Validation AUROC of IND validation nodes against pseudo-OOD nodes."""
    if not len(split.val_idx) or not len(pseudo_nodes):
        return None
    try:
        logits, _ = _forward(params, embeddings, adj, model_cfg, 'eval')
    except NonFiniteError as e:
        # The next train-mode forward reports the divergence.
        logger.debug("no proxy AUROC: {}", e)
        return None
    scores = energies(logits)
    return auroc(ScoredSet.from_groups(scores[split.val_idx],
                                       scores[pseudo_nodes]))


def train(graph, split, batch, encoder, config, out_dir=None, cache=None,
          donor_texts=None):
    """Train a model and evaluate it.

    Args:
        graph (TextAttributedGraph): The source graph.
        split (NodeSplit): Its split.
        batch (PseudoOodBatch): Pseudo-OOD nodes wired to the training nodes.
        encoder (TextEncoder): Frozen text encoder.
        config (ExperimentConfig): Every parameter block; config.model.seed
            is the root seed of initialisation, dropout and pair sampling.
        out_dir (str): Directory receiving the loss log, checkpoints,
            energy dump, report and manifest. None keeps everything in
            memory.
        cache (EmbeddingCache): Optional embedding cache.
        donor_texts (list): Donor corpus of the random-text ablation.

    Returns:
        RunManifest

    Raises:
        DivergenceError: on a non-finite loss, gradient or parameter,
            carrying the last good checkpoint.

    """
    train_cfg = config.train
    batch, augmented, embeddings, adj = prepare_run(graph, split, batch,
                                                    encoder, config, cache,
                                                    donor_texts)
    checksum_before = sha256_array(embeddings)
    model_cfg = model_config(config, encoder, split)
    seed = model_cfg.seed

    params = init_params(model_cfg, stage_rng(seed, 'init'))
    optimizer_state = AdamState.zeros_like(params)
    dropout_rng = stage_rng(seed, 'dropout')

    train_idx = split.train_idx
    train_labels = split.remap_labels(graph.labels[train_idx])
    pseudo_nodes = augmented.pseudo_nodes()
    ind_edges = train_ind_edges(graph, split)
    weights = train_cfg.effective_weights(config.loss)
    num_pairs, num_triplets = train_cfg.pair_counts

    use_pairs = weights.lambda1 > 0 and len(batch.edges) > 0
    use_triplets = weights.lambda2 > 0 and len(batch.edges) > 0
    if use_triplets:
        try:
            sample_triplets(ind_edges, batch.edges, 0, stage_rng(seed, 'check'))
        except ValueError:
            logger.warning("no training node links an IND neighbor and a "
                           "pseudo node: the triplet loss is disabled")
            use_triplets = False

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    paths = _run_paths(out_dir)
    last_good = None
    best_auroc = None
    history = []
    log_file = open(paths['loss_log'], 'w', encoding='utf-8') \
        if paths['loss_log'] else None

    def _checkpoint(current, state, epoch):
        return Checkpoint({'experiment': config, 'model': model_cfg},
                          current, state, dropout_rng.bit_generator.state,
                          epoch,
                          {'split': split.to_dict(),
                           'batch': batch.to_dict(),
                           'graph_hash': graph.graph_hash(),
                           'encoder_id': encoder.encoder_id})

    try:
        for epoch in range(1, train_cfg.epochs + 1):
            try:
                logits, trace = _forward(params, embeddings, adj, model_cfg,
                                         'train', dropout_rng)
                pairs = sample_linked_pairs(
                    batch.edges, num_pairs,
                    stage_rng(seed, 'pairs', epoch)) if use_pairs else None
                triplets = sample_triplets(
                    ind_edges, batch.edges, num_triplets,
                    stage_rng(seed, 'triplets', epoch)) if use_triplets \
                    else None
                total, components, grad_logits = training_objective(
                    logits, train_idx, train_labels, weights, pairs, triplets,
                    pseudo_nodes)
                grads = backward(trace, grad_logits)
                params, optimizer_state = adam_step(
                    params, grads, optimizer_state, lr=train_cfg.lr,
                    weight_decay=train_cfg.weight_decay)
                params.bn_running_mean = trace.running_mean
                params.bn_running_var = trace.running_var
                if not params.all_finite():
                    raise NonFiniteError('parameters')
            except NonFiniteError as e:
                raise DivergenceError(epoch, last_good, e) from e

            record = {'epoch': epoch}
            for name in LOSS_COMPONENTS:
                record[name] = components[name][0] if name in components \
                    else 0.0
            record['l_total'] = total
            history.append(record)
            if log_file is not None:
                log_file.write(json.dumps(record) + '\n')

            if epoch % train_cfg.log_every == 0 or epoch == train_cfg.epochs:
                logger.debug("epoch {:d}: l_sup {:.4f} l_total {:.4f}", epoch,
                             record['l_sup'], total)
                if out_dir is not None:
                    _checkpoint(params, optimizer_state, epoch).dump(
                        paths['last'])
                    last_good = paths['last']
                    if train_cfg.save_best:
                        proxy = _proxy_auroc(params, embeddings, adj,
                                             model_cfg, split, pseudo_nodes)
                        if proxy is not None and (best_auroc is None or
                                                  proxy > best_auroc):
                            best_auroc = proxy
                            _checkpoint(params, optimizer_state, epoch).dump(
                                paths['best'])
    finally:
        if log_file is not None:
            log_file.close()

    report, table = evaluate_params(params, embeddings, adj, model_cfg,
                                    graph, split, augmented,
                                    train_cfg.target_tpr,
                                    config.config_hash(), train_cfg.epochs)
    checksum_after = sha256_array(embeddings)

    if out_dir is not None:
        _checkpoint(params, optimizer_state, train_cfg.epochs).dump(
            paths['final'])
        write_energy_dump(paths['energies'], table)
        report.save(paths['report'])

    manifest = RunManifest(
        config_hash=config.config_hash(),
        config=config.as_dict(),
        graph_hash=graph.graph_hash(),
        batch_hash=batch.batch_hash(),
        generator_id=batch.generator_id,
        encoder_id=encoder.encoder_id,
        seed=seed,
        loss_log=paths['loss_log'],
        checkpoint=paths['final'],
        best_checkpoint=paths['best'] if best_auroc is not None else None,
        best_proxy_auroc=best_auroc,
        energy_dump=paths['energies'],
        thread_count=thread_count(),
        numpy_version=np.__version__,
        embeddings_checksum_before=checksum_before,
        embeddings_checksum_after=checksum_after,
        report=report,
        params=params,
        loss_history=history)
    if out_dir is not None:
        manifest.save(paths['manifest'])
    return manifest


def _run_paths(out_dir):
    names = {'loss_log': LOSS_LOG, 'final': FINAL_CHECKPOINT,
             'last': LAST_CHECKPOINT, 'best': BEST_CHECKPOINT,
             'energies': ENERGY_DUMP, 'report': REPORT,
             'manifest': MANIFEST}
    return {key: os.path.join(out_dir, name) if out_dir is not None else None
            for key, name in names.items()}


def node_roles(graph, split, node_count):
    """Split name of every node: train, val, test_ind, test_ood, pseudo or
    none (unlabeled)."""
    roles = np.array(['none'] * node_count, dtype=object)
    roles[graph.node_count:] = 'pseudo'
    for name in ('train', 'val', 'test_ind', 'test_ood'):
        roles[getattr(split, name + '_idx')] = name
    return roles


def evaluate_params(params, embeddings, adj, model_cfg, graph, split,
                    augmented, target_tpr, config_hash, epoch):
    """Eval-mode forward and metrics of a parameter set.

    Returns:
        tuple: (EvalReport, dict energy table with 'energy', 'decision',
            'role', 'is_pseudo' arrays).

    """
    logits, _ = _forward(params, embeddings, adj, model_cfg, 'eval')
    node_energies = energies(logits)
    if not len(split.val_idx):
        raise SplitError("the threshold needs IND validation nodes")
    detector = Detector(calibrate_tau(node_energies[split.val_idx],
                                      target_tpr))

    test_ind = split.test_ind_idx
    ind_acc = ind_accuracy(logits[test_ind],
                           split.remap_labels(graph.labels[test_ind])) \
        if len(test_ind) else None
    metrics = {'auroc': None, 'aupr': None, 'fpr95': None}
    if len(split.test_ood_idx) and len(test_ind):
        scored = ScoredSet.from_groups(node_energies[test_ind],
                                       node_energies[split.test_ood_idx])
        metrics = {'auroc': auroc(scored), 'aupr': aupr(scored),
                   'fpr95': fpr_at_tpr(scored, target_tpr)}

    report = EvalReport(ind_acc, metrics['auroc'], metrics['aupr'],
                        metrics['fpr95'], detector.tau, target_tpr,
                        model_cfg.seed, epoch, config_hash, len(test_ind),
                        len(split.test_ood_idx))
    table = {'energy': node_energies,
             'decision': detector.detect(node_energies),
             'role': node_roles(graph, split, augmented.node_count),
             'is_pseudo': augmented.is_pseudo}
    return report, table


def write_energy_dump(path, table):
    """CSV with columns node_id,is_pseudo,split,energy,decision."""
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(['node_id', 'is_pseudo', 'split', 'energy',
                         'decision'])
        for node_id, (is_pseudo, role, value, decision) in enumerate(zip(
                table['is_pseudo'], table['role'], table['energy'],
                table['decision'])):
            writer.writerow([node_id, int(is_pseudo), role, repr(float(value)),
                             decision_name(decision)])


def evaluate(checkpoint, graph, encoder, split=None, cache=None,
             out_dir=None):
    """Evaluate a checkpoint.

    The pseudo-OOD batch the model was trained with is restored from the
    checkpoint, so that message passing matches training.

    Args:
        checkpoint (Checkpoint or str): The checkpoint or its path.
        graph (TextAttributedGraph): The source graph.
        encoder (TextEncoder): The encoder used for training.
        split (NodeSplit): Default is the split stored in the checkpoint.
        cache (EmbeddingCache): Optional embedding cache.
        out_dir (str): If given, receives the energy dump and the report.

    Returns:
        EvalReport

    Raises:
        DimensionMismatchError: if the checkpoint does not fit the graph,
            encoder or split dimensions.

    """
    if isinstance(checkpoint, str):
        checkpoint = Checkpoint.load(checkpoint)
    config = checkpoint.configs['experiment']
    model_cfg = checkpoint.configs['model']
    if split is None:
        split = NodeSplit.from_dict(checkpoint.extra['split'])
    params = checkpoint.params
    if params.in_dim != encoder.dim:
        raise DimensionMismatchError("checkpoint expects embeddings of "
                                     "dimension {:d}, the encoder gives "
                                     "{:d}".format(params.in_dim, encoder.dim))
    if params.out_dim != split.num_ind_classes:
        raise DimensionMismatchError("checkpoint has {:d} outputs for {:d} "
                                     "IND classes".format(
                                         params.out_dim, split.num_ind_classes))
    if checkpoint.extra.get('graph_hash') not in (None, graph.graph_hash()):
        logger.warning("the graph differs from the training graph")

    batch = PseudoOodBatch.from_dict(checkpoint.extra['batch'])
    augmented = augment_graph(graph, split, batch)
    embeddings = compute_embeddings(augmented, encoder, cache,
                                    config.encoder.seed,
                                    config.encoder.concurrency)
    adj = normalized_adjacency(augmented)
    report, table = evaluate_params(params, embeddings, adj, model_cfg, graph,
                                    split, augmented,
                                    config.train.target_tpr,
                                    config.config_hash(), checkpoint.epoch)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_energy_dump(os.path.join(out_dir, ENERGY_DUMP), table)
        report.save(os.path.join(out_dir, REPORT))
    return report
