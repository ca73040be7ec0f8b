"""
File: benchmark.py
Description: A Benchmark is a comparison of several training arms (ablations
or pair-count settings) over repeated seeds, on one graph.
"""

import csv
import os
import pickle
import time
from concurrent.futures import ProcessPoolExecutor

from loguru import logger

from ..common.split import build_split
from ..encoders import EmbeddingCache, build_encoder
from ..oodgen.batch import build_skeleton, generate_texts
from ..oodgen.generators import build_generator
from .parameters import ABLATION_ARMS, TrainConfig
from .statistics import METRIC_NAMES, StatisticsRecorder
from .trainer import train


def format_cell(value, percent=True):
    """'mean ± std' cell of a (mean, std) pair, 'n/a' for None."""
    if value is None:
        return 'n/a'
    return '{:.2f} ± {:.2f}'.format(*value) if percent else \
        '{:.4f} ± {:.4f}'.format(*value)


def table_row(summary, percent=True):
    """Cells of a result row, in the metric order ind_acc, auroc, aupr,
    fpr95."""
    return [format_cell(summary[name], percent) for name in METRIC_NAMES]


class _Task(object):
    """Everything a worker needs to run one (arm, seed) cell."""
    def __init__(self, arm, seed, graph, split, batch, config, out_dir,
                 cache_dir, donor_texts):
        self.arm = arm
        self.seed = seed
        self.graph = graph
        self.split = split
        self.batch = batch
        self.config = config
        self.out_dir = out_dir
        self.cache_dir = cache_dir
        self.donor_texts = donor_texts


def _run_task(task):
    logger.info("> Arm [{}] - Seed [{:d}] - Run", task.arm, task.seed)
    encoder = build_encoder(task.config.encoder, task.config.remote)
    cache = EmbeddingCache(task.cache_dir) if task.cache_dir else None
    t_run = time.perf_counter()
    manifest = train(task.graph, task.split, task.batch, encoder, task.config,
                     out_dir=task.out_dir, cache=cache,
                     donor_texts=task.donor_texts)
    return manifest.report, time.perf_counter() - t_run


class Benchmark(object):
    """Arms x seeds experiment.

    Every seed gets its own pseudo-OOD batch (generated once and shared by
    all the arms) and its own model initialisation; the split stays the one
    of the config.

    Args:
        graph (TextAttributedGraph): The graph.
        config (ExperimentConfig): Base configuration of every arm.
        seeds (list): of int, default is config.train.seeds.
        jobs (int): Worker processes, 1 runs everything in this process.
        out_dir (str): If given, every run writes its artifacts in
            out_dir/<arm>/seed_<seed>.
        cache_dir (str): Embedding cache directory.
        donor_texts (list): Donor corpus of the random-text arm.

    """
    def __init__(self, graph, config, seeds=None, jobs=1, out_dir=None,
                 cache_dir=None, donor_texts=None):
        self.graph = graph
        self.config = config
        self.seeds = list(seeds if seeds is not None else config.train.seeds)
        self.jobs = jobs
        self.out_dir = out_dir
        self.cache_dir = cache_dir
        self.donor_texts = donor_texts
        self._arms = []
        self._results = {}

    def dump(self, file_name):
        with open(file_name, 'wb') as f:
            pickle.dump(self, f)

    @staticmethod
    def load(file_name):
        with open(file_name, 'rb') as f:
            result = pickle.load(f)
            if not isinstance(result, Benchmark):
                raise ValueError("The given file is not a dumped Benchmark")
            return result

    def add_arm(self, name, train_cfg, **columns):
        """Add an arm to the Benchmark.

        Args:
            name (str): Name of the arm, unique.
            train_cfg (TrainConfig): Training parameters of the arm.
            columns (dict): Extra CSV columns describing the arm.

        """
        if any(arm[0] == name for arm in self._arms):
            raise ValueError("The arm {} already exists".format(name))
        self._arms.append((name, train_cfg, columns))

    def add_ablation_arms(self, arms=ABLATION_ARMS):
        base = self.config.train.as_dict()
        for flag in ('no_contrastive', 'random_text_ood', 'no_ind_ood',
                     'no_triplet'):
            base.pop(flag)
        for arm in arms:
            self.add_arm(arm, TrainConfig.ablation(arm, **base))

    def add_sweep_arms(self, pair_counts, triplet_counts):
        """One arm per (linked pairs, triplets) cell of a grid."""
        for num_pairs in pair_counts:
            for num_triplets in triplet_counts:
                train_cfg = self.config.train.replace(
                    num_pairs=num_pairs, num_triplets=num_triplets,
                    pair_preset='none')
                self.add_arm('pairs={:d},triplets={:d}'.format(num_pairs,
                                                                num_triplets),
                             train_cfg, num_pairs=num_pairs,
                             num_triplets=num_triplets)

    @property
    def arms(self):
        return [arm[0] for arm in self._arms]

    @property
    def results(self):
        """Arm name -> StatisticsRecorder."""
        return self._results

    def _batches(self, split):
        batches = {}
        for seed in self.seeds:
            config = self.config.with_run_seed(seed)
            skeleton = build_skeleton(self.graph, split, config.oodgen)
            generator = build_generator(config.oodgen, config.remote)
            batches[seed] = generate_texts(skeleton, generator,
                                           config.oodgen.concurrency)
        return batches

    def run(self):
        """Compute the Benchmark."""
        if not self._arms:
            raise ValueError("The Benchmark has no arm")
        split = build_split(self.graph, self.config.split)
        batches = self._batches(split)

        tasks = []
        for name, train_cfg, _ in self._arms:
            for seed in self.seeds:
                config = self.config.with_run_seed(seed).replace(
                    train=train_cfg)
                out_dir = os.path.join(self.out_dir, _safe_name(name),
                                       'seed_{:d}'.format(seed)) \
                    if self.out_dir else None
                tasks.append(_Task(name, seed, self.graph, split,
                                   batches[seed], config, out_dir,
                                   self.cache_dir, self.donor_texts))

        if self.jobs > 1:
            with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                outcomes = list(pool.map(_run_task, tasks))
        else:
            outcomes = [_run_task(task) for task in tasks]

        self._results = {name: StatisticsRecorder(len(self.seeds), name)
                         for name in self.arms}
        for task, (report, duration) in zip(tasks, outcomes):
            self._results[task.arm].record_run(self.seeds.index(task.seed),
                                               report, duration)
        return self._results

    def write_csv(self, path, percent=True):
        """One row per arm: its extra columns, then 'mean ± std' of every
        metric (in percent by default)."""
        column_names = []
        for _, _, columns in self._arms:
            for key in columns:
                if key not in column_names:
                    column_names.append(key)
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f)
            writer.writerow(['arm'] + column_names + list(METRIC_NAMES))
            for name, _, columns in self._arms:
                stats = self._results[name]
                writer.writerow([name] +
                                [columns.get(key, '') for key in column_names] +
                                table_row(stats.summary(percent), percent))

    def __str__(self):
        line = "".join(["-"]*62) + "\n"
        b_str = ""
        b_str += line
        b_str += "|{}|\n".format("LECTBENCH".center(60))
        b_str += line
        for name in self.arms:
            if name not in self._results:
                continue
            b_str += line
            b_str += "|{}|\n".format(" Arm : {}".format(name).center(60))
            b_str += "|{}|\n".format(" Nb runs : {:d}".format(
                len(self.seeds)).center(60))
            b_str += line
            b_str += str(self._results[name])
        return b_str


def _safe_name(name):
    return name.replace('=', '').replace(',', '_')
