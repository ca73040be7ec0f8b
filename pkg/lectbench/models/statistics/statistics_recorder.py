"""
File: statistics_recorder.py
Description: Statistics over the repeated runs of one experiment arm.
"""

import numpy as np

METRIC_NAMES = ('ind_acc', 'auroc', 'aupr', 'fpr95')
# Metrics for which a lower value is better.
LOWER_IS_BETTER = ('fpr95',)


class StatisticsRecorder(object):
    """Compilation of the evaluation reports of the runs of an arm.

    Args:
        nb_run (int): Number of runs that will be recorded. Strictly
            positive.
        arm (str): Name of the experiment arm.

    Attributes:
        arm (str): Name of the experiment arm.
        seeds (list): Seed of every recorded run.
        times (np.ndarray): Time in s. of every run.

    """
    def __init__(self, nb_run, arm):
        if nb_run <= 0:
            raise ValueError("The number of runs must be strictly positive")
        self.arm = arm
        self._nb_run = nb_run
        self._values = {name: np.full(nb_run, np.nan) for name in METRIC_NAMES}
        self._recorded = np.zeros(nb_run, bool)
        self.seeds = [None] * nb_run
        self.times = np.zeros(nb_run, np.float64)

    def record_run(self, num_run, report, time_computation=0.0):
        """Record the report of a run.

        Args:
            num_run (int): Index of the run.
            report (EvalReport): Its final evaluation.
            time_computation (float): Time in second taken by the run.

        """
        for name in METRIC_NAMES:
            value = report.metric(name)
            self._values[name][num_run] = np.nan if value is None else value
        self._recorded[num_run] = True
        self.seeds[num_run] = report.seed
        self.times[num_run] = time_computation

    @property
    def nb_run(self):
        return self._nb_run

    @property
    def nb_recorded(self):
        return int(np.sum(self._recorded))

    def values(self, metric):
        """Recorded values of a metric, runs without it excluded."""
        values = self._values[metric][self._recorded]
        return values[~np.isnan(values)]

    def best(self, metric):
        values = self.values(metric)
        if not len(values):
            return None
        return float(np.amin(values) if metric in LOWER_IS_BETTER
                     else np.amax(values))

    def worst(self, metric):
        values = self.values(metric)
        if not len(values):
            return None
        return float(np.amax(values) if metric in LOWER_IS_BETTER
                     else np.amin(values))

    def mean(self, metric):
        values = self.values(metric)
        return float(np.mean(values)) if len(values) else None

    def std(self, metric):
        """Population standard deviation over the runs."""
        values = self.values(metric)
        return float(np.std(values)) if len(values) else None

    def summary(self, percent=False):
        """Metric -> (mean, std), None for metrics without value."""
        scale = 100.0 if percent else 1.0
        result = {}
        for name in METRIC_NAMES:
            mean, std = self.mean(name), self.std(name)
            result[name] = None if mean is None else (mean * scale, std * scale)
        return result

    def __str__(self):
        st_c = "|{0}|{1}|{2}|{3}|\n"
        line = "".join(["-"]*62) + "\n"

        def fmt(value):
            return 'n/a' if value is None else '{:.4f}'.format(value)

        stat_str = ""
        for name in METRIC_NAMES:
            stat_str += line
            stat_str += ("|{}|\n".format(name.center(60)))
            stat_str += line
            stat_str += ("|{}|{}|{}|{}|\n".format("worst".center(14),
                                                  "mean".center(14),
                                                  "best".center(14),
                                                  "std".center(15)))
            stat_str += line
            stat_str += (st_c.format(fmt(self.worst(name)).center(14),
                                     fmt(self.mean(name)).center(14),
                                     fmt(self.best(name)).center(14),
                                     fmt(self.std(name)).center(15)))
        stat_str += line
        return stat_str
