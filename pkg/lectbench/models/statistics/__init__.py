from .statistics_recorder import StatisticsRecorder, METRIC_NAMES
