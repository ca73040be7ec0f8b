from .statistics import StatisticsRecorder
from .benchmark import Benchmark, table_row, format_cell
from .net import ModelParams, ForwardTrace, init_params, forward, backward
from .optimizer import AdamState, adam_step
from .checkpoint import Checkpoint
from .trainer import EvalReport, RunManifest, train, evaluate, compute_embeddings
from .parameters import (Parameters, ParameterDescInt, ParameterDescStr, ParameterDescEnum, ParameterDescFloat,
                         ParameterDescBool, ParameterDescIntList, ParameterDesc, SplitSpec, OodGenConfig,
                         EncoderConfig, RemoteConfig, ModelConfig, LossWeights, TrainConfig, ExperimentConfig,
                         ABLATION_ARMS, PAIR_PRESETS)
