"""
File: checkpoint.py
Description: Binary checkpoints of a training run.

Layout: the magic b'LECTCKPT', a little-endian uint32 format version, then a
pickle of the checkpoint content.
"""

import os
import pickle
import struct

from .net import ModelParams
from .optimizer import AdamState

MAGIC = b'LECTCKPT'
FORMAT_VERSION = 1
HEADER = struct.Struct('<8sI')


class Checkpoint(object):
    """State of a run at the end of an epoch.

    Args:
        configs (dict): Config block name -> Parameters of the run.
        params (ModelParams): Weights, including the batch-norm running
            statistics.
        optimizer_state (AdamState): Adam moments.
        rng_state (dict): Bit generator state of the dropout stream.
        epoch (int): Number of completed epochs.
        extra (dict): Run data needed to evaluate without the inputs of the
            training command (split, pseudo batch, embedding cache key...).

    """
    def __init__(self, configs, params, optimizer_state, rng_state, epoch,
                 extra=None):
        self.configs = configs
        self.params = params
        self.optimizer_state = optimizer_state
        self.rng_state = rng_state
        self.epoch = epoch
        self.extra = extra or {}

    def dump(self, file_name):
        tmp_name = file_name + '.tmp'
        with open(tmp_name, 'wb') as f:
            f.write(HEADER.pack(MAGIC, FORMAT_VERSION))
            pickle.dump({'configs': self.configs,
                         'params': self.params.as_arrays(),
                         'params_version': self.params.version,
                         'optimizer': {'m': self.optimizer_state.m,
                                       'v': self.optimizer_state.v,
                                       'step': self.optimizer_state.step},
                         'rng_state': self.rng_state,
                         'epoch': self.epoch,
                         'extra': self.extra}, f)
        os.replace(tmp_name, file_name)

    @staticmethod
    def load(file_name):
        with open(file_name, 'rb') as f:
            header = f.read(HEADER.size)
            if len(header) != HEADER.size:
                raise ValueError("The given file is not a checkpoint")
            magic, version = HEADER.unpack(header)
            if magic != MAGIC:
                raise ValueError("The given file is not a checkpoint")
            if version != FORMAT_VERSION:
                raise ValueError("Unsupported checkpoint version {:d}".format(
                    version))
            content = pickle.load(f)
        optimizer = content['optimizer']
        return Checkpoint(content['configs'],
                          ModelParams(content['params'],
                                      content['params_version']),
                          AdamState(optimizer['m'], optimizer['v'],
                                    optimizer['step']),
                          content['rng_state'],
                          content['epoch'],
                          content['extra'])
