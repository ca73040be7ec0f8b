"""
File: seeding.py
Description: Derivation of independent random streams from the single
configured seed.

Every stage of the pipeline (split, pseudo edges, generation, parameter
initialisation, dropout, pair sampling, ...) draws from its own generator.
The stage seed is obtained by folding the stage name and optional integer
keys (for example the epoch) into the root seed with the splitmix64 mixer:

    state = splitmix64(root ^ blake2b64(stage))
    state = splitmix64(state ^ key)       for every extra key

so that adding a stage or changing one stage's consumption of random
numbers never shifts the stream of another stage.
"""

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(value):
    """One round of the splitmix64 finalizer on a 64-bit integer."""
    z = (value + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _name_hash(name):
    digest = hashlib.blake2b(name.encode('utf-8'), digest_size=8).digest()
    return int.from_bytes(digest, 'little')


def derive_seed(seed, stage, *keys):
    """Derive the 64-bit seed of a stage.

    Args:
        seed (int): Root seed of the run.
        stage (str): Name of the stage.
        keys (list): of int, additional keys (epoch, node index, ...).

    Returns:
        int: the derived seed, in [0, 2**64).

    """
    state = splitmix64((int(seed) & MASK64) ^ _name_hash(stage))
    for key in keys:
        state = splitmix64(state ^ (int(key) & MASK64))
    return state


def stage_rng(seed, stage, *keys):
    """Numpy generator for a stage, see derive_seed."""
    return np.random.default_rng(derive_seed(seed, stage, *keys))
