"""
File: cache.py
Description: On-disk cache of embedding matrices. The encoder is frozen, so
embeddings are computed once per (graph, encoder, dim, seed) and reused by
every training run.

File layout: 8-byte magic, then rows, cols and seed as little-endian
uint64, then rows * cols little-endian float32 values in row-major order.
"""

import os
import struct

import numpy as np
from loguru import logger

from ..utils.hashing import sha256_json

MAGIC = b'LECTEMB1'
HEADER = struct.Struct('<8sQQQ')


def write_embeddings(path, matrix, seed):
    """Write a matrix in the cache layout (values stored as float32)."""
    matrix = np.asarray(matrix)
    rows, cols = matrix.shape
    tmp_path = path + '.tmp'
    with open(tmp_path, 'wb') as f:
        f.write(HEADER.pack(MAGIC, rows, cols, int(seed)))
        f.write(np.ascontiguousarray(matrix, dtype='<f4').tobytes())
    os.replace(tmp_path, path)


def read_embeddings(path):
    """Read a cached matrix.

    Returns:
        tuple: (np.ndarray of float32 of shape (rows, cols), seed).

    Raises:
        ValueError: if the file is not an embedding cache file or is
            truncated.

    """
    with open(path, 'rb') as f:
        header = f.read(HEADER.size)
        if len(header) != HEADER.size:
            raise ValueError("{} is not an embedding cache file".format(path))
        magic, rows, cols, seed = HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError("{} is not an embedding cache file".format(path))
        payload = f.read()
    if len(payload) != rows * cols * 4:
        raise ValueError("{} is truncated".format(path))
    matrix = np.frombuffer(payload, dtype='<f4').reshape(rows, cols)
    return matrix.astype(np.float32), seed


class EmbeddingCache(object):
    """Directory of cached embedding matrices.

    Args:
        directory (str): Cache directory, created if needed.

    """
    def __init__(self, directory):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)

    @staticmethod
    def key(graph_hash, encoder_id, dim, seed):
        return sha256_json({'graph': graph_hash, 'encoder': encoder_id,
                            'dim': dim, 'seed': seed})[:32]

    def path(self, key):
        return os.path.join(self.directory, '{}.emb'.format(key))

    def get_or_compute(self, graph_hash, encoder, seed, compute):
        """Fetch a matrix, computing and storing it on a miss.

        Args:
            graph_hash (str): Hash of the (augmented) graph.
            encoder (TextEncoder): The frozen encoder.
            seed (int): Encoder seed.
            compute (func): Called without arguments on a miss, returns the
                embedding matrix.

        Returns:
            np.ndarray: float64 matrix (read back from float32 storage so a
                hit and a miss give identical values).

        """
        key = self.key(graph_hash, encoder.encoder_id, encoder.dim, seed)
        path = self.path(key)
        if os.path.exists(path):
            try:
                matrix, cached_seed = read_embeddings(path)
                if matrix.shape[1] == encoder.dim and cached_seed == seed:
                    logger.debug("embedding cache hit {}", path)
                    return matrix.astype(np.float64)
            except ValueError as e:
                logger.warning("ignoring cache file: {}", e)
        matrix = compute()
        write_embeddings(path, matrix, seed)
        logger.debug("embedding cache stored {}", path)
        return np.asarray(matrix, np.float32).astype(np.float64)
