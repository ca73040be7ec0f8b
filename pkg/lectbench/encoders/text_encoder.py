"""
File: text_encoder.py
Description: Frozen text encoders mapping node texts to fixed-size
embeddings, and the batch encoding of a whole graph.
"""

import hashlib
import re
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..common.errors import DimensionMismatchError, EncoderError

TOKEN_SPLIT = re.compile(r'[^0-9a-z]+')


class TextEncoder(object):
    """Abstract frozen encoder.

    Args:
        dim (int): Output dimension. Strictly positive.

    Attributes:
        dim (int): Output dimension.

    """
    def __init__(self, dim):
        if dim < 1:
            raise ValueError("The encoder dimension must be strictly positive")
        self.dim = dim

    @property
    def encoder_id(self):
        """Identifier of the encoder used in cache keys and manifests."""
        raise NotImplementedError('Abstract Class')

    def encode(self, text):
        """Embed a single text.

        Returns:
            np.ndarray: float64 vector of length dim.

        """
        raise NotImplementedError('Abstract Class')


def tokenize(text):
    """Lowercase the text and split it on non-alphanumeric characters."""
    return [token for token in TOKEN_SPLIT.split(text.lower()) if token]


def _signed_bucket(token, dim, key):
    digest = hashlib.blake2b(token.encode('utf-8'), digest_size=8,
                             key=key).digest()
    value = int.from_bytes(digest, 'little')
    sign = -1.0 if value >> 63 else 1.0
    return (value & ((1 << 63) - 1)) % dim, sign


def _seed_key(seed):
    return int(seed).to_bytes(8, 'little', signed=False)


def hash_encode(text, dim, seed=0):
    """Signed feature hashing of the tokens of a text.

    Every token is hashed with a seeded BLAKE2b to a bucket in [0, dim) and
    a sign; the signed counts are accumulated and the vector is scaled to
    unit L2 norm. Texts without tokens give the zero vector.

    Args:
        text (str): Text to encode.
        dim (int): Output dimension.
        seed (int): 64-bit seed of the hash.

    Returns:
        np.ndarray: float64 vector of length dim, of norm 0 or 1.

    """
    if dim < 1:
        raise ValueError("The encoder dimension must be strictly positive")
    key = _seed_key(seed)
    vector = np.zeros(dim, np.float64)
    for token in tokenize(text):
        bucket, sign = _signed_bucket(token, dim, key)
        vector[bucket] += sign
    norm = np.linalg.norm(vector)
    if norm > 0:
        vector /= norm
    return vector


class HashEncoder(TextEncoder):
    """Offline stand-in for a pretrained sentence encoder.

    Args:
        dim (int): Output dimension. Default is 384.
        seed (int): Seed of the hash function.

    """
    def __init__(self, dim=384, seed=0):
        super().__init__(dim)
        self.seed = seed

    @property
    def encoder_id(self):
        return 'hash-blake2b'

    def encode(self, text):
        return hash_encode(text, self.dim, self.seed)


def encode_all(texts, encoder, max_workers=1):
    """Encode every node text.

    Encoders with a batched transport (remote ones) receive the whole list;
    others are mapped over the texts, in worker threads if max_workers > 1.
    Row i is always encoder(texts[i]).

    Args:
        texts (list): of str.
        encoder (TextEncoder): The frozen encoder.
        max_workers (int): Encoding threads.

    Returns:
        np.ndarray: float64 matrix of shape (len(texts), encoder.dim).

    Raises:
        EncoderError: carrying the index of the failing node, also when an
            encoder returns vectors of the wrong dimension.

    """
    texts = list(texts)
    if hasattr(encoder, 'encode_indexed'):
        matrix = encoder.encode_indexed(texts)
    else:
        matrix = np.zeros((len(texts), encoder.dim), np.float64)

        def _encode(index):
            try:
                vector = np.asarray(encoder.encode(texts[index]), np.float64)
            except EncoderError:
                raise
            except Exception as e:
                raise EncoderError(str(e), node_index=index) from e
            if vector.shape != (encoder.dim,):
                raise EncoderError("dimension mismatch: expected {:d}, got "
                                   "{}".format(encoder.dim, vector.shape),
                                   node_index=index)
            matrix[index] = vector

        if max_workers > 1 and len(texts) > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                list(pool.map(_encode, range(len(texts))))
        else:
            for index in range(len(texts)):
                _encode(index)

    if matrix.shape != (len(texts), encoder.dim):
        raise DimensionMismatchError("embedding matrix of shape {} for {:d} "
                                     "texts of dim {:d}".format(
                                         matrix.shape, len(texts),
                                         encoder.dim))
    bad = np.nonzero(~np.isfinite(matrix).all(axis=1))[0]
    if len(bad):
        raise EncoderError("non-finite embedding", node_index=int(bad[0]))
    return matrix
