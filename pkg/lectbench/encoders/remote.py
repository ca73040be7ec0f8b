"""
File: remote.py
Description: Client of a remote embedding service speaking the usual
embeddings wire shape:

    POST {"input": [str, ...]}  ->  {"data": [{"embedding": [float, ...]}, ...]}
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from loguru import logger

from ..common.errors import EncoderError, RemoteServiceError
from ..remote import JsonHttpClient
from .text_encoder import TextEncoder

TOKEN_VARIABLE = 'LECT_EMBED_TOKEN'


def _batches(nb_texts, batch_size):
    return [(start, min(start + batch_size, nb_texts))
            for start in range(0, nb_texts, batch_size)]


def _parse_embeddings(answer, expected, dim, start):
    try:
        data = answer['data']
        rows = [item['embedding'] for item in data]
    except (KeyError, TypeError):
        raise EncoderError("malformed embeddings answer", node_index=start)
    if len(rows) != expected:
        raise EncoderError("{:d} embeddings returned for {:d} texts".format(
            len(rows), expected), node_index=start)
    for offset, row in enumerate(rows):
        if not isinstance(row, list):
            raise EncoderError("embedding is not a list of floats",
                               node_index=start + offset)
        if len(row) != dim:
            raise EncoderError("dimension mismatch: expected {:d}, got "
                               "{:d}".format(dim, len(row)),
                               node_index=start + offset)
    return np.asarray(rows, dtype=np.float64).reshape(expected, dim)


def remote_encode(texts, client, dim, batch_size, concurrency=1, model=None):
    """Embed texts through a remote service.

    Texts are sent in requests of at most batch_size texts; at most
    `concurrency` requests are in flight. Row order follows the input.

    Args:
        texts (list): of str.
        client (JsonHttpClient): Client of the embeddings endpoint.
        dim (int): Expected embedding dimension.
        batch_size (int): Maximum texts per request. Strictly positive.
        concurrency (int): Maximum requests in flight.
        model (str): Model name sent with the request, if any.

    Returns:
        np.ndarray: float64 matrix of shape (len(texts), dim).

    Raises:
        EncoderError: on a count or dimension mismatch, or when a request
            fails after retries (the error carries the first node index of
            the failing batch and the HTTP status in its message).

    """
    if batch_size < 1:
        raise ValueError("batch_size must be strictly positive")
    texts = list(texts)
    matrix = np.zeros((len(texts), dim), np.float64)
    batches = _batches(len(texts), batch_size)

    def _send(bounds):
        start, stop = bounds
        payload = {'input': texts[start:stop]}
        if model:
            payload['model'] = model
        try:
            answer = client.post_json(payload)
        except RemoteServiceError as e:
            raise EncoderError(str(e), node_index=start) from e
        matrix[start:stop] = _parse_embeddings(answer, stop - start, dim,
                                               start)

    logger.debug("encoding {:d} texts in {:d} requests", len(texts),
                 len(batches))
    if concurrency > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            list(pool.map(_send, batches))
    else:
        for bounds in batches:
            _send(bounds)
    return matrix


class RemoteEncoder(TextEncoder):
    """Encoder delegating to a remote embeddings endpoint.

    Args:
        client (JsonHttpClient): Client of the endpoint.
        dim (int): Embedding dimension announced by the service.
        batch_size (int): Maximum texts per request.
        concurrency (int): Maximum requests in flight.
        model (str): Model name sent with the requests.

    """
    def __init__(self, client, dim, batch_size=64, concurrency=4, model=None):
        super().__init__(dim)
        self.client = client
        self.batch_size = batch_size
        self.concurrency = concurrency
        self.model = model

    @classmethod
    def from_config(cls, encoder_cfg, remote_cfg):
        client = JsonHttpClient.from_env(remote_cfg.embed_endpoint,
                                         TOKEN_VARIABLE,
                                         max_retries=remote_cfg.max_retries,
                                         backoff_factor=remote_cfg.backoff_factor,
                                         timeout=remote_cfg.timeout)
        return cls(client, encoder_cfg.dim, encoder_cfg.batch_size,
                   encoder_cfg.concurrency, remote_cfg.embed_model or None)

    @property
    def encoder_id(self):
        return 'remote:{}:{}'.format(self.client.endpoint, self.model or '')

    def encode(self, text):
        return self.encode_indexed([text])[0]

    def encode_indexed(self, texts):
        return remote_encode(texts, self.client, self.dim, self.batch_size,
                             self.concurrency, self.model)

