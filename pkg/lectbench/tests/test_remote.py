import pytest
import numpy as np
import requests

from .fixtures import *
from ..common import EncoderError, RemoteServiceError
from ..encoders import RemoteEncoder, encode_all, remote_encode
from ..remote import JsonHttpClient

FIVE_TEXTS = ['a', 'bb', 'ccc', 'dddd', 'eeeee']


def fake_client(answer, token=None):
    client = JsonHttpClient('http://embed.local/v1/embeddings', token=token)
    client.session = FakeSession(answer)
    return client


def test_client_requires_endpoint():
    with pytest.raises(ValueError):
        JsonHttpClient('')


def test_client_headers():
    client = fake_client(lambda payload: FakeResponse(200, {'ok': True}), token='secret')
    assert client.post_json({'x': 1}) == {'ok': True}
    assert client.nb_requests == 1
    assert client._headers()['Authorization'] == 'Bearer secret'


def test_client_from_env(monkeypatch):
    monkeypatch.setenv('LECT_TEST_TOKEN', 'abc')
    client = JsonHttpClient.from_env('http://x.local', 'LECT_TEST_TOKEN', max_retries=0)
    assert client.token == 'abc'


def test_client_errors():
    client = fake_client(lambda payload: FakeResponse(503, text='busy'))
    with pytest.raises(RemoteServiceError) as e:
        client.post_json({})
    assert e.value.status == 503

    client = fake_client(lambda payload: FakeResponse(200, None, text='<html>'))
    with pytest.raises(RemoteServiceError):
        client.post_json({})

    def unreachable(payload):
        raise requests.ConnectionError("connection refused")

    client = fake_client(unreachable)
    with pytest.raises(RemoteServiceError) as e:
        client.post_json({})
    assert e.value.status is None


def test_batches():
    client = fake_client(embeddings_answer(3))
    matrix = remote_encode(FIVE_TEXTS, client, 3, batch_size=2)
    assert client.nb_requests == 3
    assert [len(p['input']) for p in client.session.payloads] == [2, 2, 1]
    assert matrix[:, 0].tolist() == [1.0, 2.0, 3.0, 4.0, 5.0]
    with pytest.raises(ValueError):
        remote_encode(FIVE_TEXTS, client, 3, batch_size=0)


def test_concurrent_batches_keep_order():
    client = fake_client(embeddings_answer(3))
    matrix = remote_encode(FIVE_TEXTS, client, 3, batch_size=1, concurrency=4)
    assert client.nb_requests == 5
    assert matrix[:, 0].tolist() == [1.0, 2.0, 3.0, 4.0, 5.0]


def test_count_mismatch():
    def short_answer(payload):
        data = [{'embedding': [0.0, 0.0]} for _ in payload['input'][:-1]]
        return FakeResponse(200, {'data': data})

    with pytest.raises(EncoderError):
        remote_encode(FIVE_TEXTS, fake_client(short_answer), 2, batch_size=5)


def test_http_error_carries_status_and_node():
    def failing(payload):
        if 'ccc' in payload['input']:
            return FakeResponse(500, text='internal')
        return embeddings_answer(2)(payload)

    with pytest.raises(EncoderError) as e:
        remote_encode(FIVE_TEXTS, fake_client(failing), 2, batch_size=2)
    assert e.value.node_index == 2
    assert 'HTTP 500' in str(e.value)


def test_remote_encoder_dimension_mismatch():
    encoder = RemoteEncoder(fake_client(embeddings_answer(3)), 4, batch_size=2)
    with pytest.raises(EncoderError) as e:
        encode_all(FIVE_TEXTS, encoder)
    assert 'dimension mismatch' in str(e.value)


def test_remote_encoder():
    encoder = RemoteEncoder(fake_client(embeddings_answer(4)), 4, batch_size=2, model='mini')
    matrix = encode_all(FIVE_TEXTS, encoder)
    assert matrix.shape == (5, 4)
    assert encoder.client.session.payloads[0]['model'] == 'mini'
    assert encoder.encoder_id == 'remote:http://embed.local/v1/embeddings:mini'
    assert np.array_equal(encoder.encode('abc'), [3.0, 0.0, 0.0, 0.0])


def test_scalar_embedding_names_node():
    def scalar_answer(payload):
        data = [{'embedding': 0.5 if text == 'dddd' else [0.0, 0.0]}
                for text in payload['input']]
        return FakeResponse(200, {'data': data})

    with pytest.raises(EncoderError) as e:
        remote_encode(FIVE_TEXTS, fake_client(scalar_answer), 2, batch_size=2)
    assert e.value.node_index == 3
    assert 'not a list' in str(e.value)
