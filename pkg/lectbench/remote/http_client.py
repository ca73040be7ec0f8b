"""
File: http_client.py
Description: JSON-over-HTTP client shared by the remote embedding encoder and
the chat-completion generator. Transient failures (connection errors, 429
and 5xx answers) are retried with exponential backoff by the urllib3 Retry
policy mounted on the session.
"""

import os
import threading

import requests
from loguru import logger
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from ..common.errors import RemoteServiceError

RETRYABLE_STATUS = (429, 500, 502, 503, 504)


class JsonHttpClient(object):
    """POST JSON payloads to an endpoint.

    Args:
        endpoint (str): URL receiving the requests.
        token (str): Bearer token, None for no authorization header.
        max_retries (int): Retries on transient failures.
        backoff_factor (float): Base of the exponential backoff, the n-th
            retry waits backoff_factor * 2 ** (n - 1) seconds.
        timeout (float): Connect and read timeout of a request, in seconds.

    Attributes:
        session (requests.Session): Session carrying the retry policy.
        nb_requests (int): Number of POST calls issued (retries excluded).

    """
    def __init__(self, endpoint, token=None, max_retries=4,
                 backoff_factor=0.5, timeout=60.0):
        if not endpoint:
            raise ValueError("A remote endpoint must be configured")
        self.endpoint = endpoint
        self.token = token
        self.timeout = timeout
        self.nb_requests = 0
        self._lock = threading.Lock()

        retries = Retry(total=max_retries,
                        connect=max_retries,
                        read=max_retries,
                        status=max_retries,
                        backoff_factor=backoff_factor,
                        status_forcelist=RETRYABLE_STATUS,
                        allowed_methods=frozenset(['POST']),
                        raise_on_status=False)
        self.session = requests.Session()
        adapter = HTTPAdapter(max_retries=retries)
        self.session.mount('http://', adapter)
        self.session.mount('https://', adapter)

    @classmethod
    def from_env(cls, endpoint, token_variable, **kwargs):
        """Build a client reading its token from an environment variable."""
        return cls(endpoint, token=os.environ.get(token_variable), **kwargs)

    def _headers(self):
        headers = {'Content-Type': 'application/json'}
        if self.token:
            headers['Authorization'] = 'Bearer {}'.format(self.token)
        return headers

    def post_json(self, payload):
        """Send a payload and decode the JSON answer.

        Returns:
            dict: the decoded answer.

        Raises:
            RemoteServiceError: when the endpoint cannot be reached, answers
                a non-2xx status once retries are exhausted, or returns a
                body that is not JSON.

        """
        with self._lock:
            self.nb_requests += 1
        try:
            response = self.session.post(self.endpoint, json=payload,
                                         headers=self._headers(),
                                         timeout=self.timeout)
        except requests.RequestException as e:
            logger.warning("request to {} failed: {}", self.endpoint, e)
            raise RemoteServiceError("{} unreachable: {}".format(
                self.endpoint, e))

        if not 200 <= response.status_code < 300:
            raise RemoteServiceError(response.text[:200],
                                     status=response.status_code)
        try:
            return response.json()
        except ValueError:
            raise RemoteServiceError("answer of {} is not JSON".format(
                self.endpoint), status=response.status_code)

    def close(self):
        self.session.close()
