from .http_client import JsonHttpClient, RETRYABLE_STATUS
