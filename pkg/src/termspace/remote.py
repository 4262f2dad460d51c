"""HTTP embedding provider speaking the common JSON embeddings wire format."""

from __future__ import annotations

import os
import random
import threading
import time

import httpx
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ProviderError, TransientProviderError, ValidationError
from .validation import check_texts

_RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class RemoteVectorizer(BaseEstimator, TransformerMixin):
    """Vectorizer backed by a remote embeddings endpoint.

    Request: ``POST endpoint`` with body ``{"model": ..., "input": [texts]}``.
    Response: ``{"data": [{"index": i, "embedding": [...]}, ...]}``; rows are
    reordered by their ``index`` field before being returned.

    The bearer token is read from the environment variable named by
    ``token_env`` at request time and is never persisted anywhere. Retryable
    failures (HTTP 429, 5xx, transport errors) are retried up to
    ``max_retries`` total attempts with exponential backoff and jitter; other
    HTTP errors fail immediately. At most ``max_inflight`` requests are in
    flight at once.
    """

    provider_id = "remote"

    def __init__(
        self,
        endpoint: str = "",
        model: str = "",
        token_env: str | None = None,
        timeout: float = 30.0,
        max_retries: int = 5,
        backoff_base: float = 0.5,
        jitter: float = 0.25,
        max_inflight: int = 4,
        batch_size: int = 64,
        transport=None,
        sleep=None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.token_env = token_env
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.jitter = jitter
        self.max_inflight = max_inflight
        self.batch_size = batch_size
        self.transport = transport
        self.sleep = sleep

    def _validate(self):
        if not self.endpoint:
            raise ValidationError("remote provider requires an endpoint URL")
        if not self.model:
            raise ValidationError("remote provider requires a model name")
        if self.max_retries < 1:
            raise ValidationError(f"max_retries must be >= 1, got {self.max_retries}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_inflight < 1:
            raise ValidationError(f"max_inflight must be >= 1, got {self.max_inflight}")
        if not 0.0 <= self.jitter < 1.0:
            raise ValidationError(f"jitter must be in [0, 1), got {self.jitter}")

    @property
    def model_id(self) -> str:
        return self.model

    def fit(self, texts=None, y=None):
        self._validate()
        return self

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.token_env:
            token = os.environ.get(self.token_env)
            if not token:
                raise ValidationError(
                    f"environment variable {self.token_env!r} is not set; "
                    "it must hold the API token"
                )
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def _client(self) -> httpx.Client:
        client = getattr(self, "_http", None)
        if client is None:
            client = httpx.Client(transport=self.transport, timeout=self.timeout)
            self._http = client
        return client

    def _post_once(self, batch: list[str]):
        response = self._client().post(
            self.endpoint,
            json={"model": self.model, "input": batch},
            headers=self._headers(),
        )
        return response

    def _post_with_retry(self, batch: list[str], offset: int) -> dict:
        rng = random.Random(f"{self.model}:{offset}")
        last_reason = "no attempt made"
        for attempt in range(1, self.max_retries + 1):
            try:
                response = self._post_once(batch)
            except httpx.HTTPError as err:
                last_reason = f"transport error: {err}"
            else:
                if response.status_code == 200:
                    try:
                        return response.json()
                    except ValueError:
                        raise ProviderError(
                            "endpoint returned unparseable JSON",
                            status=200,
                            index=offset,
                        ) from None
                if response.status_code not in _RETRYABLE_STATUS:
                    raise ProviderError(
                        f"endpoint returned HTTP {response.status_code}: "
                        f"{response.text[:200]}",
                        status=response.status_code,
                        index=offset,
                    )
                last_reason = f"HTTP {response.status_code}"
            if attempt < self.max_retries:
                delay = self.backoff_base * (2 ** (attempt - 1))
                delay *= 1.0 + self.jitter * (2.0 * rng.random() - 1.0)
                (self.sleep or time.sleep)(delay)
        raise TransientProviderError(
            f"gave up after {self.max_retries} attempts ({last_reason})",
            index=offset,
        )

    def _parse(self, payload: dict, batch: list[str], offset: int) -> list[list[float]]:
        data = payload.get("data")
        if not isinstance(data, list) or len(data) != len(batch):
            raise ProviderError(
                f"endpoint returned {0 if not isinstance(data, list) else len(data)} "
                f"rows for {len(batch)} inputs",
                index=offset,
            )
        rows: list[None | list[float]] = [None] * len(batch)
        for item in data:
            try:
                idx = int(item["index"])
                vec = item["embedding"]
            except (KeyError, TypeError, ValueError):
                raise ProviderError("malformed row in endpoint response", index=offset)
            if not 0 <= idx < len(batch) or rows[idx] is not None:
                raise ProviderError(
                    f"endpoint response has bad or duplicate index {idx}", index=offset
                )
            rows[idx] = vec
        return rows  # type: ignore[return-value]

    def transform(self, texts) -> np.ndarray:
        self._validate()
        check_texts(texts)
        texts = list(texts)
        semaphore = threading.BoundedSemaphore(self.max_inflight)
        chunks = [
            (start, texts[start : start + self.batch_size])
            for start in range(0, len(texts), self.batch_size)
        ]

        results: dict[int, list[list[float]]] = {}
        errors: list[ProviderError] = []
        lock = threading.Lock()

        def run(start: int, batch: list[str]) -> None:
            try:
                with semaphore:
                    payload = self._post_with_retry(batch, start)
                rows = self._parse(payload, batch, start)
                with lock:
                    results[start] = rows
            except ProviderError as err:
                with lock:
                    errors.append(err)

        if len(chunks) == 1:
            start, batch = chunks[0]
            results[start] = self._parse(self._post_with_retry(batch, start), batch, start)
        else:
            threads = [
                threading.Thread(target=run, args=chunk, daemon=True) for chunk in chunks
            ]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            if errors:
                raise min(errors, key=lambda e: e.index if e.index is not None else 0)

        dim = getattr(self, "dim_", None)
        out: list[list[float]] = []
        for start, batch in chunks:
            for j, row in enumerate(results[start]):
                if not isinstance(row, list) or not row:
                    raise ProviderError("empty embedding in endpoint response", index=start + j)
                if dim is None:
                    dim = len(row)
                    self.dim_ = dim
                elif len(row) != dim:
                    raise ProviderError(
                        f"embedding dimension changed from {dim} to {len(row)}",
                        index=start + j,
                    )
                out.append(row)
        X = np.asarray(out, dtype=np.float64)
        if not np.all(np.isfinite(X)):
            raise ProviderError("endpoint returned non-finite embedding values")
        return X

    def close(self) -> None:
        client = getattr(self, "_http", None)
        if client is not None:
            client.close()
            self._http = None
