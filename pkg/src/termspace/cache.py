"""Append-only embedding cache, one JSON-lines file per provider."""

from __future__ import annotations

import fcntl
import hashlib
import json
import os
import time
from pathlib import Path

import numpy as np

from .errors import ValidationError


def cache_key(provider_id: str, model_id: str, text: str) -> str:
    """sha256 over provider, model, and text, NUL-separated."""
    payload = "\x00".join((provider_id, model_id, text)).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


class EmbeddingCache:
    """Persistent text-to-vector store keyed by (provider, model, text).

    Layout: one file per provider id under ``directory``, each line a JSON
    object with the key, the vector values, and a creation timestamp. Entries
    are only ever appended; appends are serialized with an advisory lock so
    concurrent readers stay safe. A truncated final line (an interrupted
    append) is tolerated and skipped on load.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self._tables: dict[str, dict[str, np.ndarray]] = {}

    def _path(self, provider_id: str) -> Path:
        if not provider_id or "/" in provider_id or provider_id in (".", ".."):
            raise ValidationError(f"unusable provider id for cache file: {provider_id!r}")
        return self.directory / provider_id

    def _table(self, provider_id: str) -> dict[str, np.ndarray]:
        table = self._tables.get(provider_id)
        if table is None:
            table = self._load(provider_id)
            self._tables[provider_id] = table
        return table

    def _load(self, provider_id: str) -> dict[str, np.ndarray]:
        path = self._path(provider_id)
        table: dict[str, np.ndarray] = {}
        if not path.exists():
            return table
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().split("\n")
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
                key = entry["key"]
                values = np.asarray(entry["values"], dtype=np.float64)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                if lineno == len(lines) or (lineno == len(lines) - 1 and not lines[-1]):
                    continue
                raise ValidationError(
                    f"corrupt cache entry in {path.name} at line {lineno}"
                )
            values.setflags(write=False)
            table[key] = values
        return table

    def lookup(self, provider_id: str, model_id: str, text: str) -> np.ndarray | None:
        return self._table(provider_id).get(cache_key(provider_id, model_id, text))

    def store(self, provider_id: str, model_id: str, text: str, values) -> None:
        key = cache_key(provider_id, model_id, text)
        table = self._table(provider_id)
        if key in table:
            return
        vec = np.asarray(values, dtype=np.float64)
        line = json.dumps(
            {"key": key, "values": vec.tolist(), "created_at": time.time()},
            ensure_ascii=False,
        )
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self._path(provider_id)
        with open(path, "a", encoding="utf-8") as fh:
            fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
            try:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            finally:
                fcntl.flock(fh.fileno(), fcntl.LOCK_UN)
        vec = vec.copy()
        vec.setflags(write=False)
        table[key] = vec

    def __len__(self) -> int:
        return sum(len(t) for t in self._tables.values())
