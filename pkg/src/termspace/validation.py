"""Input validation helpers used by the estimators and pipeline functions."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError


def check_text(text: str, *, index: int | None = None) -> str:
    """Require a string that is non-empty after trimming; returns it unchanged."""
    if not isinstance(text, str):
        raise ValidationError(f"expected a string, got {type(text).__name__}", index=index)
    if not text.strip():
        raise ValidationError("text must be non-empty after trimming", index=index)
    return text


def check_texts(texts: Sequence[str]) -> Sequence[str]:
    for i, t in enumerate(texts):
        check_text(t, index=i)
    return texts


def as_float_matrix(X, *, name: str = "X") -> np.ndarray:
    """Coerce to a finite 2-D float64 array."""
    A = np.asarray(X, dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise ValidationError(f"{name} must be 2-dimensional, got ndim={A.ndim}")
    if A.size == 0:
        raise ValidationError(f"{name} must be non-empty")
    if not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} contains non-finite values")
    return A


def as_float_vector(v, *, name: str = "vector") -> np.ndarray:
    a = np.asarray(v, dtype=np.float64).ravel()
    if a.size == 0:
        raise ValidationError(f"{name} must be non-empty")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains non-finite values")
    return a


def check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[-1] != b.shape[-1]:
        raise ValidationError(
            f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}"
        )


def check_positive_int(value: int, *, name: str) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
        raise ValidationError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_unique(items: Iterable[str], *, name: str) -> None:
    seen: dict[str, int] = {}
    for i, item in enumerate(items):
        if item in seen:
            raise ValidationError(
                f"duplicate {name} {item!r} at records {seen[item]} and {i}"
            )
        seen[item] = i


def normalize_rows(X: np.ndarray) -> np.ndarray:
    """L2-normalize each row; all-zero rows are left as zero."""
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return X / safe
