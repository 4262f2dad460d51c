"""Embedding values, cosine similarity, and the batch embedding front door."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ProviderError, ValidationError
from .validation import as_float_vector, check_same_dim, check_text
from .vectorizers import (
    CharNgramVectorizer,
    OneHotVectorizer,
    TfidfWordVectorizer,
    is_fitted,
)


@dataclass(frozen=True, eq=False)
class Embedding:
    """A single vector plus the identity of whatever produced it."""

    values: np.ndarray
    provider_id: str
    model_id: str
    dim: int = field(init=False)

    def __post_init__(self):
        values = as_float_vector(self.values, name="embedding values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dim", int(values.shape[0]))


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two vectors.

    Either argument may be an Embedding or any 1-D array-like. If either
    vector has zero norm the similarity is 0.0 by convention; mismatched
    dimensions are an error.
    """
    va = a.values if isinstance(a, Embedding) else as_float_vector(a)
    vb = b.values if isinstance(b, Embedding) else as_float_vector(b)
    check_same_dim(va, vb)
    # prescale each vector by its largest magnitude so the squared entries
    # stay in the normal float range: without this, entries beyond ~1e154
    # overflow and entries below ~1e-154 square into subnormals, both of
    # which wreck the quotient long before the inputs are degenerate
    ma = float(np.max(np.abs(va)))
    mb = float(np.max(np.abs(vb)))
    if ma == 0.0 or mb == 0.0:
        return 0.0
    sa = va / ma
    sb = vb / mb
    na = float(np.linalg.norm(sa))
    nb = float(np.linalg.norm(sb))
    return float(np.dot(sa, sb) / (na * nb))


@dataclass(frozen=True)
class BatchResult:
    """Embeddings in input order plus cache traffic counts for the call."""

    embeddings: tuple[Embedding, ...]
    cache_hits: int
    cache_misses: int


def _provider_dim(provider, fallback: int) -> int:
    dim = getattr(provider, "dim_", None)
    return int(dim) if dim is not None else fallback

def embed(text: str, provider) -> Embedding:
    """Embed one text. Empty or whitespace-only input is rejected."""
    check_text(text)
    if not is_fitted(provider):
        raise ValidationError(
            f"provider {provider.provider_id!r} must be fitted on a corpus before embedding"
        )
    row = provider.transform([text])[0]
    return Embedding(values=row, provider_id=provider.provider_id, model_id=provider.model_id)


def embed_batch(texts, provider, cache=None) -> BatchResult:
    """Embed many texts at once, deduplicating and consulting the cache.

    Repeated texts are embedded once; every occurrence after the first counts
    as a hit, as does anything served from the persistent cache. Computed
    vectors are written back to the cache before returning. A provider failure
    for a batch is reported with the index of the offending text.
    """
    texts = list(texts)
    for i, t in enumerate(texts):
        check_text(t, index=i)
    if not texts:
        raise ValidationError("embed_batch requires at least one text")
    if not is_fitted(provider):
        raise ValidationError(
            f"provider {provider.provider_id!r} must be fitted on a corpus before embedding"
        )

    provider_id = provider.provider_id
    model_id = provider.model_id

    known: dict[str, np.ndarray] = {}
    from_cache: set[str] = set()
    first_occurrence: dict[str, int] = {}
    pending: list[str] = []
    for i, text in enumerate(texts):
        if text in first_occurrence:
            continue
        first_occurrence[text] = i
        if cache is not None:
            found = cache.lookup(provider_id, model_id, text)
            if found is not None:
                known[text] = found
                from_cache.add(text)
                continue
        pending.append(text)

    if pending:
        try:
            computed = provider.transform(pending)
        except ProviderError as err:
            if err.index is not None and 0 <= err.index < len(pending):
                err.index = first_occurrence[pending[err.index]]
            raise
        for text, row in zip(pending, computed):
            known[text] = np.asarray(row, dtype=np.float64)
            if cache is not None:
                cache.store(provider_id, model_id, text, known[text])

    dim = _provider_dim(provider, len(next(iter(known.values()))))
    hits = 0
    misses = 0
    counted_miss: set[str] = set()
    embeddings = []
    for text in texts:
        values = known[text]
        if values.shape[0] != dim:
            raise ProviderError(
                f"provider returned dimension {values.shape[0]}, expected {dim}",
                index=first_occurrence[text],
            )
        if text in from_cache or text in counted_miss:
            hits += 1
        else:
            misses += 1
            counted_miss.add(text)
        embeddings.append(Embedding(values=values, provider_id=provider_id, model_id=model_id))
    return BatchResult(embeddings=tuple(embeddings), cache_hits=hits, cache_misses=misses)


def build_tfidf_provider(corpus, tokenizer=None, lowercase: bool = True) -> TfidfWordVectorizer:
    """Fit a TF-IDF provider on a term collection (or any list of texts)."""
    texts = corpus.texts if hasattr(corpus, "texts") else list(corpus)
    return TfidfWordVectorizer(lowercase=lowercase, tokenizer=tokenizer).fit(texts)


def make_provider(kind: str, **params):
    """Build a vectorizer by name with eager parameter validation.

    Kinds: "one-hot", "tfidf-word", "char-ngram-hashed", "remote".
    """
    if kind == "one-hot":
        provider = OneHotVectorizer(**params)
        if provider.vocabulary is not None:
            provider.fit()
        return provider
    if kind == "tfidf-word":
        return TfidfWordVectorizer(**params)
    if kind == "char-ngram-hashed":
        provider = CharNgramVectorizer(**params)
        provider._validate()
        return provider
    if kind == "remote":
        from .remote import RemoteVectorizer

        provider = RemoteVectorizer(**params)
        provider._validate()
        return provider
    raise ValidationError(f"unknown provider kind {kind!r}")
