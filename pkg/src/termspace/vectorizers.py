"""Local text vectorizers: one-hot, word TF-IDF, and hashed character n-grams.

All three are sklearn-style transformers: ``fit`` learns any corpus state and
returns ``self``; ``transform`` maps a list of strings to a dense float64
matrix with one row per text. They are pure and deterministic: the same text
and configuration always produce bitwise-identical vectors.
"""

from __future__ import annotations

import hashlib
import math
import re
from collections import Counter

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import ValidationError
from .validation import check_texts, normalize_rows

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

# FNV-1a, 64-bit: stable and portable, no dependency.
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Split on whitespace and punctuation; tokens are alphanumeric runs."""
    if lowercase:
        text = text.casefold()
    return _TOKEN_RE.findall(text)


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def _vocab_fingerprint(parts: list[str]) -> str:
    digest = hashlib.sha256("\x1f".join(parts).encode("utf-8")).hexdigest()
    return digest[:12]


class OneHotVectorizer(BaseEstimator, TransformerMixin):
    """Token-indicator vectors over a fixed vocabulary, L2-normalized.

    Every out-of-vocabulary token maps to a reserved unknown index, so any
    text with at least one alphanumeric character gets a nonzero vector.
    A single in-vocabulary word becomes the classic unit vector with one 1.
    """

    provider_id = "one-hot"

    def __init__(self, vocabulary: list[str] | None = None, lowercase: bool = True):
        self.vocabulary = vocabulary
        self.lowercase = lowercase

    def fit(self, texts=None, y=None):
        if self.vocabulary is not None:
            words = [w.casefold() if self.lowercase else w for w in self.vocabulary]
            if not words:
                raise ValidationError("explicit vocabulary must be non-empty")
            seen: dict[str, int] = {}
            for i, w in enumerate(words):
                if w in seen:
                    raise ValidationError(
                        f"vocabulary entries {seen[w]} and {i} collide on {w!r}"
                    )
                seen[w] = i
            self.vocabulary_ = seen
        else:
            if texts is None:
                raise ValidationError("fit requires texts when no vocabulary is given")
            check_texts(texts)
            tokens = sorted({t for text in texts for t in tokenize(text, self.lowercase)})
            if not tokens:
                raise ValidationError("corpus produced an empty vocabulary")
            self.vocabulary_ = {t: i for i, t in enumerate(tokens)}
        self.unknown_index_ = len(self.vocabulary_)
        self.dim_ = len(self.vocabulary_) + 1
        return self

    @property
    def model_id(self) -> str:
        self._check_fitted()
        suffix = "" if self.lowercase else "-cs"
        return f"one-hot-{_vocab_fingerprint(sorted(self.vocabulary_))}{suffix}"

    def _check_fitted(self):
        if not hasattr(self, "vocabulary_"):
            if self.vocabulary is not None:
                self.fit()
            else:
                raise NotFittedError("OneHotVectorizer must be fitted on a corpus first")

    def transform(self, texts) -> np.ndarray:
        self._check_fitted()
        check_texts(texts)
        X = np.zeros((len(texts), self.dim_), dtype=np.float64)
        for row, text in enumerate(texts):
            for token in tokenize(text, self.lowercase):
                X[row, self.vocabulary_.get(token, self.unknown_index_)] += 1.0
        return normalize_rows(X)


class TfidfWordVectorizer(BaseEstimator, TransformerMixin):
    """Word-frequency vectors offset by corpus rarity (tf × idf).

    idf(t) = ln((1 + N) / (1 + df(t))) + 1 over the fitted corpus. Tokens
    unseen at fit time are ignored at transform time, so a query sharing no
    vocabulary with the corpus embeds to the all-zero vector (which downstream
    cosine treats as similarity 0 rather than an error).
    """

    provider_id = "tfidf-word"

    def __init__(self, lowercase: bool = True, tokenizer=None):
        self.lowercase = lowercase
        self.tokenizer = tokenizer

    def _tokens(self, text: str) -> list[str]:
        if self.tokenizer is None:
            return tokenize(text, self.lowercase)
        return self.tokenizer(text.casefold() if self.lowercase else text)

    def fit(self, texts, y=None):
        check_texts(texts)
        doc_tokens = [self._tokens(t) for t in texts]
        if sum(len(toks) for toks in doc_tokens) == 0:
            raise ValidationError("corpus has zero total tokens")
        df = Counter()
        for toks in doc_tokens:
            df.update(set(toks))
        vocab = sorted(df)
        n_docs = len(doc_tokens)
        self.vocabulary_ = {t: i for i, t in enumerate(vocab)}
        self.idf_ = np.array(
            [math.log((1 + n_docs) / (1 + df[t])) + 1.0 for t in vocab], dtype=np.float64
        )
        self.n_docs_ = n_docs
        self.dim_ = len(vocab)
        return self

    @property
    def model_id(self) -> str:
        if not hasattr(self, "vocabulary_"):
            raise NotFittedError("TfidfWordVectorizer must be fitted on a corpus first")
        parts = sorted(self.vocabulary_) + [repr(v) for v in self.idf_]
        if self.tokenizer is not None:
            parts.append(getattr(self.tokenizer, "__qualname__", repr(self.tokenizer)))
        suffix = "" if self.lowercase else "-cs"
        return f"tfidf-{_vocab_fingerprint(parts)}{suffix}"

    def transform(self, texts) -> np.ndarray:
        if not hasattr(self, "vocabulary_"):
            raise NotFittedError("TfidfWordVectorizer must be fitted on a corpus first")
        check_texts(texts)
        X = np.zeros((len(texts), self.dim_), dtype=np.float64)
        for row, text in enumerate(texts):
            for token, count in Counter(self._tokens(text)).items():
                col = self.vocabulary_.get(token)
                if col is not None:
                    X[row, col] = count * self.idf_[col]
        return X


class CharNgramVectorizer(BaseEstimator, TransformerMixin):
    """Hashed character n-gram counts, the local stand-in for subword models.

    Texts are padded with boundary markers ``^``…``$`` before n-gram
    extraction; counts land in a fixed-size table via 64-bit FNV-1a and are
    L2-normalized. Needs no corpus, handles any unknown word, and is
    insensitive to small spelling noise by construction.
    """

    provider_id = "char-ngram-hashed"

    def __init__(
        self,
        ngram_range: tuple[int, int] = (2, 3),
        n_features: int = 1024,
        lowercase: bool = True,
    ):
        self.ngram_range = ngram_range
        self.n_features = n_features
        self.lowercase = lowercase

    def _validate(self):
        low, high = self.ngram_range
        if low < 1 or low > high:
            raise ValidationError(
                f"ngram_range must satisfy 1 <= low <= high, got {self.ngram_range}"
            )
        if self.n_features < 16:
            raise ValidationError(f"n_features must be >= 16, got {self.n_features}")

    def fit(self, texts=None, y=None):
        self._validate()
        self.dim_ = self.n_features
        return self

    @property
    def model_id(self) -> str:
        low, high = self.ngram_range
        suffix = "" if self.lowercase else "-cs"
        return f"char-ngram-{low}-{high}-d{self.n_features}{suffix}"

    def _indices(self, text: str) -> Counter:
        padded = "^" + (text.casefold() if self.lowercase else text) + "$"
        low, high = self.ngram_range
        counts: Counter = Counter()
        memo = self._memo
        for n in range(low, high + 1):
            for i in range(len(padded) - n + 1):
                gram = padded[i : i + n]
                idx = memo.get(gram)
                if idx is None:
                    idx = fnv1a64(gram.encode("utf-8")) % self.n_features
                    memo[gram] = idx
                counts[idx] += 1
        return counts

    @property
    def _memo(self) -> dict:
        if not hasattr(self, "_gram_memo"):
            self._gram_memo = {}
        return self._gram_memo

    def transform(self, texts) -> np.ndarray:
        self._validate()
        check_texts(texts)
        X = np.zeros((len(texts), self.n_features), dtype=np.float64)
        for row, text in enumerate(texts):
            for idx, count in self._indices(text).items():
                X[row, idx] = count
        return normalize_rows(X)


def needs_corpus(provider) -> bool:
    """True for vectorizers whose vocabulary comes from a fitted corpus."""
    return isinstance(provider, (TfidfWordVectorizer, OneHotVectorizer))


def is_fitted(provider) -> bool:
    if isinstance(provider, OneHotVectorizer) and provider.vocabulary is not None:
        return True
    return hasattr(provider, "vocabulary_") or not needs_corpus(provider)
