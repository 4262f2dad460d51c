"""Mapping free-text terms onto a permissible vocabulary by vector similarity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .embedding import embed_batch
from .errors import ValidationError
from .terms import GroundTruth, SpecificationSet, Term
from .validation import normalize_rows
from .vectorizers import is_fitted, needs_corpus


@dataclass(frozen=True)
class Candidate:
    """One ranked vocabulary entry: its id, display text, and score."""

    id: str
    text: str
    score: float


@dataclass(frozen=True)
class ComplianceResult:
    """Ranked vocabulary candidates for one query term.

    ``best`` is the top-ranked candidate id. ``compliant`` records whether the
    query text already equals the best candidate exactly, modulo surrounding
    whitespace; a near-miss match still reports the candidate but flags the
    query as non-compliant so it can be corrected upstream.
    """

    query: Term
    candidates: tuple[Candidate, ...]

    def __post_init__(self):
        if not self.candidates:
            raise ValidationError("a compliance result needs at least one candidate")

    @property
    def best(self) -> Candidate:
        return self.candidates[0]

    @property
    def compliant(self) -> bool:
        return self.query.text.strip() == self.best.text.strip()

    def to_dict(self) -> dict:
        return {
            "query": self.query.text,
            "candidates": [
                {"term": c.text, "id": c.id, "score": float(c.score)}
                for c in self.candidates
            ],
            "best": self.best.id,
            "compliant": self.compliant,
        }


@dataclass(frozen=True)
class QueryOutcome:
    query_id: str
    query_text: str
    predicted_id: str
    expected_id: str

    @property
    def hit(self) -> bool:
        return self.predicted_id == self.expected_id


@dataclass(frozen=True)
class AccuracyReport:
    """Fraction of queries whose best candidate matches the expected entry."""

    outcomes: tuple[QueryOutcome, ...]

    def __post_init__(self):
        if not self.outcomes:
            raise ValidationError("accuracy is undefined for zero queries")

    @property
    def n(self) -> int:
        return len(self.outcomes)

    @property
    def correct(self) -> int:
        return sum(1 for o in self.outcomes if o.hit)

    @property
    def accuracy(self) -> float:
        return self.correct / self.n

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "correct": self.correct,
            "accuracy": self.accuracy,
            "outcomes": [
                {
                    "query_id": o.query_id,
                    "query": o.query_text,
                    "predicted": o.predicted_id,
                    "expected": o.expected_id,
                    "hit": o.hit,
                }
                for o in self.outcomes
            ],
        }


def candidate_text(term: Term, use_definitions: bool) -> str:
    """The text a vocabulary entry is embedded under.

    With definitions enabled, an entry that has one embeds as the term text,
    a single space, and the definition; entries without definitions and query
    terms always embed as bare text.
    """
    if use_definitions and term.definition:
        return f"{term.text} {term.definition}"
    return term.text


def augment_with_definitions(spec: SpecificationSet) -> list[str]:
    """Embed-texts for every entry, definitions appended where present."""
    return [candidate_text(term, True) for term in spec.terms]


class ComplianceRetriever(BaseEstimator):
    """Nearest-vocabulary lookup under a pluggable embedding provider.

    ``fit`` embeds the permissible vocabulary (fitting corpus-based providers
    on the vocabulary texts first, if needed); ``retrieve`` ranks all entries
    against a query by cosine similarity, highest first, breaking ties in
    favor of the entry listed earlier in the vocabulary.
    """

    def __init__(self, provider, *, use_definitions: bool = False, top_k: int | None = None):
        self.provider = provider
        self.use_definitions = use_definitions
        self.top_k = top_k

    def fit(self, spec: SpecificationSet, y=None):
        if self.top_k is not None and self.top_k < 1:
            raise ValidationError(f"top_k must be >= 1, got {self.top_k}")
        texts = [candidate_text(t, self.use_definitions) for t in spec.terms]
        if needs_corpus(self.provider) and not is_fitted(self.provider):
            self.provider.fit(texts)
        matrix = np.vstack([e.values for e in embed_batch(texts, self.provider).embeddings])
        self.spec_ = spec
        self.matrix_ = normalize_rows(matrix)
        return self

    def _check_fitted(self):
        if not hasattr(self, "spec_"):
            raise ValidationError("retriever must be fitted on a specification set first")

    def _scores(self, query_matrix: np.ndarray) -> np.ndarray:
        return normalize_rows(query_matrix) @ self.matrix_.T

    def _result(self, query: Term, scores: np.ndarray) -> ComplianceResult:
        order = np.argsort(-scores, kind="stable")
        keep = len(order) if self.top_k is None else min(self.top_k, len(order))
        candidates = tuple(
            Candidate(
                id=self.spec_.terms[i].id,
                text=self.spec_.terms[i].text,
                score=float(scores[i]),
            )
            for i in order[:keep]
        )
        return ComplianceResult(query=query, candidates=candidates)

    def _as_term(self, query) -> Term:
        if isinstance(query, Term):
            return query
        return Term(id=str(query), text=str(query))

    def retrieve(self, query) -> ComplianceResult:
        return self.retrieve_batch([query])[0]

    def retrieve_batch(self, queries, cache=None) -> list[ComplianceResult]:
        self._check_fitted()
        terms = [self._as_term(q) for q in queries]
        if not terms:
            raise ValidationError("retrieve_batch requires at least one query")
        batch = embed_batch([t.text for t in terms], self.provider, cache=cache)
        self.cache_hits_ = batch.cache_hits
        self.cache_misses_ = batch.cache_misses
        matrix = np.vstack([e.values for e in batch.embeddings])
        all_scores = self._scores(matrix)
        return [self._result(t, all_scores[i]) for i, t in enumerate(terms)]

    def predict(self, queries) -> list[str]:
        """Best-candidate ids, one per query."""
        return [r.best.id for r in self.retrieve_batch(queries)]


def comply(
    query,
    spec: SpecificationSet,
    provider,
    *,
    use_definitions: bool = False,
    top_k: int | None = None,
) -> ComplianceResult:
    """One-shot retrieval: fit on the vocabulary, then rank it for the query."""
    retriever = ComplianceRetriever(provider, use_definitions=use_definitions, top_k=top_k)
    return retriever.fit(spec).retrieve(query)


def evaluate_accuracy(results, truth: GroundTruth) -> AccuracyReport:
    """Score retrieval results against the expected vocabulary ids."""
    results = list(results)
    if not results:
        raise ValidationError("accuracy is undefined for zero queries")
    outcomes = []
    for r in results:
        expected = truth.expected(r.query.id)
        outcomes.append(
            QueryOutcome(
                query_id=r.query.id,
                query_text=r.query.text,
                predicted_id=r.best.id,
                expected_id=expected,
            )
        )
    return AccuracyReport(outcomes=tuple(outcomes))
