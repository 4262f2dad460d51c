"""Character-level perturbation of terms and an edit-distance baseline.

Used to simulate messy metadata: each query is a vocabulary term with a fixed
number of characters swapped out, and retrieval is asked to map it back. The
edit-distance retriever is the classical baseline such noise is easiest for.
"""

from __future__ import annotations

import hashlib
import random
import string
from dataclasses import dataclass

from sklearn.base import BaseEstimator

from .compliance import AccuracyReport, Candidate, ComplianceResult, evaluate_accuracy
from .errors import ValidationError
from .terms import GroundTruth, SpecificationSet, Term, TermCollection


@dataclass(frozen=True)
class PerturbationSpec:
    """How to corrupt a term: how many substitutions, from which alphabet."""

    substitutions: int = 1
    alphabet: str = string.ascii_lowercase
    seed: int = 0

    def __post_init__(self):
        if self.substitutions < 1:
            raise ValidationError(
                f"substitutions must be >= 1, got {self.substitutions}"
            )
        if not self.alphabet:
            raise ValidationError("alphabet must be non-empty")


def _derived_rng(seed: int, *parts: str) -> random.Random:
    payload = "\x1f".join((str(seed), *parts)).encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def perturb(term: Term, spec: PerturbationSpec) -> Term:
    """Replace exactly ``spec.substitutions`` distinct character positions.

    Positions are drawn uniformly without replacement; each replacement is
    drawn uniformly from the alphabet minus the original character, so the
    perturbed text always differs at every chosen position and keeps its
    length. Deterministic per (seed, term id, term text). Asking for more
    substitutions than the text has characters is an error.
    """
    text = term.text
    if spec.substitutions > len(text):
        raise ValidationError(
            f"cannot substitute {spec.substitutions} positions in "
            f"{text!r} (length {len(text)})"
        )
    rng = _derived_rng(spec.seed, term.id, text)
    positions = sorted(rng.sample(range(len(text)), spec.substitutions))
    chars = list(text)
    for pos in positions:
        pool = [c for c in spec.alphabet if c != chars[pos]]
        if not pool:
            raise ValidationError(
                f"alphabet {spec.alphabet!r} offers no replacement for "
                f"{chars[pos]!r} at position {pos}"
            )
        chars[pos] = pool[rng.randrange(len(pool))]
    return Term(id=term.id, text="".join(chars), definition=term.definition, label=term.label)


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance over Unicode code points, two-row DP."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current[j] = min(
                previous[j] + 1,      # deletion
                current[j - 1] + 1,   # insertion
                previous[j - 1] + cost,
            )
        previous = current
    return previous[-1]


class LevenshteinRetriever(BaseEstimator):
    """Rank the vocabulary by edit distance to the query, closest first.

    Scores are negated distances so that higher is better, matching the
    similarity convention of the embedding retriever. Ties break toward the
    entry listed earlier in the vocabulary.
    """

    def fit(self, spec: SpecificationSet, y=None):
        self.spec_ = spec
        return self

    def _check_fitted(self):
        if not hasattr(self, "spec_"):
            raise ValidationError("retriever must be fitted on a specification set first")

    def retrieve(self, query) -> ComplianceResult:
        self._check_fitted()
        term = query if isinstance(query, Term) else Term(id=str(query), text=str(query))
        scored = [
            Candidate(id=t.id, text=t.text, score=float(-levenshtein(term.text, t.text)))
            for t in self.spec_.terms
        ]
        scored.sort(key=lambda c: -c.score)  # stable: equal distances keep order
        return ComplianceResult(query=term, candidates=tuple(scored))

    def retrieve_batch(self, queries, cache=None) -> list[ComplianceResult]:
        queries = list(queries)
        if not queries:
            raise ValidationError("retrieve_batch requires at least one query")
        return [self.retrieve(q) for q in queries]

    def predict(self, queries) -> list[str]:
        return [r.best.id for r in self.retrieve_batch(queries)]


def levenshtein_retrieve(query, spec: SpecificationSet) -> ComplianceResult:
    """One-shot edit-distance ranking of the vocabulary for a query."""
    return LevenshteinRetriever().fit(spec).retrieve(query)


def perturbed_queries(
    spec: SpecificationSet,
    pspec: PerturbationSpec,
    repeats: int = 1,
) -> tuple[TermCollection, GroundTruth]:
    """Corrupt every vocabulary entry ``repeats`` times.

    Repeat 0 uses the seed as given so a single pass is reproducible on its
    own; later repeats derive fresh seeds from the repeat number. Query labels
    carry the original term text, so an exported query set replays as a
    labeled dataset with no side files.
    """
    if repeats < 1:
        raise ValidationError(f"repeats must be >= 1, got {repeats}")
    queries: list[Term] = []
    mapping: dict[str, str] = {}
    for rep in range(repeats):
        if rep == 0:
            pspec_r = pspec
        else:
            rng = _derived_rng(pspec.seed, "repeat", str(rep))
            pspec_r = PerturbationSpec(
                substitutions=pspec.substitutions,
                alphabet=pspec.alphabet,
                seed=rng.getrandbits(63),
            )
        for term in spec.terms:
            noisy = perturb(term, pspec_r)
            qid = term.id if rep == 0 else f"{term.id}.{rep}"
            queries.append(
                Term(id=qid, text=noisy.text, definition=None, label=term.text)
            )
            mapping[qid] = term.id
    return TermCollection(terms=tuple(queries)), GroundTruth(mapping)


def simulate_compliance_experiment(
    spec: SpecificationSet,
    pspec: PerturbationSpec,
    retriever,
    repeats: int = 1,
    cache=None,
) -> AccuracyReport:
    """Perturb the vocabulary, retrieve every query, and score the result."""
    queries, truth = perturbed_queries(spec, pspec, repeats)
    retriever.fit(spec)
    results = retriever.retrieve_batch(list(queries), cache=cache)
    return evaluate_accuracy(results, truth)


def write_perturbed_csv(queries: TermCollection, truth: GroundTruth, spec: SpecificationSet) -> str:
    """Render perturbed queries as ``query,expected`` CSV text."""
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["query", "expected"])
    for q in queries:
        writer.writerow([q.text, spec.by_id(truth.expected(q.id)).text])
    return buf.getvalue()
