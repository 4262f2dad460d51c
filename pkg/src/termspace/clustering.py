"""Vocabulary unification: k-means over term embeddings plus purity scoring."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.exceptions import NotFittedError

from .embedding import embed_batch
from .errors import ValidationError
from .terms import GroundTruth, TermCollection
from .validation import as_float_matrix, normalize_rows
from .vectorizers import is_fitted, needs_corpus


def _squared_distances(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    """All pairwise squared Euclidean distances, rows of X against rows of C."""
    sq = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(C * C, axis=1)[None, :]
        - 2.0 * (X @ C.T)
    )
    return np.maximum(sq, 0.0)


class KMeans(BaseEstimator, ClusterMixin):
    """Lloyd iteration with greedy k-means++ seeding, from scratch.

    The objective (sum of squared distances to assigned centroids) is tracked
    every iteration and must never increase; iteration stops when its relative
    improvement drops below ``rel_tol`` or after ``max_iter`` rounds. A
    cluster that loses all members is re-seeded with the point currently
    farthest from its own centroid, so all k clusters stay live.
    """

    def __init__(
        self,
        n_clusters: int = 8,
        *,
        seed: int = 0,
        max_iter: int = 300,
        rel_tol: float = 1e-6,
    ):
        self.n_clusters = n_clusters
        self.seed = seed
        self.max_iter = max_iter
        self.rel_tol = rel_tol

    def _init_centroids(self, X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        n = X.shape[0]
        k = self.n_clusters
        centroids = np.empty((k, X.shape[1]), dtype=np.float64)
        first = int(rng.integers(n))
        centroids[0] = X[first]
        closest = _squared_distances(X, centroids[0:1])[:, 0]
        for i in range(1, k):
            total = float(closest.sum())
            if total <= 0.0:
                # all remaining mass sits on already-chosen points
                idx = int(rng.integers(n))
            else:
                r = float(rng.random()) * total
                idx = int(np.searchsorted(np.cumsum(closest), r, side="right"))
                idx = min(idx, n - 1)
            centroids[i] = X[idx]
            closest = np.minimum(closest, _squared_distances(X, centroids[i : i + 1])[:, 0])
        return centroids

    def fit(self, X, y=None):
        X = as_float_matrix(X, name="points")
        n = X.shape[0]
        k = self.n_clusters
        if not 1 <= k <= n:
            raise ValidationError(f"n_clusters must be in [1, {n}], got {k}")
        if self.max_iter < 1:
            raise ValidationError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.rel_tol < 0:
            raise ValidationError(f"rel_tol must be >= 0, got {self.rel_tol}")

        rng = np.random.default_rng(self.seed)
        centroids = self._init_centroids(X, rng)
        history: list[float] = []
        labels = np.zeros(n, dtype=np.int64)
        for iteration in range(1, self.max_iter + 1):
            sq = _squared_distances(X, centroids)
            labels = np.argmin(sq, axis=1)
            objective = float(sq[np.arange(n), labels].sum())

            # repair any cluster that lost all members before updating means
            empty = [c for c in range(k) if not np.any(labels == c)]
            if empty:
                worst = sq[np.arange(n), labels]
                for c in empty:
                    idx = int(np.argmax(worst))
                    centroids[c] = X[idx]
                    labels[idx] = c
                    worst[idx] = -1.0
                sq = _squared_distances(X, centroids)
                labels = np.argmin(sq, axis=1)
                objective = float(sq[np.arange(n), labels].sum())

            if history and objective > history[-1] + 1e-9 * max(1.0, history[-1]):
                raise AssertionError(
                    f"objective increased: {history[-1]!r} -> {objective!r}"
                )
            improved = (
                not history
                or history[-1] == 0.0
                or (history[-1] - objective) / history[-1] >= self.rel_tol
            )
            history.append(objective)
            if history[-1] == 0.0 or (len(history) > 1 and not improved):
                break
            for c in range(k):
                members = X[labels == c]
                if len(members):
                    centroids[c] = members.mean(axis=0)
            if iteration == self.max_iter:
                break

        # final assignment must be consistent with the final centroids
        sq = _squared_distances(X, centroids)
        labels = np.argmin(sq, axis=1)
        objective = float(sq[np.arange(n), labels].sum())
        if history and objective <= history[-1]:
            history[-1] = objective

        self.cluster_centers_ = centroids
        self.labels_ = labels
        self.inertia_ = objective
        self.n_iter_ = len(history)
        self.objective_history_ = tuple(history)
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "cluster_centers_"):
            raise NotFittedError("KMeans must be fitted first")
        X = as_float_matrix(X, name="points")
        return np.argmin(_squared_distances(X, self.cluster_centers_), axis=1)


@dataclass(frozen=True)
class Clustering:
    """A finished clustering: per-term assignments plus diagnostics."""

    k: int
    assignments: dict[str, int]
    centroids: np.ndarray
    objective: float
    iterations: int
    seed: int
    objective_history: tuple[float, ...] = field(default=(), repr=False)

    def members(self, cluster: int) -> list[str]:
        return [tid for tid, c in self.assignments.items() if c == cluster]


@dataclass(frozen=True)
class ClusterSummary:
    index: int
    size: int
    majority_label: str
    majority_count: int


@dataclass(frozen=True)
class PurityReport:
    """Majority-vote agreement between clusters and ground-truth labels.

    Purity is the fraction of points whose cluster's majority label matches
    their own; ties on the majority vote go to the lexicographically smallest
    label so the report is deterministic. ``label_groups`` counts the distinct
    ground-truth labels, which is the natural reference point for choosing k.
    """

    purity: float
    n: int
    k: int
    label_groups: int
    clusters: tuple[ClusterSummary, ...]

    def to_dict(self) -> dict:
        return {
            "purity": self.purity,
            "n": self.n,
            "k": self.k,
            "label_groups": self.label_groups,
            "clusters": [
                {
                    "index": c.index,
                    "size": c.size,
                    "majority_label": c.majority_label,
                    "majority_count": c.majority_count,
                }
                for c in self.clusters
            ],
        }


def kmeans(
    vectors,
    k: int,
    seed: int = 0,
    *,
    max_iter: int = 300,
    rel_tol: float = 1e-6,
    ids: list[str] | None = None,
) -> Clustering:
    """Cluster raw vectors; ids default to positional decimal strings."""
    X = as_float_matrix(vectors, name="points")
    model = KMeans(n_clusters=k, seed=seed, max_iter=max_iter, rel_tol=rel_tol).fit(X)
    if ids is None:
        ids = [str(i) for i in range(X.shape[0])]
    if len(ids) != X.shape[0]:
        raise ValidationError(f"got {len(ids)} ids for {X.shape[0]} points")
    return Clustering(
        k=k,
        assignments={tid: int(c) for tid, c in zip(ids, model.labels_)},
        centroids=model.cluster_centers_,
        objective=model.inertia_,
        iterations=model.n_iter_,
        seed=seed,
        objective_history=model.objective_history_,
    )


def purity(clustering: Clustering, truth: GroundTruth) -> PurityReport:
    """Score a clustering against ground-truth group labels."""
    if not clustering.assignments:
        raise ValidationError("clustering has no assignments")
    labels = {tid: truth.expected(tid) for tid in clustering.assignments}
    summaries = []
    agreeing = 0
    for c in range(clustering.k):
        members = clustering.members(c)
        if not members:
            continue
        counts: dict[str, int] = {}
        for tid in members:
            counts[labels[tid]] = counts.get(labels[tid], 0) + 1
        top = max(counts.values())
        majority = min(label for label, count in counts.items() if count == top)
        agreeing += top
        summaries.append(
            ClusterSummary(index=c, size=len(members), majority_label=majority, majority_count=top)
        )
    n = len(clustering.assignments)
    return PurityReport(
        purity=agreeing / n,
        n=n,
        k=clustering.k,
        label_groups=len(set(labels.values())),
        clusters=tuple(summaries),
    )


@dataclass(frozen=True)
class UnifyResult:
    """Clustering plus optional purity; unpacks as that pair."""

    clustering: Clustering
    purity: PurityReport | None
    cache_hits: int
    cache_misses: int

    def __iter__(self):
        return iter((self.clustering, self.purity))


def unify(
    terms: TermCollection,
    provider,
    k: int,
    seed: int = 0,
    *,
    max_iter: int = 300,
    rel_tol: float = 1e-6,
    cache=None,
) -> UnifyResult:
    """Embed terms, L2-normalize, and cluster into k groups.

    Terms are processed in id order regardless of input order, so the result
    depends only on the set of terms, the provider, k, and the seed. Purity is
    reported when every term carries a label, otherwise left as None.
    """
    ordered = sorted(terms, key=lambda t: t.id)
    texts = [t.text for t in ordered]
    if needs_corpus(provider) and not is_fitted(provider):
        provider.fit(texts)
    batch = embed_batch(texts, provider, cache=cache)
    X = normalize_rows(np.vstack([e.values for e in batch.embeddings]))
    clustering = kmeans(
        X, k, seed, max_iter=max_iter, rel_tol=rel_tol, ids=[t.id for t in ordered]
    )
    report = None
    if terms.all_labeled():
        truth = GroundTruth({t.id: t.label for t in ordered})
        report = purity(clustering, truth)
    return UnifyResult(
        clustering=clustering,
        purity=report,
        cache_hits=batch.cache_hits,
        cache_misses=batch.cache_misses,
    )


def cluster_report(clustering: Clustering, purity_report: PurityReport | None = None) -> dict:
    """JSON-ready dictionary describing a clustering run."""
    majorities = {}
    if purity_report is not None:
        majorities = {c.index: c.majority_label for c in purity_report.clusters}
    clusters = []
    for c in range(clustering.k):
        entry: dict = {"index": c, "term_ids": clustering.members(c)}
        if c in majorities:
            entry["majority_label"] = majorities[c]
        clusters.append(entry)
    report = {
        "k": clustering.k,
        "seed": clustering.seed,
        "objective": clustering.objective,
        "iterations": clustering.iterations,
        "clusters": clusters,
    }
    if purity_report is not None:
        report["purity"] = purity_report.purity
        report["label_groups"] = purity_report.label_groups
    return report


def write_cluster_csv(clustering: Clustering, terms: TermCollection) -> str:
    """Render assignments as CSV text: one row per term, cluster last."""
    import csv
    import io

    labeled = any(t.label is not None for t in terms)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["term_id", "term_text", "cluster"] + (["label"] if labeled else [])
    writer.writerow(header)
    for tid in clustering.assignments:
        term = terms.by_id(tid)
        row = [term.id, term.text, clustering.assignments[tid]]
        if labeled:
            row.append(term.label or "")
        writer.writerow(row)
    return buf.getvalue()
