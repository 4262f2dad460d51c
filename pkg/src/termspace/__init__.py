"""Curation toolkit for messy metadata terms.

Three workflows built on pluggable text embeddings: compliance (map a free
text term onto a permissible vocabulary), unification (cluster synonymous
terms), and the simulation/evaluation harness around them (perturbation
noise, edit-distance baseline, accuracy and purity metrics, 2D projections).
"""

from .cache import EmbeddingCache, cache_key
from .clustering import (
    Clustering,
    KMeans,
    PurityReport,
    UnifyResult,
    kmeans,
    purity,
    unify,
)
from .compliance import (
    AccuracyReport,
    Candidate,
    ComplianceResult,
    ComplianceRetriever,
    augment_with_definitions,
    comply,
    evaluate_accuracy,
)
from .datasets import (
    noise_vocabulary,
    synonym_terms,
    tissue_queries,
    tissue_specification,
    write_fixture_files,
)
from .embedding import (
    BatchResult,
    Embedding,
    build_tfidf_provider,
    cosine_similarity,
    embed,
    embed_batch,
    make_provider,
)
from .errors import (
    EmptyInputError,
    ParseError,
    ProviderError,
    TermspaceError,
    TransientProviderError,
    ValidationError,
)
from .perturb import (
    LevenshteinRetriever,
    PerturbationSpec,
    levenshtein,
    levenshtein_retrieve,
    perturb,
    perturbed_queries,
    simulate_compliance_experiment,
)
from .projection import (
    PCA2D,
    ProjectedPoint,
    TSNE2D,
    joint_probabilities,
    pca_2d,
    scatter_svg,
    tsne_2d,
)
from .remote import RemoteVectorizer
from .terms import (
    GroundTruth,
    SpecificationSet,
    Term,
    TermCollection,
    parse_specification,
    parse_terms,
    serialize_terms,
)
from .vectorizers import (
    CharNgramVectorizer,
    OneHotVectorizer,
    TfidfWordVectorizer,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport",
    "BatchResult",
    "Candidate",
    "CharNgramVectorizer",
    "Clustering",
    "ComplianceResult",
    "ComplianceRetriever",
    "Embedding",
    "EmbeddingCache",
    "EmptyInputError",
    "GroundTruth",
    "KMeans",
    "LevenshteinRetriever",
    "OneHotVectorizer",
    "PCA2D",
    "ParseError",
    "PerturbationSpec",
    "ProjectedPoint",
    "ProviderError",
    "PurityReport",
    "RemoteVectorizer",
    "SpecificationSet",
    "TSNE2D",
    "Term",
    "TermCollection",
    "TermspaceError",
    "TfidfWordVectorizer",
    "TransientProviderError",
    "UnifyResult",
    "ValidationError",
    "augment_with_definitions",
    "build_tfidf_provider",
    "cache_key",
    "comply",
    "cosine_similarity",
    "embed",
    "embed_batch",
    "evaluate_accuracy",
    "joint_probabilities",
    "kmeans",
    "levenshtein",
    "levenshtein_retrieve",
    "make_provider",
    "noise_vocabulary",
    "parse_specification",
    "parse_terms",
    "pca_2d",
    "perturb",
    "perturbed_queries",
    "purity",
    "scatter_svg",
    "serialize_terms",
    "simulate_compliance_experiment",
    "synonym_terms",
    "tissue_queries",
    "tissue_specification",
    "tokenize",
    "tsne_2d",
    "unify",
    "write_fixture_files",
]
