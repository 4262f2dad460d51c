"""Command-line harness: comply, unify, perturb, project, experiment, fixtures.

Configuration precedence is CLI flag, then config file (``key=value`` lines),
then ``TERMSPACE_*`` environment variables, then built-in defaults. Reports
are JSON written either to ``--out`` or stdout and contain no timestamps or
absolute paths, so a rerun with identical inputs and seed is byte-identical.
Cache traffic and warnings go to stderr only.

Exit codes: 0 success, 1 usage or validation failure, 2 provider/transport
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import datasets
from .cache import EmbeddingCache
from .clustering import cluster_report, unify, write_cluster_csv
from .compliance import ComplianceRetriever, evaluate_accuracy
from .embedding import embed_batch
from .errors import ProviderError, ValidationError
from .perturb import (
    LevenshteinRetriever,
    PerturbationSpec,
    perturbed_queries,
    write_perturbed_csv,
)
from .projection import (
    pca_2d,
    scatter_svg,
    tag_points,
    tsne_2d,
    write_projection_csv,
)
from .terms import GroundTruth, parse_specification, parse_terms
from .vectorizers import (
    CharNgramVectorizer,
    OneHotVectorizer,
    TfidfWordVectorizer,
    is_fitted,
    needs_corpus,
)

_PROVIDERS = ("one-hot", "tfidf", "char-ngram", "remote")
_ENV_PREFIX = "TERMSPACE_"
_TSNE_WARN_POINTS = 5000


class _UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the contract reserves 2 for provider
    # failures, so turn usage problems into our own exception instead
    def error(self, message):
        raise _UsageError(message)


def _parse_config_file(path: str) -> dict[str, str]:
    try:
        content = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise _UsageError(f"cannot read config file {path}: {err.strerror}") from None
    values: dict[str, str] = {}
    for lineno, raw in enumerate(content.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise _UsageError(f"config file {path} line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip().strip('"')
    return values


def _as_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise _UsageError(f"expected a boolean, got {value!r}")


class Settings:
    """Layered option lookup: CLI over config file over environment."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        config = getattr(args, "config", None)
        self.file_values = _parse_config_file(config) if config else {}

    def get(self, key: str, default=None, cast=str):
        cli = getattr(self.args, key, None)
        if cli is not None:
            return cli
        if key in self.file_values:
            raw = self.file_values[key]
        else:
            raw = os.environ.get(_ENV_PREFIX + key.upper())
            if raw is None:
                return default
        if cast is bool:
            return _as_bool(raw)
        try:
            return cast(raw)
        except (TypeError, ValueError):
            raise _UsageError(f"option {key}: cannot interpret {raw!r}") from None


def _build_provider(settings: Settings):
    name = settings.get("provider", default="char-ngram")
    if name == "one-hot":
        return OneHotVectorizer()
    if name == "tfidf":
        return TfidfWordVectorizer()
    if name == "char-ngram":
        return CharNgramVectorizer(
            ngram_range=(
                settings.get("ngram_low", default=2, cast=int),
                settings.get("ngram_high", default=3, cast=int),
            ),
            n_features=settings.get("hash_dim", default=1024, cast=int),
        )
    if name == "remote":
        from .remote import RemoteVectorizer

        return RemoteVectorizer(
            endpoint=settings.get("endpoint", default=""),
            model=settings.get("model", default=""),
            token_env=settings.get("token_env"),
            timeout=settings.get("timeout", default=30.0, cast=float),
            batch_size=settings.get("batch_size", default=64, cast=int),
            max_inflight=settings.get("max_inflight", default=4, cast=int),
        )
    raise _UsageError(f"unknown provider {name!r} (choose from {', '.join(_PROVIDERS)})")


def _cache(settings: Settings) -> EmbeddingCache | None:
    directory = settings.get("cache_dir")
    return EmbeddingCache(directory) if directory else None


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as err:
        raise ValidationError(f"cannot read {path}: {err.strerror}") from None


def _guess_format(path: str, override: str | None) -> str:
    if override:
        return override
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix == ".json":
        return "json"
    return "plain"


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _report_cache(hits: int, misses: int) -> None:
    total = hits + misses
    if total:
        pct = 100.0 * hits / total
        print(f"cache: {hits} hits, {misses} misses ({pct:.0f}% hits)", file=sys.stderr)


def _percent(value: float) -> str:
    return f"{100.0 * value:.2f}"


def _expected_id(spec, label: str) -> str:
    try:
        return spec.id_of_text(label)
    except KeyError:
        raise ValidationError(
            f"query label {label!r} does not match any specification term"
        ) from None


def cmd_comply(settings: Settings) -> int:
    args = settings.args
    spec = parse_specification(
        _read(args.spec), _guess_format(args.spec, args.format), name=Path(args.spec).stem
    )
    queries = parse_terms(_read(args.queries), _guess_format(args.queries, args.format))
    provider_name = settings.get("provider", default="char-ngram")
    use_definitions = settings.get("use_definitions", default=False, cast=bool)
    top_k = settings.get("top_k", cast=int)
    if provider_name == "levenshtein":
        retriever = LevenshteinRetriever()
    else:
        retriever = ComplianceRetriever(
            _build_provider(settings), use_definitions=use_definitions, top_k=top_k
        )
    retriever.fit(spec)
    cache = _cache(settings)
    results = retriever.retrieve_batch(list(queries), cache=cache)
    _report_cache(
        getattr(retriever, "cache_hits_", 0), getattr(retriever, "cache_misses_", 0)
    )

    payload: dict = {"spec": spec.name, "results": [r.to_dict() for r in results]}
    if queries.all_labeled():
        truth = GroundTruth({t.id: _expected_id(spec, t.label) for t in queries})
        report = evaluate_accuracy(results, truth)
        payload.update(report.to_dict())
    _emit(_dump_json(payload), args.out)
    if args.pretty:
        for r in results:
            mark = "=" if r.compliant else "->"
            print(f"{r.query.text} {mark} {r.best.text} ({r.best.score:.4f})")
        if "accuracy" in payload:
            print(f"accuracy: {_percent(payload['accuracy'])}% of n={payload['n']}")
    return 0


def cmd_unify(settings: Settings) -> int:
    args = settings.args
    terms = parse_terms(_read(args.input), _guess_format(args.input, args.format))
    k_values = settings.get("k", default="8")
    try:
        ks = [int(part) for part in str(k_values).split(",") if part.strip()]
    except ValueError:
        raise _UsageError(f"cannot parse k list {k_values!r}") from None
    if not ks:
        raise _UsageError("at least one k value is required")
    if len(ks) > 1 and not args.out:
        raise _UsageError("a k sweep needs --out to name its report files")
    seed = settings.get("seed", default=0, cast=int)
    cache = _cache(settings)
    provider = _build_provider(settings)
    for k in ks:
        result = unify(terms, provider, k, seed, cache=cache)
        _report_cache(result.cache_hits, result.cache_misses)
        report = cluster_report(result.clustering, result.purity)
        text = _dump_json(report)
        if args.out:
            out = Path(args.out)
            path = out if len(ks) == 1 else out.with_name(f"{out.stem}_k{k}{out.suffix}")
            _emit(text, str(path))
        else:
            _emit(text, None)
        if args.csv:
            csv_path = Path(args.csv)
            if len(ks) > 1:
                csv_path = csv_path.with_name(f"{csv_path.stem}_k{k}{csv_path.suffix}")
            _emit(write_cluster_csv(result.clustering, terms), str(csv_path))
        if args.pretty and result.purity is not None:
            print(
                f"k={k}: purity {_percent(result.purity.purity)}% over "
                f"{result.purity.n} terms in {result.purity.label_groups} label groups"
            )
    return 0


def cmd_perturb(settings: Settings) -> int:
    args = settings.args
    spec = parse_specification(
        _read(args.spec), _guess_format(args.spec, args.format), name=Path(args.spec).stem
    )
    pspec = PerturbationSpec(
        substitutions=settings.get("substitutions", default=1, cast=int),
        seed=settings.get("seed", default=0, cast=int),
        alphabet=settings.get("alphabet", default=PerturbationSpec().alphabet),
    )
    repeats = settings.get("repeats", default=1, cast=int)
    queries, truth = perturbed_queries(spec, pspec, repeats=repeats)
    _emit(write_perturbed_csv(queries, truth, spec), args.out)
    return 0


def cmd_project(settings: Settings) -> int:
    args = settings.args
    terms = parse_terms(_read(args.input), _guess_format(args.input, args.format))
    provider = _build_provider(settings)
    ordered = sorted(terms, key=lambda t: t.id)
    texts = [t.text for t in ordered]
    if needs_corpus(provider) and not is_fitted(provider):
        provider.fit(texts)
    cache = _cache(settings)
    batch = embed_batch(texts, provider, cache=cache)
    _report_cache(batch.cache_hits, batch.cache_misses)
    X = np.vstack([e.values for e in batch.embeddings])
    ids = [t.id for t in ordered]
    method = settings.get("method", default="pca")
    seed = settings.get("seed", default=0, cast=int)
    if method == "pca":
        points = pca_2d(X, ids=ids)
    elif method == "tsne":
        if len(ordered) > _TSNE_WARN_POINTS:
            print(
                f"warning: t-SNE on {len(ordered)} points is quadratic; "
                "expect a long run",
                file=sys.stderr,
            )
        points = tsne_2d(
            X,
            perplexity=settings.get("perplexity", default=30.0, cast=float),
            iterations=settings.get("iterations", default=1000, cast=int),
            learning_rate=settings.get("learning_rate", default=200.0, cast=float),
            seed=seed,
            ids=ids,
        )
    else:
        raise _UsageError(f"unknown method {method!r} (choose pca or tsne)")

    cluster_k = settings.get("cluster_k", cast=int)
    clusters = None
    if cluster_k is not None:
        result = unify(terms, provider, cluster_k, seed, cache=cache)
        clusters = result.clustering.assignments
    labels = {t.id: t.label for t in ordered if t.label is not None} or None
    points = tag_points(points, clusters=clusters, labels=labels)
    _emit(write_projection_csv(points, texts={t.id: t.text for t in ordered}), args.out)
    if args.svg:
        _emit(scatter_svg(points, show_labels=args.svg_labels), args.svg)
    return 0


def _experiment_compliance(settings: Settings, seed: int, cache) -> list[dict]:
    spec = datasets.noise_vocabulary()
    pspec = PerturbationSpec(substitutions=1, seed=seed)
    queries, truth = perturbed_queries(spec, pspec)
    rows = []
    retrievers = [
        ("levenshtein", LevenshteinRetriever()),
        ("one-hot", ComplianceRetriever(OneHotVectorizer())),
        ("tfidf", ComplianceRetriever(TfidfWordVectorizer())),
        ("char-ngram", ComplianceRetriever(CharNgramVectorizer())),
    ]
    for name, retriever in retrievers:
        retriever.fit(spec)
        results = retriever.retrieve_batch(list(queries), cache=cache)
        if isinstance(retriever, ComplianceRetriever):
            _report_cache(retriever.cache_hits_, retriever.cache_misses_)
        report = evaluate_accuracy(results, truth)
        rows.append(
            {
                "provider": name,
                "dataset": "noise50",
                "setting": "perturbed-1",
                "n": report.n,
                "accuracy": report.accuracy,
            }
        )

    tissue = datasets.tissue_specification()
    tissue_queries = datasets.tissue_queries()
    truth = GroundTruth({t.id: _expected_id(tissue, t.label) for t in tissue_queries})
    for use_definitions in (False, True):
        retriever = ComplianceRetriever(
            TfidfWordVectorizer(), use_definitions=use_definitions
        )
        retriever.fit(tissue)
        results = retriever.retrieve_batch(list(tissue_queries), cache=cache)
        _report_cache(retriever.cache_hits_, retriever.cache_misses_)
        report = evaluate_accuracy(results, truth)
        rows.append(
            {
                "provider": "tfidf",
                "dataset": "tissue",
                "setting": "with-definitions" if use_definitions else "no-definitions",
                "n": report.n,
                "accuracy": report.accuracy,
            }
        )
    return rows


def _experiment_unification(settings: Settings, seed: int, cache) -> list[dict]:
    terms = datasets.synonym_terms()
    k_values = settings.get("k", default="100,200,500")
    ks = [int(part) for part in str(k_values).split(",") if part.strip()]
    rows = []
    for k in ks:
        result = unify(terms, CharNgramVectorizer(), k, seed, cache=cache)
        _report_cache(result.cache_hits, result.cache_misses)
        assert result.purity is not None
        rows.append(
            {
                "provider": "char-ngram",
                "dataset": "synonyms1500",
                "k": k,
                "n": result.purity.n,
                "purity": result.purity.purity,
                "label_groups": result.purity.label_groups,
            }
        )
    return rows


def cmd_experiment(settings: Settings) -> int:
    args = settings.args
    seed = settings.get("seed", default=0, cast=int)
    cache = _cache(settings)
    track = settings.get("track", default="all")
    payload: dict = {"seed": seed}
    if track in ("compliance", "all"):
        payload["compliance"] = _experiment_compliance(settings, seed, cache)
    if track in ("unify", "all"):
        payload["unification"] = _experiment_unification(settings, seed, cache)
    if track not in ("compliance", "unify", "all"):
        raise _UsageError(f"unknown track {track!r} (choose compliance, unify, all)")
    _emit(_dump_json(payload), args.out)
    if args.pretty:
        for row in payload.get("compliance", ()):
            print(
                f"{row['provider']:<12} {row['dataset']:<10} {row['setting']:<17} "
                f"n={row['n']:<5} accuracy {_percent(row['accuracy'])}%"
            )
        for row in payload.get("unification", ()):
            print(
                f"{row['provider']:<12} {row['dataset']:<12} k={row['k']:<4} "
                f"purity {_percent(row['purity'])}%"
            )
    return 0


def cmd_fixtures(settings: Settings) -> int:
    files = datasets.write_fixture_files(settings.args.out)
    for name in sorted(files):
        print(f"{name}: {files[name]}")
    return 0


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key=value config file")
    sub.add_argument("--provider", help="one-hot | tfidf | char-ngram | remote")
    sub.add_argument("--cache-dir", dest="cache_dir", help="embedding cache directory")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--format", choices=("csv", "json", "plain"), help="input format override")
    sub.add_argument("--pretty", action="store_true", help="also print a human-readable summary")
    sub.add_argument("--ngram-low", dest="ngram_low", type=int)
    sub.add_argument("--ngram-high", dest="ngram_high", type=int)
    sub.add_argument("--hash-dim", dest="hash_dim", type=int)
    sub.add_argument("--endpoint")
    sub.add_argument("--model")
    sub.add_argument("--token-env", dest="token_env")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="termspace", description=__doc__)
    subparsers = parser.add_subparsers(dest="command", required=True)

    comply = subparsers.add_parser("comply", parents=[], help="map queries onto a vocabulary")
    comply.add_argument("--spec", required=True, help="specification file")
    comply.add_argument("--queries", required=True, help="query terms file")
    comply.add_argument("--top-k", dest="top_k", type=int)
    comply.add_argument("--use-definitions", dest="use_definitions", action="store_true", default=None)
    comply.add_argument("--out", help="report path (default: stdout)")
    _add_common(comply)
    comply.set_defaults(func=cmd_comply)

    unify_p = subparsers.add_parser("unify", help="cluster terms into k groups")
    unify_p.add_argument("--input", required=True, help="terms file")
    unify_p.add_argument("--k", help="cluster count, or comma list for a sweep")
    unify_p.add_argument("--out", help="report path; sweeps append _k<k>")
    unify_p.add_argument("--csv", help="also write assignments CSV here")
    _add_common(unify_p)
    unify_p.set_defaults(func=cmd_unify)

    perturb_p = subparsers.add_parser("perturb", help="emit a corrupted copy of a vocabulary")
    perturb_p.add_argument("--spec", required=True)
    perturb_p.add_argument("--substitutions", type=int)
    perturb_p.add_argument("--repeats", type=int)
    perturb_p.add_argument("--alphabet")
    perturb_p.add_argument("--out", help="CSV path (default: stdout)")
    _add_common(perturb_p)
    perturb_p.set_defaults(func=cmd_perturb)

    project_p = subparsers.add_parser("project", help="project terms to 2D (pca or tsne)")
    project_p.add_argument("--input", required=True)
    project_p.add_argument("--method", choices=("pca", "tsne"), default=None)
    project_p.add_argument("--perplexity", type=float)
    project_p.add_argument("--iterations", type=int)
    project_p.add_argument("--learning-rate", dest="learning_rate", type=float)
    project_p.add_argument("--cluster-k", dest="cluster_k", type=int, help="color by k-means clusters")
    project_p.add_argument("--out", help="CSV path (default: stdout)")
    project_p.add_argument("--svg", help="also write an SVG scatter here")
    project_p.add_argument("--svg-labels", dest="svg_labels", action="store_true")
    _add_common(project_p)
    project_p.set_defaults(func=cmd_project)

    experiment = subparsers.add_parser("experiment", help="run the bundled evaluation suite")
    experiment.add_argument("--track", choices=("compliance", "unify", "all"), default=None)
    experiment.add_argument("--k", help="k sweep for the unification track")
    experiment.add_argument("--out", help="summary path (default: stdout)")
    _add_common(experiment)
    experiment.set_defaults(func=cmd_experiment)

    fixtures = subparsers.add_parser("fixtures", help="write bundled fixture CSVs")
    fixtures.add_argument("--out", required=True, help="directory for fixture files")
    _add_common(fixtures)
    fixtures.set_defaults(func=cmd_fixtures)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help and friends
            return int(exc.code or 0)
        settings = Settings(args)
        return args.func(settings)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except ProviderError as err:
        print(f"provider error: {err}", file=sys.stderr)
        return 2
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
