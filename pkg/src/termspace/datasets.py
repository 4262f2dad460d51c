"""Bundled synthetic fixtures for experiments, demos, and regression runs.

Everything here is generated, not collected: fixtures are either frozen
literals (checked against their invariants in the test suite) or derived
deterministically from a fixed seed, so experiment runs are reproducible on
any machine with no downloads.
"""

from __future__ import annotations

import random
from pathlib import Path

from .terms import SpecificationSet, Term, TermCollection

# 50 synthetic single-token words with minimum pairwise edit distance 4.
# Frozen from a one-time seeded generation; the spacing guarantee makes
# single-character noise unambiguous (the source word is always strictly
# closest), which is what the baseline experiments rely on.
_NOISE_WORDS = (
    "humeriwe", "tirujiwiva", "jogujociro", "giqipe", "ronujoke",
    "kalunu", "rufikesige", "tugiquni", "segijudaha", "sepede",
    "kolovore", "milezi", "fojeqeveni", "cuwodakave", "duhetu",
    "hedefuwubu", "wewiba", "becajuje", "honisojo", "sogehiqehi",
    "banakura", "sutuco", "bunuleku", "ragebi", "lohisotu",
    "hafapohu", "faralefiwu", "juzara", "lowekavajo", "zosuhewilu",
    "saqomivu", "kikosu", "mesuciqe", "rugimuga", "kolikuqiho",
    "buqagaru", "jazicive", "hetidofa", "lequfezehi", "gofenoniwe",
    "logule", "lewerujege", "bufovoco", "lisimo", "zowameqopu",
    "peduwije", "sibefoci", "datojuvenu", "momucewoki", "ninaguwuli",
)

# Tissue-preservation vocabulary with definitions. The acronym entry is the
# interesting one: its expansion lives only in the definition, so retrieval
# for the spelled-out phrase must fail without definitions and succeed with
# them. The first entry doubles as the tie-break winner for all-zero scores.
_TISSUE_ENTRIES = (
    ("flash frozen", "tissue preserved by rapid freezing in liquid nitrogen"),
    ("OCT embedded", "optimal cutting temperature compound embedding for cryosectioning"),
    ("formalin fixed", "tissue fixed in buffered formalin solution"),
    ("paraffin embedded", "tissue embedded in paraffin wax blocks"),
)

_TISSUE_QUERIES = (
    ("flash-frozen", "flash frozen"),
    ("fresh frozen tissue", "flash frozen"),
    ("optimal cutting temperature", "OCT embedded"),
    ("oct", "OCT embedded"),
    ("formalin-fixed", "formalin fixed"),
    ("parafin embedded", "paraffin embedded"),
)

_SYNONYM_PATTERNS = (
    "{base}",
    "{base} level",
    "{base} levels",
    "{base} measurement",
    "measured {base}",
    "sample {base}",
    "{base} count",
    "{base} value",
    "{upper}",
    "{base} concentration",
)


def noise_vocabulary() -> SpecificationSet:
    """The 50-word widely spaced vocabulary for perturbation experiments."""
    terms = tuple(
        Term(id=str(i + 1), text=word) for i, word in enumerate(_NOISE_WORDS)
    )
    return SpecificationSet(terms=terms, name="noise50")


def tissue_specification() -> SpecificationSet:
    """Small vocabulary with definitions, for the definition-augmentation flip."""
    terms = tuple(
        Term(id=str(i + 1), text=text, definition=definition)
        for i, (text, definition) in enumerate(_TISSUE_ENTRIES)
    )
    return SpecificationSet(terms=terms, name="tissue")


def tissue_queries() -> TermCollection:
    """Messy query strings labeled with their expected vocabulary text."""
    terms = tuple(
        Term(id=f"q{i + 1}", text=text, label=expected)
        for i, (text, expected) in enumerate(_TISSUE_QUERIES)
    )
    return TermCollection(terms=terms)


def synonym_terms(n_groups: int = 300, group_size: int = 5, seed: int = 13) -> TermCollection:
    """Synthetic synonym groups: variants of a base word, labeled by group.

    Defaults give 1500 labeled terms in 300 groups, the shape used for the
    large clustering sweep. Base words are unique across groups; each group
    takes ``group_size`` distinct surface patterns of its base.
    """
    if group_size > len(_SYNONYM_PATTERNS):
        raise ValueError(
            f"group_size can be at most {len(_SYNONYM_PATTERNS)}, got {group_size}"
        )
    rng = random.Random(seed)
    cons = "bcdfghjklmnpqrstvwz"
    vows = "aeiou"
    bases: list[str] = []
    seen: set[str] = set()
    while len(bases) < n_groups:
        word = "".join(
            rng.choice(cons) + rng.choice(vows) for _ in range(rng.randint(3, 4))
        )
        if word not in seen:
            seen.add(word)
            bases.append(word)
    terms: list[Term] = []
    for g, base in enumerate(bases):
        patterns = rng.sample(_SYNONYM_PATTERNS, group_size)
        for m, pattern in enumerate(patterns):
            text = pattern.format(base=base, upper=base.upper())
            terms.append(Term(id=f"g{g + 1}m{m + 1}", text=text, label=f"g{g + 1}"))
    return TermCollection(terms=tuple(terms))


def _spec_csv(spec: SpecificationSet, with_definitions: bool) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "term", "definition"] if with_definitions else ["id", "term"])
    for t in spec.terms:
        row = [t.id, t.text] + ([t.definition or ""] if with_definitions else [])
        writer.writerow(row)
    return buf.getvalue()


def _labeled_csv(terms: TermCollection) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "term", "label"])
    for t in terms:
        writer.writerow([t.id, t.text, t.label or ""])
    return buf.getvalue()


def write_fixture_files(directory) -> dict[str, Path]:
    """Materialize every bundled fixture as CSV under ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {
        "noise50": (directory / "noise50.csv", _spec_csv(noise_vocabulary(), False)),
        "tissue_spec": (directory / "tissue_spec.csv", _spec_csv(tissue_specification(), True)),
        "tissue_queries": (directory / "tissue_queries.csv", _labeled_csv(tissue_queries())),
        "synonyms1500": (directory / "synonyms1500.csv", _labeled_csv(synonym_terms())),
    }
    out = {}
    for name, (path, content) in files.items():
        path.write_text(content, encoding="utf-8")
        out[name] = path
    return out
