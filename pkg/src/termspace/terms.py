"""Domain types for metadata terms and parsing of term/vocabulary files.

Supported formats: CSV (header ``term[,definition][,label]``, optional ``id``
column), JSON (array of objects with key ``term`` and optional ``id``,
``definition``, ``label``), and plain lines (one term per line).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .errors import EmptyInputError, ParseError, ValidationError

FORMATS = ("csv", "json", "plain")


@dataclass(frozen=True)
class Term:
    """A metadata string with optional definition and ground-truth label."""

    id: str
    text: str
    definition: str | None = None
    label: str | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValidationError(f"term {self.id!r}: text must be non-empty after trimming")
        # Empty-string definition/label carry no information; store as absent.
        if self.definition is not None and not self.definition.strip():
            object.__setattr__(self, "definition", None)
        if self.label is not None and not self.label.strip():
            object.__setattr__(self, "label", None)


@dataclass(frozen=True)
class TermCollection:
    """An ordered, non-empty collection of terms with unique ids."""

    terms: tuple[Term, ...]

    def __post_init__(self):
        if not self.terms:
            raise EmptyInputError("a term collection must contain at least one term")
        seen: dict[str, int] = {}
        for i, t in enumerate(self.terms):
            if t.id in seen:
                raise ValidationError(
                    f"duplicate term id {t.id!r} at records {seen[t.id]} and {i}"
                )
            seen[t.id] = i

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def by_id(self, term_id: str) -> Term:
        for t in self.terms:
            if t.id == term_id:
                return t
        raise KeyError(term_id)

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.terms]

    def all_labeled(self) -> bool:
        return all(t.label is not None for t in self.terms)


@dataclass(frozen=True)
class SpecificationSet:
    """The permissible vocabulary a metadata value must come from.

    Term texts must be pairwise distinct after case-folding and trimming;
    duplicates are rejected at load so retrieval ground truth is unambiguous.
    """

    terms: tuple[Term, ...]
    name: str = "specification"

    def __post_init__(self):
        if not self.terms:
            raise EmptyInputError("a specification must contain at least one term")
        seen: dict[str, int] = {}
        for i, t in enumerate(self.terms):
            folded = t.text.strip().casefold()
            if folded in seen:
                raise ValidationError(
                    f"specification {self.name!r}: duplicate term text "
                    f"{t.text!r} at records {seen[folded]} and {i} (case-folded)"
                )
            seen[folded] = i

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.terms]

    def by_id(self, term_id: str) -> Term:
        for t in self.terms:
            if t.id == term_id:
                return t
        raise KeyError(term_id)

    def id_of_text(self, text: str) -> str:
        """Resolve a term text (trimmed, case-folded) to its id."""
        folded = text.strip().casefold()
        for t in self.terms:
            if t.text.strip().casefold() == folded:
                return t.id
        raise KeyError(text)


@dataclass(frozen=True)
class GroundTruth:
    """Mapping from term id to the expected match id or group label."""

    mapping: dict[str, str] = field(default_factory=dict)

    def expected(self, term_id: str) -> str:
        try:
            return self.mapping[term_id]
        except KeyError:
            raise ValidationError(f"no ground-truth entry for query id {term_id!r}") from None

    @classmethod
    def from_labels(cls, terms: TermCollection) -> "GroundTruth":
        missing = [t.id for t in terms if t.label is None]
        if missing:
            raise ValidationError(f"terms without labels: {missing[:5]}")
        return cls({t.id: t.label for t in terms})  # type: ignore[misc]


def _decode(content: bytes) -> str:
    if isinstance(content, str):
        return content
    try:
        return content.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8: {exc}") from exc


def _records_from_plain(text: str) -> list[dict]:
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            raise ParseError(
                f"blank line at line {lineno}", record=len(records) + 1, line=lineno
            )
        records.append({"term": line.strip(), "_line": lineno})
    return records


# Recognized CSV headers; "query,expected" is the perturbed-dataset export
# schema and maps onto term/label so experiment files replay directly.
_CSV_ALIASES = {"query": "term", "expected": "label"}
_CSV_FIELDS = {"id", "term", "definition", "label"}


def _records_from_csv(text: str) -> list[dict]:
    reader = csv.reader(io.StringIO(text))
    try:
        rows = list(reader)
    except csv.Error as exc:
        raise ParseError(f"malformed CSV: {exc}") from exc
    if not rows:
        return []
    header = [_CSV_ALIASES.get(h.strip().lower(), h.strip().lower()) for h in rows[0]]
    unknown = [h for h in header if h not in _CSV_FIELDS]
    if "term" not in header or unknown:
        raise ParseError(
            "CSV header must be term[,definition][,label] with optional id "
            f"(or query,expected), got {rows[0]!r}",
            line=1,
        )
    records = []
    for recno, row in enumerate(rows[1:], start=1):
        if len(row) == 0:
            raise ParseError(f"record {recno} has no columns", record=recno, line=recno + 1)
        if len(row) != len(header):
            raise ParseError(
                f"record {recno} has {len(row)} columns, header has {len(header)}",
                record=recno,
                line=recno + 1,
            )
        rec = {h: v for h, v in zip(header, row)}
        rec["_line"] = recno + 1
        records.append(rec)
    return records


def _records_from_json(text: str) -> list[dict]:
    try:
        data = json.loads(text) if text.strip() else []
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}", line=exc.lineno) from exc
    if not isinstance(data, list):
        raise ParseError("JSON input must be an array of objects")
    records = []
    for recno, obj in enumerate(data, start=1):
        if not isinstance(obj, dict) or "term" not in obj:
            raise ParseError(
                f"record {recno} must be an object with a 'term' key", record=recno
            )
        records.append({k: obj.get(k) for k in _CSV_FIELDS if obj.get(k) is not None})
    return records


def _parse_records(content: bytes | str, format: str) -> list[Term]:
    if format not in FORMATS:
        raise ValidationError(f"unknown format {format!r}, expected one of {FORMATS}")
    text = _decode(content)
    if format == "plain":
        records = _records_from_plain(text)
    elif format == "csv":
        records = _records_from_csv(text)
    else:
        records = _records_from_json(text)
    if not records:
        raise EmptyInputError("input contains no records")

    explicit_ids = [r.get("id") for r in records if r.get("id")]
    terms = []
    for i, rec in enumerate(records):
        term_id = rec.get("id") or str(i)
        try:
            term = Term(
                id=str(term_id),
                text=rec["term"],
                definition=rec.get("definition") or None,
                label=rec.get("label") or None,
            )
        except ValidationError as exc:
            raise ParseError(
                f"record {i + 1}: {exc}", record=i + 1, line=rec.get("_line")
            ) from exc
        terms.append(term)
    if explicit_ids and len(explicit_ids) != len(records):
        raise ValidationError("either all records carry an explicit id or none do")
    return terms


def parse_terms(content: bytes | str, format: str = "plain") -> TermCollection:
    """Parse raw file content into a TermCollection.

    Ids are assigned as the zero-based record index rendered as a decimal
    string when the input carries none; record order is preserved.
    """
    return TermCollection(tuple(_parse_records(content, format)))


def parse_specification(
    content: bytes | str, format: str = "plain", name: str = "specification"
) -> SpecificationSet:
    """Parse raw file content into a SpecificationSet, rejecting duplicates."""
    return SpecificationSet(tuple(_parse_records(content, format)), name=name)


def serialize_terms(collection: TermCollection) -> bytes:
    """Serialize to the JSON format; parse_terms round-trips this exactly."""
    records = []
    for t in collection:
        rec: dict = {"id": t.id, "term": t.text}
        if t.definition is not None:
            rec["definition"] = t.definition
        if t.label is not None:
            rec["label"] = t.label
        records.append(rec)
    return (json.dumps(records, ensure_ascii=False, indent=2) + "\n").encode("utf-8")
