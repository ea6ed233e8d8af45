"""Bibliographic record parsing, filtering, and canonical serialization.

Two input formats are supported: tab-delimited exports whose first line is a
header of two-letter field tags (UT/TI/AB/PY/DT/LA), and a canonical
JSON-lines format with one document object per line. The canonical writer and
reader round-trip losslessly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import BadYear, DuplicateId, MalformedHeader, MalformedLine, MalformedRow

YEAR_MIN_VALID = 1900
YEAR_MAX_VALID = 2100

_REQUIRED_TAGS = ("UT", "PY")
_CANONICAL_KEYS = ("id", "title", "abstract", "year", "doc_type", "language")


@dataclass(frozen=True)
class Document:
    """One bibliographic record; the unit of analysis for the pipeline."""

    id: str
    title: str
    abstract: str = ""
    year: int | None = None
    doc_type: str = ""
    language: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("document id must be non-empty")
        if self.year is not None:
            if not isinstance(self.year, int) or isinstance(self.year, bool):
                raise ValueError(f"year must be an integer, got {self.year!r}")
            if not YEAR_MIN_VALID <= self.year <= YEAR_MAX_VALID:
                raise ValueError(f"year {self.year} outside [{YEAR_MIN_VALID}, {YEAR_MAX_VALID}]")


@dataclass(frozen=True)
class CorpusFilter:
    """Inclusion criteria applied to a parsed corpus.

    Defaults select English journal articles and proceedings papers published
    2004-2021. Document-type and language matching is case-insensitive after
    trimming, since export casing varies between sources.
    """

    year_min: int = 2004
    year_max: int = 2021
    allowed_doc_types: frozenset[str] = frozenset({"Article", "Proceedings Paper"})
    allowed_languages: frozenset[str] = frozenset({"English"})

    def __post_init__(self):
        if self.year_min > self.year_max:
            raise ValueError(f"year_min {self.year_min} > year_max {self.year_max}")
        object.__setattr__(self, "allowed_doc_types", frozenset(self.allowed_doc_types))
        object.__setattr__(self, "allowed_languages", frozenset(self.allowed_languages))
        object.__setattr__(
            self, "_folded_types", frozenset(v.strip().casefold() for v in self.allowed_doc_types)
        )
        object.__setattr__(
            self,
            "_folded_languages",
            frozenset(v.strip().casefold() for v in self.allowed_languages),
        )

    def matches(self, doc: Document) -> bool:
        if doc.year is None or not self.year_min <= doc.year <= self.year_max:
            return False
        if doc.doc_type.strip().casefold() not in self._folded_types:
            return False
        return doc.language.strip().casefold() in self._folded_languages


def parse_wos_export(raw: bytes) -> list[Document]:
    """Parse a tab-delimited export into documents.

    The first line is a tab-separated header of field tags and must contain
    UT and PY; TI, AB, DT, and LA are honored when present and unknown tags
    are ignored. Column order follows the header. Raises MalformedHeader,
    MalformedRow (with a 1-based line number), or BadYear.
    """
    text = raw.decode("utf-8-sig")
    lines = text.split("\n")
    header = lines[0].rstrip("\r")
    tags = [t.strip() for t in header.split("\t")]
    for required in _REQUIRED_TAGS:
        if required not in tags:
            raise MalformedHeader(f"header is missing the {required} tag")
    index = {tag: i for i, tag in enumerate(tags)}

    def get(fields: list[str], tag: str) -> str:
        pos = index.get(tag)
        return fields[pos].strip() if pos is not None else ""

    docs: list[Document] = []
    for line_no, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != len(tags):
            raise MalformedRow(line_no, f"expected {len(tags)} fields, found {len(fields)}")
        year_text = get(fields, "PY")
        year: int | None = None
        if year_text:
            try:
                year = int(year_text)
            except ValueError:
                raise BadYear(line_no, year_text) from None
            if not YEAR_MIN_VALID <= year <= YEAR_MAX_VALID:
                raise BadYear(line_no, year_text)
        try:
            docs.append(
                Document(
                    id=get(fields, "UT"),
                    title=get(fields, "TI"),
                    abstract=get(fields, "AB"),
                    year=year,
                    doc_type=get(fields, "DT"),
                    language=get(fields, "LA"),
                )
            )
        except ValueError as exc:
            raise MalformedRow(line_no, str(exc)) from None
    return docs


def parse_canonical_jsonl(raw: bytes) -> list[Document]:
    """Parse canonical JSON-lines documents; blank lines are skipped.

    Raises MalformedLine (with a 1-based line number) for undecodable lines
    or records with missing/ill-typed keys, and DuplicateId for repeated ids.
    """
    docs: list[Document] = []
    seen: set[str] = set()
    for line_no, line in enumerate(raw.decode("utf-8-sig").split("\n"), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLine(line_no, f"invalid JSON: {exc.msg}") from None
        if not isinstance(record, dict):
            raise MalformedLine(line_no, "record is not a JSON object")
        missing = [k for k in _CANONICAL_KEYS if k not in record]
        if missing:
            raise MalformedLine(line_no, f"missing keys: {', '.join(missing)}")
        for key in ("id", "title", "abstract", "doc_type", "language"):
            if not isinstance(record[key], str):
                raise MalformedLine(line_no, f"key {key!r} must be a string")
        year = record["year"]
        if year is not None and (not isinstance(year, int) or isinstance(year, bool)):
            raise MalformedLine(line_no, "key 'year' must be an integer or null")
        if record["id"] in seen:
            raise DuplicateId(record["id"], line_no)
        seen.add(record["id"])
        try:
            docs.append(
                Document(
                    id=record["id"],
                    title=record["title"],
                    abstract=record["abstract"],
                    year=year,
                    doc_type=record["doc_type"],
                    language=record["language"],
                )
            )
        except ValueError as exc:
            raise MalformedLine(line_no, str(exc)) from None
    return docs


def write_canonical_jsonl(docs: list[Document]) -> bytes:
    """Serialize documents to canonical JSON-lines; inverse of the parser."""
    out = []
    for doc in docs:
        out.append(
            json.dumps(
                {
                    "id": doc.id,
                    "title": doc.title,
                    "abstract": doc.abstract,
                    "year": doc.year,
                    "doc_type": doc.doc_type,
                    "language": doc.language,
                },
                ensure_ascii=False,
                separators=(",", ":"),
            )
        )
    return ("\n".join(out) + ("\n" if out else "")).encode("utf-8")


def filter_corpus(docs: list[Document], f: CorpusFilter) -> list[Document]:
    """Keep documents matching the filter, preserving input order.

    Documents without a year are dropped: a year window cannot admit an
    undated record.
    """
    return [d for d in docs if f.matches(d)]


def merge_text(doc: Document) -> str:
    """Join title and abstract into one annotation unit.

    The separator is ". "; a title already ending in '.' gets only the space
    so no double period appears.
    """
    if not doc.abstract:
        return doc.title
    if not doc.title:
        return doc.abstract
    if doc.title.endswith("."):
        return doc.title + " " + doc.abstract
    return doc.title + ". " + doc.abstract
