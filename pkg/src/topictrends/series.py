"""Aggregation of annotations into per-topic annual count series.

Counts are document frequency (a topic counted once per document per year);
occurrences are raw mention totals. Both share one contiguous year axis with
zero fill, aligned to the corpus-wide totals that serve as burst baselines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .annotate import EntityAnnotation
from .corpus import Document
from .errors import DanglingAnnotation, EmptyCorpus, MalformedLine


@dataclass(frozen=True)
class CorpusYearTotals:
    """Documents per year across the whole corpus, on a contiguous axis."""

    year_min: int
    year_max: int
    totals: tuple[int, ...]

    def __post_init__(self):
        if self.year_min > self.year_max:
            raise ValueError(f"year_min {self.year_min} > year_max {self.year_max}")
        span = self.year_max - self.year_min + 1
        if len(self.totals) != span:
            raise ValueError(f"expected {span} totals, got {len(self.totals)}")
        if any(t < 0 for t in self.totals):
            raise ValueError("totals must be nonnegative")
        object.__setattr__(self, "totals", tuple(self.totals))

    @property
    def years(self) -> range:
        return range(self.year_min, self.year_max + 1)


@dataclass(frozen=True)
class TopicYearSeries:
    """Annual document-frequency and occurrence counts for one topic."""

    topic: str
    counts: tuple[int, ...]
    occurrences: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != len(self.occurrences):
            raise ValueError("counts and occurrences must share one year axis")
        if any(c < 0 for c in self.counts) or any(o < 0 for o in self.occurrences):
            raise ValueError("counts must be nonnegative")
        if any(c > o for c, o in zip(self.counts, self.occurrences)):
            raise ValueError("document frequency cannot exceed occurrence count")
        object.__setattr__(self, "counts", tuple(self.counts))
        object.__setattr__(self, "occurrences", tuple(self.occurrences))


def build_series(
    docs: list[Document],
    annos: list[EntityAnnotation],
    min_docs: int = 20,
) -> tuple[CorpusYearTotals, list[TopicYearSeries]]:
    """Aggregate annotations into per-topic annual series.

    The year axis spans the corpus min..max year with zero fill. Topics whose
    total document frequency falls below min_docs are dropped; the remainder
    come back sorted by name. Raises DanglingAnnotation when an annotation's
    doc_id resolves to no dated document, and EmptyCorpus when no document
    carries a year.
    """
    year_of: dict[str, int] = {d.id: d.year for d in docs if d.year is not None}
    if not year_of:
        raise EmptyCorpus("no dated documents to aggregate")
    year_min = min(year_of.values())
    year_max = max(year_of.values())
    span = year_max - year_min + 1

    totals = [0] * span
    for year in year_of.values():
        totals[year - year_min] += 1

    doc_sets: dict[str, list[set[str]]] = {}
    occurrences: dict[str, list[int]] = {}
    for a in annos:
        year = year_of.get(a.doc_id)
        if year is None:
            raise DanglingAnnotation(a.doc_id)
        t = year - year_min
        if a.entity_title not in doc_sets:
            doc_sets[a.entity_title] = [set() for _ in range(span)]
            occurrences[a.entity_title] = [0] * span
        doc_sets[a.entity_title][t].add(a.doc_id)
        occurrences[a.entity_title][t] += 1

    series = []
    for topic in sorted(doc_sets):
        counts = [len(s) for s in doc_sets[topic]]
        if sum(counts) < min_docs:
            continue
        series.append(
            TopicYearSeries(
                topic=topic, counts=tuple(counts), occurrences=tuple(occurrences[topic])
            )
        )
    return CorpusYearTotals(year_min=year_min, year_max=year_max, totals=tuple(totals)), series


def write_series_json(totals: CorpusYearTotals, series: list[TopicYearSeries]) -> bytes:
    """Serialize the year axis, totals, and per-topic series as JSON."""
    payload = {
        "year_min": totals.year_min,
        "year_max": totals.year_max,
        "totals": list(totals.totals),
        "topics": [
            {"topic": s.topic, "counts": list(s.counts), "occurrences": list(s.occurrences)}
            for s in series
        ],
    }
    return (json.dumps(payload, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def read_series_json(raw: bytes) -> tuple[CorpusYearTotals, list[TopicYearSeries]]:
    """Inverse of write_series_json."""
    try:
        payload = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedLine(1, f"invalid series file: {exc}") from None
    try:
        totals = CorpusYearTotals(
            year_min=payload["year_min"],
            year_max=payload["year_max"],
            totals=tuple(payload["totals"]),
        )
        series = [
            TopicYearSeries(
                topic=t["topic"], counts=tuple(t["counts"]), occurrences=tuple(t["occurrences"])
            )
            for t in payload["topics"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedLine(1, f"invalid series file: {exc}") from None
    return totals, series
