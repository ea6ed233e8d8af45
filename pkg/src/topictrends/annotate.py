"""Entity annotation: a remote linking client and an offline gazetteer.

The remote path posts document text to an annotation HTTP service and keeps
links whose confidence clears a threshold. The gazetteer path is a
deterministic substitute: case-folded longest-match dictionary lookup on word
boundaries, so pipelines run without network access. Both emit the same
annotation records, which a blacklist pass can then clean of noise entities.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import httpx

from .corpus import Document, merge_text
from .errors import (
    AuthError,
    MalformedLine,
    MalformedResponse,
    RateLimited,
    TransportError,
)

log = logging.getLogger(__name__)

TOKEN_ENV_VAR = "ANNOTATOR_API_TOKEN"

_RETRY_BASE_DELAY = 0.5


def _token_from_env() -> str:
    return os.environ.get(TOKEN_ENV_VAR, "")


@dataclass(frozen=True)
class AnnotatorConfig:
    """Remote annotation service settings.

    epsilon and long_text tune the service itself and are passed through
    verbatim; rho_threshold is the confidence cutoff applied to returned
    links (and forwarded as the q form field). The API token defaults to the
    ANNOTATOR_API_TOKEN environment variable.
    """

    endpoint_url: str = ""
    language: str = "en"
    epsilon: float = 0.427
    rho_threshold: float = 0.16
    long_text: int = 10
    api_token: str = field(default_factory=_token_from_env)
    max_retries: int = 3
    timeout: float = 30.0
    concurrency: int = 4

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not 0.0 <= self.rho_threshold <= 1.0:
            raise ValueError(f"rho_threshold must lie in [0, 1], got {self.rho_threshold}")
        if self.long_text < 0:
            raise ValueError(f"long_text must be nonnegative, got {self.long_text}")
        if self.max_retries < 0:
            raise ValueError(f"max_retries must be nonnegative, got {self.max_retries}")
        if self.concurrency < 1:
            raise ValueError(f"concurrency must be >= 1, got {self.concurrency}")


@dataclass(frozen=True)
class EntityAnnotation:
    """A linked mention: where it sits in the text and how confident the link is."""

    doc_id: str
    entity_id: str
    entity_title: str
    mention: str
    start: int
    end: int
    score: float

    def __post_init__(self):
        if self.start < 0 or self.start >= self.end:
            raise ValueError(f"bad span [{self.start}, {self.end})")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must lie in [0, 1], got {self.score}")


def _is_word_char(c: str) -> bool:
    return c.isalnum() or c == "_"


def _fold(text: str) -> str:
    """Length-preserving case fold so match offsets stay valid in the original."""
    chars = []
    for c in text:
        folded = c.casefold()
        chars.append(folded if len(folded) == 1 else c.lower()[0])
    return "".join(chars)


def _normalize_surface(surface: str) -> str:
    return " ".join(surface.split()).casefold()


class Gazetteer:
    """Surface-form dictionary mapping phrases to catalog entries.

    Entries are keyed by whitespace-normalized, case-folded surface forms and
    carry the canonical entity title plus a link probability used as the
    match score. Surfaces must start with a letter or digit so matches can
    anchor on word starts.
    """

    def __init__(self, entries: dict[str, tuple[str, float]]):
        self._entries: dict[str, tuple[str, float]] = {}
        # candidates per leading token, longest surface first
        self._by_first_token: dict[str, list[tuple[str, str, float]]] = {}
        for surface, (title, link_probability) in entries.items():
            normalized = _normalize_surface(surface)
            if not normalized:
                raise ValueError("gazetteer surface forms must be non-empty")
            if not _is_word_char(normalized[0]):
                raise ValueError(f"surface {surface!r} must start with a letter or digit")
            if not 0.0 <= link_probability <= 1.0:
                raise ValueError(f"link probability for {surface!r} outside [0, 1]")
            self._entries[normalized] = (title, link_probability)
        for normalized, (title, link_probability) in self._entries.items():
            first = self._first_token(normalized)
            self._by_first_token.setdefault(first, []).append(
                (normalized, title, link_probability)
            )
        for candidates in self._by_first_token.values():
            candidates.sort(key=lambda c: (-len(c[0]), c[0]))

    @staticmethod
    def _first_token(surface: str) -> str:
        end = 0
        while end < len(surface) and _is_word_char(surface[end]):
            end += 1
        return surface[:end]

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, surface: str) -> bool:
        return _normalize_surface(surface) in self._entries

    @property
    def entries(self) -> dict[str, tuple[str, float]]:
        return dict(self._entries)

    def candidates_for(self, token: str) -> list[tuple[str, str, float]]:
        return self._by_first_token.get(token, [])


def load_gazetteer(raw: bytes) -> Gazetteer:
    """Read a gazetteer from UTF-8 TSV lines: surface, entity title, link probability."""
    entries: dict[str, tuple[str, float]] = {}
    for line_no, line in enumerate(raw.decode("utf-8-sig").split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise MalformedLine(line_no, f"expected 3 tab-separated fields, found {len(parts)}")
        surface, title, prob_text = parts
        try:
            probability = float(prob_text)
        except ValueError:
            raise MalformedLine(line_no, f"bad link probability {prob_text!r}") from None
        entries[surface] = (title.strip(), probability)
    return Gazetteer(entries)


def annotate_gazetteer(
    text: str,
    gazetteer: Gazetteer,
    min_link_probability: float = 0.0,
    doc_id: str = "",
) -> list[EntityAnnotation]:
    """Deterministic left-to-right longest-match annotation on word boundaries.

    Matching compares the case-folded text against the dictionary's
    normalized surfaces; matches start and end at word boundaries, never
    overlap, and prefer the longest surface anchored at each position.
    Entries below min_link_probability never match.
    """
    folded = _fold(text)
    n = len(folded)
    annotations: list[EntityAnnotation] = []
    pos = 0
    while pos < n:
        if not _is_word_char(folded[pos]):
            pos += 1
            continue
        word_end = pos
        while word_end < n and _is_word_char(folded[word_end]):
            word_end += 1
        matched = False
        for surface, title, probability in gazetteer.candidates_for(folded[pos:word_end]):
            if probability < min_link_probability:
                continue
            end = pos + len(surface)
            if end > n or not folded.startswith(surface, pos):
                continue
            if end < n and _is_word_char(folded[end]):
                continue
            annotations.append(
                EntityAnnotation(
                    doc_id=doc_id,
                    entity_id=title,
                    entity_title=title,
                    mention=text[pos:end],
                    start=pos,
                    end=end,
                    score=probability,
                )
            )
            pos = end
            matched = True
            break
        if not matched:
            pos = word_end
    return annotations


class Blacklist:
    """Case-insensitive set of entity titles to scrub from annotation output."""

    def __init__(self, entity_titles: Iterable[str] = ()):
        self._folded = frozenset(t.strip().casefold() for t in entity_titles if t.strip())

    def __contains__(self, title: str) -> bool:
        return title.strip().casefold() in self._folded

    def __len__(self) -> int:
        return len(self._folded)


def load_blacklist(raw: bytes) -> Blacklist:
    """Read a blacklist from UTF-8 text, one entity title per line; # comments allowed."""
    titles = []
    for line in raw.decode("utf-8-sig").split("\n"):
        line = line.strip()
        if line and not line.startswith("#"):
            titles.append(line)
    return Blacklist(titles)


def apply_blacklist(
    annos: Sequence[EntityAnnotation], blacklist: Blacklist
) -> list[EntityAnnotation]:
    """Drop annotations whose entity title is blacklisted; order is preserved."""
    return [a for a in annos if a.entity_title not in blacklist]


def resolve_overlaps(annos: list[EntityAnnotation]) -> list[EntityAnnotation]:
    """Keep the better annotation wherever spans overlap.

    Higher score wins; ties go to the earlier start, then the longer span.
    The survivors come back sorted by start.
    """
    kept: list[EntityAnnotation] = []
    for a in sorted(annos, key=lambda a: (-a.score, a.start, -(a.end - a.start))):
        if all(a.end <= b.start or a.start >= b.end for b in kept):
            kept.append(a)
    kept.sort(key=lambda a: a.start)
    return kept


class RemoteAnnotator:
    """HTTP client for an entity-linking service.

    Requests are form-encoded POSTs carrying text, lang, epsilon, long_text,
    token, and q; the response must be a JSON object with an "annotations"
    array of {spot, start, end, id, title, rho} records. 429 responses are
    retried with exponential backoff up to max_retries; the retry count of
    the last call is kept for observability.
    """

    def __init__(
        self,
        cfg: AnnotatorConfig,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if not cfg.endpoint_url:
            raise ValueError("endpoint_url is required for remote annotation")
        if not cfg.api_token:
            raise AuthError(f"no API token configured; set {TOKEN_ENV_VAR}")
        self.cfg = cfg
        self.last_retries = 0
        self._sleep = sleep
        self._client = httpx.Client(timeout=cfg.timeout, transport=transport)

    def close(self):
        self._client.close()

    def __enter__(self) -> "RemoteAnnotator":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def annotate(self, text: str, doc_id: str = "") -> list[EntityAnnotation]:
        response = self._post_with_retry(text)
        return self._parse_response(response, text, doc_id)

    def annotate_documents(
        self, docs: Sequence[Document]
    ) -> list[tuple[Document, list[EntityAnnotation]]]:
        """Annotate merged title+abstract text for many documents.

        Requests run on a bounded worker pool; results are returned in the
        input document order regardless of completion order, so downstream
        output stays deterministic.
        """
        def one(doc: Document) -> tuple[Document, list[EntityAnnotation]]:
            return doc, self.annotate(merge_text(doc), doc_id=doc.id)

        if self.cfg.concurrency == 1 or len(docs) <= 1:
            return [one(d) for d in docs]
        with ThreadPoolExecutor(max_workers=self.cfg.concurrency) as pool:
            return list(pool.map(one, docs))

    def _post_with_retry(self, text: str) -> httpx.Response:
        data = {
            "text": text,
            "lang": self.cfg.language,
            "epsilon": repr(self.cfg.epsilon),
            "long_text": str(self.cfg.long_text),
            "token": self.cfg.api_token,
            "q": repr(self.cfg.rho_threshold),
        }
        retries = 0
        while True:
            try:
                response = self._client.post(self.cfg.endpoint_url, data=data)
            except httpx.TransportError as exc:
                raise TransportError(f"request failed: {exc}") from exc
            if response.status_code in (401, 403):
                raise AuthError(f"service rejected credentials (HTTP {response.status_code})")
            if response.status_code == 429:
                if retries >= self.cfg.max_retries:
                    self.last_retries = retries
                    raise RateLimited(f"still throttled after {retries} retries")
                delay = _RETRY_BASE_DELAY * (2.0**retries)
                log.debug("throttled; retry %d in %.2fs", retries + 1, delay)
                self._sleep(delay)
                retries += 1
                continue
            if response.status_code != 200:
                raise TransportError(f"unexpected HTTP status {response.status_code}")
            self.last_retries = retries
            return response

    def _parse_response(
        self, response: httpx.Response, text: str, doc_id: str
    ) -> list[EntityAnnotation]:
        try:
            body = response.json()
        except (json.JSONDecodeError, ValueError) as exc:
            raise MalformedResponse(f"response body is not JSON: {exc}") from None
        if not isinstance(body, dict) or not isinstance(body.get("annotations"), list):
            raise MalformedResponse('response lacks an "annotations" array')
        candidates = []
        for item in body["annotations"]:
            try:
                annotation = EntityAnnotation(
                    doc_id=doc_id,
                    entity_id=str(item["id"]),
                    entity_title=str(item["title"]),
                    mention=str(item["spot"]),
                    start=int(item["start"]),
                    end=int(item["end"]),
                    score=float(item["rho"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedResponse(f"bad annotation record: {exc}") from None
            if annotation.end > len(text):
                raise MalformedResponse(
                    f"annotation span [{annotation.start}, {annotation.end}) exceeds text length"
                )
            if annotation.score >= self.cfg.rho_threshold:
                candidates.append(annotation)
        return resolve_overlaps(candidates)


def annotate_remote(
    text: str,
    cfg: AnnotatorConfig,
    doc_id: str = "",
    transport: httpx.BaseTransport | None = None,
) -> list[EntityAnnotation]:
    """One-shot remote annotation; see RemoteAnnotator for the wire contract."""
    with RemoteAnnotator(cfg, transport=transport) as annotator:
        return annotator.annotate(text, doc_id=doc_id)


def write_annotations_jsonl(annos: Sequence[EntityAnnotation]) -> bytes:
    """Serialize annotations to JSON-lines, one record per line."""
    lines = [
        json.dumps(
            {
                "doc_id": a.doc_id,
                "entity_id": a.entity_id,
                "entity_title": a.entity_title,
                "mention": a.mention,
                "start": a.start,
                "end": a.end,
                "score": a.score,
            },
            ensure_ascii=False,
            separators=(",", ":"),
        )
        for a in annos
    ]
    return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")


def read_annotations_jsonl(raw: bytes) -> list[EntityAnnotation]:
    """Inverse of write_annotations_jsonl; blank lines are skipped."""
    annos: list[EntityAnnotation] = []
    for line_no, line in enumerate(raw.decode("utf-8-sig").split("\n"), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            annos.append(
                EntityAnnotation(
                    doc_id=record["doc_id"],
                    entity_id=record["entity_id"],
                    entity_title=record["entity_title"],
                    mention=record["mention"],
                    start=record["start"],
                    end=record["end"],
                    score=record["score"],
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise MalformedLine(line_no, f"bad annotation record: {exc}") from None
    return annos
