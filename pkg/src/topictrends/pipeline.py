"""End-to-end orchestration: ingest, annotate, aggregate, test, detect, render.

A single JSON config file drives the run; CLI flags override file values.
Outputs are written to a temporary area and promoted atomically on success,
and are byte-identical across reruns with unchanged inputs and config.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import httpx

from . import __version__
from .annotate import (
    AnnotatorConfig,
    EntityAnnotation,
    RemoteAnnotator,
    annotate_gazetteer,
    apply_blacklist,
    load_blacklist,
    load_gazetteer,
    read_annotations_jsonl,
)
from .burst import BurstParams, burst_table
from .corpus import CorpusFilter, Document, filter_corpus, merge_text, parse_canonical_jsonl, parse_wos_export
from .errors import (
    ConfigError,
    EmptyCorpus,
    InsufficientData,
    PipelineStageError,
    TopicTrendsError,
)
from .render import (
    TimelineLayout,
    render_burst_json,
    render_burst_table,
    render_timeline_svg,
    render_trend_json,
    render_trend_table,
)
from .series import build_series
from .stats import Correction, classify_and_rank, mann_kendall

GAZETTEER_MODE = "gazetteer"
REMOTE_MODE = "remote"

OUTPUT_NAMES = (
    "trends.csv",
    "trends.json",
    "bursts.csv",
    "bursts.json",
    "timeline.svg",
    "manifest.json",
)


@dataclass(frozen=True)
class PipelineConfig:
    """Fully resolved pipeline settings."""

    corpus_path: Path
    out_dir: Path
    mode: str = GAZETTEER_MODE
    corpus_format: str = ""  # "wos" | "jsonl"; inferred from the suffix when empty
    gazetteer_path: Path | None = None
    blacklist_path: Path | None = None
    annotations_path: Path | None = None
    corpus_filter: CorpusFilter = field(default_factory=CorpusFilter)
    annotator: AnnotatorConfig = field(default_factory=AnnotatorConfig)
    min_link_probability: float = 0.16
    min_docs: int = 20
    correction: Correction = Correction.SIGNIFICANT_LAGS
    alpha: float = 0.05
    top_k: int = 20
    burst_params: BurstParams = field(default_factory=BurstParams)
    burst_top_n: int = 100
    layout_overrides: dict[str, Any] = field(default_factory=dict)
    sort_by_weight: bool = False

    def __post_init__(self):
        if self.mode not in (GAZETTEER_MODE, REMOTE_MODE):
            raise ConfigError(f"mode must be {GAZETTEER_MODE!r} or {REMOTE_MODE!r}, got {self.mode!r}")
        if self.annotations_path is None:
            if self.mode == GAZETTEER_MODE and self.gazetteer_path is None:
                raise ConfigError("gazetteer mode requires a gazetteer path")
            if self.mode == REMOTE_MODE and not self.annotator.endpoint_url:
                raise ConfigError("remote mode requires an annotator endpoint_url")

    def resolved_format(self) -> str:
        if self.corpus_format:
            return self.corpus_format
        return "jsonl" if self.corpus_path.suffix in (".jsonl", ".ndjson") else "wos"


def load_config(path: Path) -> PipelineConfig:
    """Read a JSON config file; relative paths resolve against its directory."""
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    base = path.parent

    def resolve(key: str) -> Path | None:
        value = raw.get(key)
        return (base / value) if value else None

    corpus_path = resolve("corpus")
    if corpus_path is None:
        raise ConfigError("config must name a corpus file")

    filter_cfg = raw.get("filter", {})
    corpus_filter = CorpusFilter(
        year_min=filter_cfg.get("year_min", 2004),
        year_max=filter_cfg.get("year_max", 2021),
        allowed_doc_types=frozenset(filter_cfg.get("doc_types", ["Article", "Proceedings Paper"])),
        allowed_languages=frozenset(filter_cfg.get("languages", ["English"])),
    )
    annotator_cfg = raw.get("annotator", {})
    annotator = AnnotatorConfig(
        endpoint_url=annotator_cfg.get("endpoint_url", ""),
        language=annotator_cfg.get("language", "en"),
        epsilon=annotator_cfg.get("epsilon", 0.427),
        rho_threshold=annotator_cfg.get("rho_threshold", 0.16),
        long_text=annotator_cfg.get("long_text", 10),
        max_retries=annotator_cfg.get("max_retries", 3),
        timeout=annotator_cfg.get("timeout", 30.0),
        concurrency=annotator_cfg.get("concurrency", 4),
    )
    burst_cfg = raw.get("burst", {})
    try:
        correction = Correction(raw.get("correction", Correction.SIGNIFICANT_LAGS.value))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return PipelineConfig(
        corpus_path=corpus_path,
        out_dir=base / raw.get("out_dir", "out"),
        mode=raw.get("mode", GAZETTEER_MODE),
        corpus_format=raw.get("corpus_format", ""),
        gazetteer_path=resolve("gazetteer"),
        blacklist_path=resolve("blacklist"),
        annotations_path=resolve("annotations"),
        corpus_filter=corpus_filter,
        annotator=annotator,
        min_link_probability=raw.get("min_link_probability", annotator.rho_threshold),
        min_docs=raw.get("min_docs", 20),
        correction=correction,
        alpha=raw.get("alpha", 0.05),
        top_k=raw.get("top_k", 20),
        burst_params=BurstParams(
            s=burst_cfg.get("s", 2.0),
            gamma=burst_cfg.get("gamma", 1.0),
            p1_cap=burst_cfg.get("p1_cap", 0.9999),
        ),
        burst_top_n=burst_cfg.get("top_n", 100),
        layout_overrides=dict(raw.get("layout", {})),
        sort_by_weight=raw.get("sort_by_weight", False),
    )


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _config_echo(cfg: PipelineConfig) -> dict[str, Any]:
    """Manifest view of the config: analysis settings only.

    The output directory is a deployment detail and the API token a secret;
    neither belongs in the manifest.
    """
    return {
        "mode": cfg.mode,
        "corpus_format": cfg.resolved_format(),
        "filter": {
            "year_min": cfg.corpus_filter.year_min,
            "year_max": cfg.corpus_filter.year_max,
            "doc_types": sorted(cfg.corpus_filter.allowed_doc_types),
            "languages": sorted(cfg.corpus_filter.allowed_languages),
        },
        "annotator": {
            "endpoint_url": cfg.annotator.endpoint_url,
            "language": cfg.annotator.language,
            "epsilon": cfg.annotator.epsilon,
            "rho_threshold": cfg.annotator.rho_threshold,
            "long_text": cfg.annotator.long_text,
            "max_retries": cfg.annotator.max_retries,
            "timeout": cfg.annotator.timeout,
            "concurrency": cfg.annotator.concurrency,
        },
        "min_link_probability": cfg.min_link_probability,
        "min_docs": cfg.min_docs,
        "correction": cfg.correction.value,
        "alpha": cfg.alpha,
        "top_k": cfg.top_k,
        "burst": {
            "s": cfg.burst_params.s,
            "gamma": cfg.burst_params.gamma,
            "p1_cap": cfg.burst_params.p1_cap,
            "top_n": cfg.burst_top_n,
        },
        "layout": dict(sorted(cfg.layout_overrides.items())),
        "sort_by_weight": cfg.sort_by_weight,
    }


class _Stage:
    """Context manager labeling failures with the stage that raised them."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, (TopicTrendsError, OSError)) and not isinstance(
            exc, PipelineStageError
        ):
            raise PipelineStageError(self.name, exc) from exc
        return False


def _annotate_all(
    cfg: PipelineConfig,
    docs: list[Document],
    inputs: dict[str, dict[str, str]],
    transport: httpx.BaseTransport | None,
) -> list[EntityAnnotation]:
    if cfg.annotations_path is not None:
        raw = cfg.annotations_path.read_bytes()
        inputs["annotations"] = {"path": str(cfg.annotations_path), "sha256": _sha256(raw)}
        known = {d.id for d in docs}
        return [a for a in read_annotations_jsonl(raw) if a.doc_id in known]
    if cfg.mode == GAZETTEER_MODE:
        raw = cfg.gazetteer_path.read_bytes()
        inputs["gazetteer"] = {"path": str(cfg.gazetteer_path), "sha256": _sha256(raw)}
        gazetteer = load_gazetteer(raw)
        annotations: list[EntityAnnotation] = []
        for doc in docs:
            annotations.extend(
                annotate_gazetteer(
                    merge_text(doc), gazetteer, cfg.min_link_probability, doc_id=doc.id
                )
            )
        return annotations
    with RemoteAnnotator(cfg.annotator, transport=transport) as annotator:
        annotations = []
        for _, annos in annotator.annotate_documents(docs):
            annotations.extend(annos)
        return annotations


def run_pipeline(
    cfg: PipelineConfig, transport: httpx.BaseTransport | None = None
) -> dict[str, Path]:
    """Run every stage and write the report artifacts.

    Returns a mapping from artifact name to its final path. Failures carry
    the stage name via PipelineStageError; outputs appear only if the whole
    run succeeds.
    """
    inputs: dict[str, dict[str, str]] = {}

    with _Stage("ingest"):
        raw_corpus = cfg.corpus_path.read_bytes()
        inputs["corpus"] = {"path": str(cfg.corpus_path), "sha256": _sha256(raw_corpus)}
        if cfg.resolved_format() == "jsonl":
            docs = parse_canonical_jsonl(raw_corpus)
        else:
            docs = parse_wos_export(raw_corpus)

    with _Stage("filter"):
        docs = filter_corpus(docs, cfg.corpus_filter)
        if not docs:
            raise EmptyCorpus("no documents remain after filtering")

    with _Stage("annotate"):
        annotations = _annotate_all(cfg, docs, inputs, transport)

    with _Stage("blacklist"):
        if cfg.blacklist_path is not None:
            raw_blacklist = cfg.blacklist_path.read_bytes()
            inputs["blacklist"] = {
                "path": str(cfg.blacklist_path),
                "sha256": _sha256(raw_blacklist),
            }
            annotations = apply_blacklist(annotations, load_blacklist(raw_blacklist))

    with _Stage("series"):
        totals, series = build_series(docs, annotations, min_docs=cfg.min_docs)

    with _Stage("trends"):
        tested = []
        untestable = []
        for s in series:
            try:
                tested.append((s.topic, mann_kendall(list(s.counts), cfg.correction, cfg.alpha)))
            except InsufficientData:
                untestable.append(s.topic)
        ranked = classify_and_rank(tested, top_k=cfg.top_k)

    with _Stage("bursts"):
        bursts = burst_table(series, totals, cfg.burst_params, top_n=cfg.burst_top_n)

    with _Stage("render"):
        layout_kw = {"year_min": totals.year_min, "year_max": totals.year_max}
        layout_kw.update(cfg.layout_overrides)
        layout = TimelineLayout.fit(bursts, **layout_kw)
        artifacts = {
            "trends.csv": render_trend_table(ranked),
            "trends.json": render_trend_json(ranked, untestable),
            "bursts.csv": render_burst_table(bursts),
            "bursts.json": render_burst_json(bursts),
            "timeline.svg": render_timeline_svg(bursts, layout, cfg.sort_by_weight),
        }
        manifest = {
            "tool": {"name": "topictrends", "version": __version__},
            "config": _config_echo(cfg),
            "inputs": inputs,
        }
        artifacts["manifest.json"] = (
            json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
        ).encode("utf-8")

    with _Stage("write"):
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=cfg.out_dir))
        try:
            for name, data in artifacts.items():
                (staging / name).write_bytes(data)
            paths = {}
            for name in OUTPUT_NAMES:
                final = cfg.out_dir / name
                os.replace(staging / name, final)
                paths[name] = final
        finally:
            shutil.rmtree(staging, ignore_errors=True)
    return paths
