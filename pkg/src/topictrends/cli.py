"""Command-line interface.

Subcommands mirror the pipeline stages so intermediate artifacts can be
produced and inspected independently; the pipeline subcommand runs the whole
chain from a JSON config file, with flags overriding file values.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from .annotate import (
    AnnotatorConfig,
    RemoteAnnotator,
    annotate_gazetteer,
    apply_blacklist,
    load_blacklist,
    load_gazetteer,
    read_annotations_jsonl,
    write_annotations_jsonl,
)
from .burst import BurstInterval, BurstParams, burst_table
from .corpus import (
    CorpusFilter,
    filter_corpus,
    merge_text,
    parse_canonical_jsonl,
    parse_wos_export,
    write_canonical_jsonl,
)
from .errors import InsufficientData, TopicTrendsError
from .pipeline import load_config, run_pipeline
from .render import (
    TimelineLayout,
    render_burst_json,
    render_burst_table,
    render_timeline_svg,
    render_trend_json,
    render_trend_table,
)
from .series import build_series, read_series_json, write_series_json
from .stats import Correction, classify_and_rank, mann_kendall


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topictrends",
        description="Topic trend and burst analytics for bibliographic corpora.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse an export and write canonical JSON-lines")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--format", choices=["wos", "jsonl"], default=None,
                   help="input format; inferred from the file suffix when omitted")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--year-min", type=int, default=2004)
    p.add_argument("--year-max", type=int, default=2021)
    p.add_argument("--doc-type", action="append", default=None,
                   help="allowed document type; repeatable")
    p.add_argument("--language", action="append", default=None,
                   help="allowed language; repeatable")
    p.add_argument("--no-filter", action="store_true", help="keep every parsed record")

    p = sub.add_parser("annotate", help="link document text to topic entities")
    p.add_argument("--corpus", required=True, type=Path, help="canonical JSON-lines corpus")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--gazetteer", type=Path, help="offline gazetteer TSV")
    p.add_argument("--min-link-probability", type=float, default=0.16)
    p.add_argument("--remote", action="store_true", help="use the remote annotation service")
    p.add_argument("--endpoint", default="")
    p.add_argument("--lang", default="en")
    p.add_argument("--epsilon", type=float, default=0.427)
    p.add_argument("--rho-threshold", type=float, default=0.16)
    p.add_argument("--long-text", type=int, default=10)
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--max-retries", type=int, default=3)
    p.add_argument("--concurrency", type=int, default=4)
    p.add_argument("--blacklist", type=Path)

    p = sub.add_parser("series", help="aggregate annotations into annual topic series")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--annotations", required=True, type=Path)
    p.add_argument("--min-docs", type=int, default=20)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("trends", help="rank topics by trend test and slope")
    p.add_argument("--series", required=True, type=Path)
    p.add_argument("--correction", choices=[c.value for c in Correction],
                   default=Correction.SIGNIFICANT_LAGS.value)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--top-k", type=int, default=20)
    p.add_argument("--out-csv", required=True, type=Path)
    p.add_argument("--out-json", required=True, type=Path)

    p = sub.add_parser("bursts", help="detect burst intervals per topic")
    p.add_argument("--series", required=True, type=Path)
    p.add_argument("--s", type=float, default=2.0, help="burst rate ratio")
    p.add_argument("--gamma", type=float, default=1.0, help="transition penalty scale")
    p.add_argument("--p1-cap", type=float, default=0.9999)
    p.add_argument("--burst-top-n", type=int, default=100)
    p.add_argument("--out-csv", required=True, type=Path)
    p.add_argument("--out-json", required=True, type=Path)

    p = sub.add_parser("render", help="draw the burst timeline SVG")
    p.add_argument("--bursts", required=True, type=Path, help="bursts JSON report")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--width", type=int, default=1000)
    p.add_argument("--row-height", type=int, default=22)
    p.add_argument("--min-thickness", type=float, default=3.0)
    p.add_argument("--max-thickness", type=float, default=16.0)
    p.add_argument("--sort-by-weight", action="store_true")

    p = sub.add_parser("pipeline", help="run the full pipeline from a config file")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--min-docs", type=int, default=None)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--burst-top-n", type=int, default=None)
    p.add_argument("--out", type=Path, default=None, help="output directory override")

    return parser


def _cmd_ingest(args: argparse.Namespace) -> int:
    raw = args.input.read_bytes()
    fmt = args.format or ("jsonl" if args.input.suffix in (".jsonl", ".ndjson") else "wos")
    docs = parse_canonical_jsonl(raw) if fmt == "jsonl" else parse_wos_export(raw)
    if not args.no_filter:
        f = CorpusFilter(
            year_min=args.year_min,
            year_max=args.year_max,
            allowed_doc_types=frozenset(args.doc_type or ["Article", "Proceedings Paper"]),
            allowed_languages=frozenset(args.language or ["English"]),
        )
        docs = filter_corpus(docs, f)
    args.out.write_bytes(write_canonical_jsonl(docs))
    print(f"wrote {len(docs)} documents to {args.out}")
    return 0


def _cmd_annotate(args: argparse.Namespace) -> int:
    docs = parse_canonical_jsonl(args.corpus.read_bytes())
    if args.remote == bool(args.gazetteer):
        raise TopicTrendsError("choose exactly one of --gazetteer or --remote")
    if args.remote:
        cfg = AnnotatorConfig(
            endpoint_url=args.endpoint,
            language=args.lang,
            epsilon=args.epsilon,
            rho_threshold=args.rho_threshold,
            long_text=args.long_text,
            timeout=args.timeout,
            max_retries=args.max_retries,
            concurrency=args.concurrency,
        )
        with RemoteAnnotator(cfg) as annotator:
            annotations = [a for _, annos in annotator.annotate_documents(docs) for a in annos]
    else:
        gazetteer = load_gazetteer(args.gazetteer.read_bytes())
        annotations = []
        for doc in docs:
            annotations.extend(
                annotate_gazetteer(
                    merge_text(doc), gazetteer, args.min_link_probability, doc_id=doc.id
                )
            )
    if args.blacklist:
        annotations = apply_blacklist(annotations, load_blacklist(args.blacklist.read_bytes()))
    args.out.write_bytes(write_annotations_jsonl(annotations))
    print(f"wrote {len(annotations)} annotations to {args.out}")
    return 0


def _cmd_series(args: argparse.Namespace) -> int:
    docs = parse_canonical_jsonl(args.corpus.read_bytes())
    annotations = read_annotations_jsonl(args.annotations.read_bytes())
    totals, series = build_series(docs, annotations, min_docs=args.min_docs)
    args.out.write_bytes(write_series_json(totals, series))
    print(f"wrote {len(series)} topic series over {totals.year_min}-{totals.year_max} to {args.out}")
    return 0


def _cmd_trends(args: argparse.Namespace) -> int:
    _, series = read_series_json(args.series.read_bytes())
    correction = Correction(args.correction)
    tested, untestable = [], []
    for s in series:
        try:
            tested.append((s.topic, mann_kendall(list(s.counts), correction, args.alpha)))
        except InsufficientData:
            untestable.append(s.topic)
    ranked = classify_and_rank(tested, top_k=args.top_k)
    args.out_csv.write_bytes(render_trend_table(ranked))
    args.out_json.write_bytes(render_trend_json(ranked, untestable))
    print(f"ranked {len(ranked)} increasing topics ({len(untestable)} untestable)")
    return 0


def _cmd_bursts(args: argparse.Namespace) -> int:
    totals, series = read_series_json(args.series.read_bytes())
    params = BurstParams(s=args.s, gamma=args.gamma, p1_cap=args.p1_cap)
    bursts = burst_table(series, totals, params, top_n=args.burst_top_n)
    args.out_csv.write_bytes(render_burst_table(bursts))
    args.out_json.write_bytes(render_burst_json(bursts))
    print(f"found {len(bursts)} burst intervals across {len({b.topic for b in bursts})} topics")
    return 0


def _cmd_render(args: argparse.Namespace) -> int:
    payload = json.loads(args.bursts.read_text(encoding="utf-8"))
    bursts = [
        BurstInterval(
            topic=b["topic"],
            start_year=b["start_year"],
            end_year=b["end_year"],
            weight=b["weight"],
        )
        for b in payload.get("bursts", [])
    ]
    layout = TimelineLayout.fit(
        bursts,
        width=args.width,
        row_height=args.row_height,
        min_thickness=args.min_thickness,
        max_thickness=args.max_thickness,
    )
    args.out.write_bytes(render_timeline_svg(bursts, layout, args.sort_by_weight))
    print(f"wrote timeline with {len(bursts)} bars to {args.out}")
    return 0


def _cmd_pipeline(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    updates = {}
    if args.alpha is not None:
        updates["alpha"] = args.alpha
    if args.min_docs is not None:
        updates["min_docs"] = args.min_docs
    if args.top_k is not None:
        updates["top_k"] = args.top_k
    if args.burst_top_n is not None:
        updates["burst_top_n"] = args.burst_top_n
    if args.out is not None:
        updates["out_dir"] = args.out
    if args.gamma is not None or args.s is not None:
        updates["burst_params"] = BurstParams(
            s=args.s if args.s is not None else cfg.burst_params.s,
            gamma=args.gamma if args.gamma is not None else cfg.burst_params.gamma,
            p1_cap=cfg.burst_params.p1_cap,
        )
    if updates:
        cfg = dataclasses.replace(cfg, **updates)
    paths = run_pipeline(cfg)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "annotate": _cmd_annotate,
    "series": _cmd_series,
    "trends": _cmd_trends,
    "bursts": _cmd_bursts,
    "render": _cmd_render,
    "pipeline": _cmd_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (TopicTrendsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
