"""Topic trend and burst analytics for bibliographic corpora.

The package ingests publication records, links their text to topic entities
(remotely or via an offline gazetteer), aggregates per-topic annual series,
ranks monotonic trends with a serial-correlation-corrected Mann-Kendall test
and Theil-Sen slopes, detects bursts with a two-state automaton, and renders
ranked tables plus a timeline graphic.
"""

__version__ = "0.1.0"

from .annotate import (
    AnnotatorConfig,
    Blacklist,
    EntityAnnotation,
    Gazetteer,
    RemoteAnnotator,
    annotate_gazetteer,
    annotate_remote,
    apply_blacklist,
    load_blacklist,
    load_gazetteer,
    read_annotations_jsonl,
    write_annotations_jsonl,
)
from .burst import BurstInterval, BurstParams, burst_table, detect_bursts
from .corpus import (
    CorpusFilter,
    Document,
    filter_corpus,
    merge_text,
    parse_canonical_jsonl,
    parse_wos_export,
    write_canonical_jsonl,
)
from .pipeline import PipelineConfig, load_config, run_pipeline
from .render import (
    TimelineLayout,
    render_burst_json,
    render_burst_table,
    render_timeline_svg,
    render_trend_json,
    render_trend_table,
)
from .series import (
    CorpusYearTotals,
    TopicYearSeries,
    build_series,
    read_series_json,
    write_series_json,
)
from .stats import (
    Correction,
    MannKendallResult,
    TrendReportRow,
    classify_and_rank,
    hamed_rao_factor,
    mann_kendall,
    normal_cdf,
    rank_autocorrelation,
    theil_sen,
)

__all__ = [
    "__version__",
    "AnnotatorConfig",
    "Blacklist",
    "BurstInterval",
    "BurstParams",
    "CorpusFilter",
    "CorpusYearTotals",
    "Correction",
    "Document",
    "EntityAnnotation",
    "Gazetteer",
    "MannKendallResult",
    "PipelineConfig",
    "RemoteAnnotator",
    "TimelineLayout",
    "TopicYearSeries",
    "TrendReportRow",
    "annotate_gazetteer",
    "annotate_remote",
    "apply_blacklist",
    "build_series",
    "burst_table",
    "classify_and_rank",
    "detect_bursts",
    "filter_corpus",
    "hamed_rao_factor",
    "load_blacklist",
    "load_config",
    "load_gazetteer",
    "mann_kendall",
    "merge_text",
    "normal_cdf",
    "parse_canonical_jsonl",
    "parse_wos_export",
    "rank_autocorrelation",
    "read_annotations_jsonl",
    "read_series_json",
    "render_burst_json",
    "render_burst_table",
    "render_timeline_svg",
    "render_trend_json",
    "render_trend_table",
    "run_pipeline",
    "theil_sen",
    "write_annotations_jsonl",
    "write_canonical_jsonl",
    "write_series_json",
]
