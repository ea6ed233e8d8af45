"""Report renderers: ranked trend tables, burst tables, and the burst timeline.

All display rounding happens here; the JSON twins carry full double
precision. Output bytes are deterministic for identical inputs.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

from .burst import BurstInterval
from .stats import TrendReportRow

TREND_CSV_HEADER = ["topic", "n", "S", "var_s", "correction_factor", "z", "p", "slope", "trend", "hot"]
BURST_CSV_HEADER = ["topic", "start_year", "end_year", "weight"]


@dataclass(frozen=True)
class TimelineLayout:
    """Geometry for the burst timeline graphic."""

    width: int = 1000
    height: int = 400
    row_height: int = 22
    min_thickness: float = 3.0
    max_thickness: float = 16.0
    year_min: int = 2004
    year_max: int = 2021
    margin_left: int = 190
    margin_right: int = 20
    margin_top: int = 20
    margin_bottom: int = 42

    def __post_init__(self):
        if self.min_thickness > self.max_thickness:
            raise ValueError("min_thickness exceeds max_thickness")
        if self.year_min > self.year_max:
            raise ValueError(f"year_min {self.year_min} > year_max {self.year_max}")

    @classmethod
    def fit(cls, bursts: Sequence[BurstInterval], **overrides) -> "TimelineLayout":
        """Layout sized to the burst set: axis covering all intervals, one row per topic."""
        if bursts:
            overrides.setdefault("year_min", min(b.start_year for b in bursts))
            overrides.setdefault("year_max", max(b.end_year for b in bursts))
        rows = len({b.topic for b in bursts})
        probe = cls(**{k: v for k, v in overrides.items() if k != "height"})
        if "height" not in overrides:
            overrides["height"] = probe.margin_top + rows * probe.row_height + probe.margin_bottom
        return cls(**overrides)


def _format_p(p: float) -> str:
    return f"{p:.1e}"


def render_trend_table(rows: Sequence[TrendReportRow]) -> bytes:
    """Ranked trend table as CSV bytes.

    Slope and z show 3 decimals, the p-value 2 significant digits in
    scientific notation, variance fields 4 decimals; the hot flag renders as
    true/false.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TREND_CSV_HEADER)
    for row in rows:
        r = row.result
        writer.writerow(
            [
                row.topic,
                r.n,
                r.s,
                f"{r.var_s:.4f}",
                f"{r.correction_factor:.4f}",
                f"{r.z:.3f}",
                _format_p(r.p),
                f"{r.slope:.3f}",
                r.trend_class,
                "true" if row.hot else "false",
            ]
        )
    return buf.getvalue().encode("utf-8")


def render_trend_json(rows: Sequence[TrendReportRow], untestable: Sequence[str] = ()) -> bytes:
    """Full-precision JSON twin of the trend table.

    Topics whose series were too short to test are listed separately so
    coverage stays auditable.
    """
    payload = {
        "rows": [
            {
                "topic": row.topic,
                "n": row.result.n,
                "S": row.result.s,
                "var_s": row.result.var_s,
                "correction_factor": row.result.correction_factor,
                "z": row.result.z,
                "p": row.result.p,
                "slope": row.result.slope,
                "trend": row.result.trend_class,
                "hot": row.hot,
            }
            for row in rows
        ],
        "untestable_topics": sorted(untestable),
    }
    return (json.dumps(payload, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def render_burst_table(bursts: Sequence[BurstInterval]) -> bytes:
    """Burst intervals as CSV bytes with weights at 6 decimals."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BURST_CSV_HEADER)
    for b in bursts:
        writer.writerow([b.topic, b.start_year, b.end_year, f"{b.weight:.6f}"])
    return buf.getvalue().encode("utf-8")


def render_burst_json(bursts: Sequence[BurstInterval]) -> bytes:
    """Full-precision JSON twin of the burst table."""
    payload = {
        "bursts": [
            {
                "topic": b.topic,
                "start_year": b.start_year,
                "end_year": b.end_year,
                "weight": b.weight,
            }
            for b in bursts
        ]
    }
    return (json.dumps(payload, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def render_timeline_svg(
    bursts: Sequence[BurstInterval],
    layout: TimelineLayout,
    sort_by_weight: bool = False,
) -> bytes:
    """Standalone SVG 1.1 timeline: one labeled row per topic, one bar per interval.

    Bars span [start_year, end_year + 1) on a linear year axis; thickness
    interpolates linearly between the layout's min and max as
    weight / max_weight. Rows order by first burst year then topic name, or
    by total weight descending when sort_by_weight is set. An empty burst set
    renders the axis alone.
    """
    for b in bursts:
        if b.start_year < layout.year_min or b.end_year > layout.year_max:
            raise ValueError(
                f"interval {b.start_year}-{b.end_year} outside axis "
                f"{layout.year_min}-{layout.year_max}"
            )

    plot_w = layout.width - layout.margin_left - layout.margin_right
    span = layout.year_max + 1 - layout.year_min
    unit = plot_w / span

    def x(year: int) -> float:
        return layout.margin_left + (year - layout.year_min) * unit

    by_topic: dict[str, list[BurstInterval]] = {}
    for b in bursts:
        by_topic.setdefault(b.topic, []).append(b)
    if sort_by_weight:
        ordered = sorted(
            by_topic.items(), key=lambda kv: (-sum(b.weight for b in kv[1]), kv[0])
        )
    else:
        ordered = sorted(
            by_topic.items(), key=lambda kv: (min(b.start_year for b in kv[1]), kv[0])
        )

    max_weight = max((b.weight for b in bursts), default=0.0)
    axis_y = layout.margin_top + len(ordered) * layout.row_height

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{layout.width}" height="{layout.height}" '
        f'viewBox="0 0 {layout.width} {layout.height}">',
        f'<line x1="{x(layout.year_min):.2f}" y1="{axis_y:.2f}" '
        f'x2="{x(layout.year_max + 1):.2f}" y2="{axis_y:.2f}" '
        'stroke="#333" stroke-width="1"/>',
    ]
    for year in range(layout.year_min, layout.year_max + 1):
        tick_x = x(year)
        parts.append(
            f'<line x1="{tick_x:.2f}" y1="{axis_y:.2f}" x2="{tick_x:.2f}" '
            f'y2="{axis_y + 5:.2f}" stroke="#333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{tick_x + unit / 2:.2f}" y="{axis_y + 18:.2f}" '
            'font-family="sans-serif" font-size="11" text-anchor="middle">'
            f"{year}</text>"
        )

    for row, (topic, intervals) in enumerate(ordered):
        row_top = layout.margin_top + row * layout.row_height
        center = row_top + layout.row_height / 2
        parts.append(
            f'<text x="{layout.margin_left - 8:.2f}" y="{center + 4:.2f}" '
            'font-family="sans-serif" font-size="12" text-anchor="end">'
            f"{escape(topic)}</text>"
        )
        for b in sorted(intervals, key=lambda i: i.start_year):
            frac = b.weight / max_weight if max_weight > 0 else 0.0
            thickness = layout.min_thickness + frac * (
                layout.max_thickness - layout.min_thickness
            )
            width = (b.end_year + 1 - b.start_year) * unit
            parts.append(
                f'<rect x="{x(b.start_year):.2f}" y="{center - thickness / 2:.2f}" '
                f'width="{width:.2f}" height="{thickness:.2f}" fill="#b22222">'
                f"<title>{escape(b.topic)}: {b.start_year}-{b.end_year} "
                f"(weight {b.weight:.3f})</title></rect>"
            )

    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode("utf-8")
