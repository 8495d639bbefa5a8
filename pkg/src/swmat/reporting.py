"""Report emitters: radar SVG, overview CSV, scatter CSV.

Everything here is deterministic text generation; callers decide where the
bytes go.  Radar values live on a 0..5 scale where the outer ring is 5; a
missing value interrupts the profile line instead of dropping to zero.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass
from fractions import Fraction
from xml.sax.saxutils import escape

from .maturity import format_ratio
from .model import MaturityReport

RADAR_MAX = Fraction(5)


@dataclass(frozen=True)
class RadarSeries:
    name: str
    values: tuple[Fraction | None, ...]
    dashed: bool = False


@dataclass(frozen=True)
class RadarSpec:
    spokes: tuple[tuple[int, str], ...]
    series: tuple[RadarSeries, ...]

    def validate(self) -> None:
        if len(self.spokes) < 3:
            raise ValueError("a radar needs at least 3 spokes")
        for series in self.series:
            if len(series.values) != len(self.spokes):
                raise ValueError(
                    f"series {series.name!r} has {len(series.values)} values "
                    f"for {len(self.spokes)} spokes"
                )


_SIZE = 520.0
_CENTER = _SIZE / 2
_INNER = 30.0   # radius drawn for value 0
_OUTER = 220.0  # radius drawn for value 5
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


def radius_for(value: Fraction) -> float:
    """Affine map from a 0..5 value onto the ring radii."""
    return _INNER + (_OUTER - _INNER) * float(value) / float(RADAR_MAX)


def _point(index: int, count: int, value: Fraction) -> tuple[float, float]:
    angle = -math.pi / 2 + 2 * math.pi * index / count
    r = radius_for(value)
    return (_CENTER + r * math.cos(angle), _CENTER + r * math.sin(angle))


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _segments(values: tuple[Fraction | None, ...]) -> list[list[int]]:
    """Runs of answered spokes; a missing value splits the profile line."""
    runs: list[list[int]] = []
    current: list[int] = []
    for idx, value in enumerate(values):
        if value is None:
            if current:
                runs.append(current)
            current = []
        else:
            current.append(idx)
    if current:
        runs.append(current)
    return runs


def emit_radar_svg(spec: RadarSpec) -> str:
    """Render the radar as standalone SVG 1.1 text."""
    spec.validate()
    count = len(spec.spokes)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_SIZE:.0f}" height="{_SIZE:.0f}" '
        f'viewBox="0 0 {_SIZE:.0f} {_SIZE:.0f}">',
        f'  <circle cx="{_fmt(_CENTER)}" cy="{_fmt(_CENTER)}" r="{_fmt(_INNER)}" '
        'fill="none" stroke="#999999" stroke-width="1"/>',
        f'  <circle cx="{_fmt(_CENTER)}" cy="{_fmt(_CENTER)}" r="{_fmt(_OUTER)}" '
        'fill="none" stroke="#333333" stroke-width="1"/>',
    ]
    for idx, (qid, label) in enumerate(spec.spokes):
        x0, y0 = _point(idx, count, Fraction(0))
        x1, y1 = _point(idx, count, RADAR_MAX)
        lines.append(
            f'  <line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" '
            'stroke="#cccccc" stroke-width="1"/>'
        )
        lx, ly = _point(idx, count, RADAR_MAX + Fraction(1, 2))
        lines.append(
            f'  <text x="{_fmt(lx)}" y="{_fmt(ly)}" font-size="11" '
            f'text-anchor="middle">{escape(f"#{qid} {label}" if label else f"#{qid}")}</text>'
        )
    for series_index, series in enumerate(spec.series):
        color = _COLORS[series_index % len(_COLORS)]
        dash = ' stroke-dasharray="6 4"' if series.dashed else ""
        lines.append(f'  <g data-series="{escape(series.name)}">')
        runs = _segments(series.values)
        complete = len(runs) == 1 and len(runs[0]) == count
        for run in runs:
            points = [_point(idx, count, series.values[idx]) for idx in run]
            if complete:
                points.append(points[0])  # close the loop only when unbroken
            coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
            lines.append(
                f'    <polyline points="{coords}" fill="none" '
                f'stroke="{color}" stroke-width="2"{dash}/>'
            )
        lines.append("  </g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# --- CSV emitters ---------------------------------------------------------------


OVERVIEW_HEADER = ("company", "category", "m_mod", "m_test", "m_op", "overall")


def _csv_writer() -> tuple[io.StringIO, object]:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    return buffer, writer


def emit_overview_csv(reports: list[MaturityReport]) -> str:
    """One row per company with the three category maturities and the overall."""
    if not reports:
        raise ValueError("no reports to emit")
    buffer, writer = _csv_writer()
    writer.writerow(OVERVIEW_HEADER)
    for report in reports:
        writer.writerow(
            (
                report.company,
                report.company_category.value,
                format_ratio(report.m_mod),
                format_ratio(report.m_test),
                format_ratio(report.m_op),
                format_ratio(report.overall),
            )
        )
    return buffer.getvalue()


@dataclass(frozen=True)
class ScatterPoint:
    x_label: str
    y_label: str
    x: Fraction
    y: Fraction
    company: str
    category: str


def emit_scatter_csv(points: list[ScatterPoint]) -> str:
    """Point rows plus one median row per category, sharing one axis pair."""
    if not points:
        raise ValueError("no points to emit")
    labels = {(p.x_label, p.y_label) for p in points}
    if len(labels) != 1:
        raise ValueError("scatter points must share their axis labels")
    x_label, y_label = next(iter(labels))

    buffer, writer = _csv_writer()
    writer.writerow(("company", "category", x_label, y_label, "kind"))
    for p in points:
        writer.writerow(
            (p.company, p.category, format_ratio(p.x), format_ratio(p.y), "point")
        )
    by_category: dict[str, list[ScatterPoint]] = {}
    for p in points:
        by_category.setdefault(p.category, []).append(p)
    for category in sorted(by_category):
        group = by_category[category]
        writer.writerow(
            (
                "",
                category,
                format_ratio(statistics.median(p.x for p in group)),
                format_ratio(statistics.median(p.y for p in group)),
                "median",
            )
        )
    return buffer.getvalue()
