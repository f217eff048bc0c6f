"""Static SVG charts: daily-case bars, forecast curve, NPI/threshold/drift lines.

Output is deterministic to the byte for fixed input: floats are formatted
with fixed precision and no timestamps or generated ids are embedded.
"""

from __future__ import annotations

import json
from typing import Mapping

from . import dates
from .data import DailySeries
from .forecast import ForecastSeries
from .reporting import RegionReport

WIDTH = 960
HEIGHT = 420
MARGIN_LEFT = 64
MARGIN_RIGHT = 16
MARGIN_TOP = 48
MARGIN_BOTTOM = 44

BAR_COLOR = "#c0c0c0"
FORECAST_COLOR = "#1f77b4"
NPI_COLOR = "#2ca02c"
THRESHOLD_COLOR = "#d62728"
DRIFT_COLOR = "#ff7f0e"

_NPI_LABELS = {
    "gathering_restriction": "gathering",
    "social_distancing": "distancing",
    "school_closure": "schools",
    "lockdown": "lockdown",
    "mask_wearing": "masks",
}


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


def render_chart(
    report: RegionReport,
    actuals: DailySeries,
    forecasts: ForecastSeries | None,
    config: Mapping | None = None,
) -> str:
    """Render one region's chart as an SVG document string."""
    n = len(actuals.values)
    day0 = actuals.start_day
    day1 = actuals.end_day
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    ymax = max(float(actuals.values.max()), 1.0) * 1.15

    def x_of(day: int) -> float:
        if day1 == day0:
            return MARGIN_LEFT
        return MARGIN_LEFT + (day - day0) / (day1 - day0) * plot_w

    def y_of(value: float) -> float:
        v = min(max(value, 0.0), ymax)
        return MARGIN_TOP + plot_h * (1.0 - v / ymax)

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">'
    )
    if config is not None:
        parts.append(f"<!-- config: {_esc(json.dumps(config, sort_keys=True))} -->")
    parts.append(
        f'<text x="{MARGIN_LEFT}" y="20" font-size="15" font-weight="bold">'
        f"{_esc(report.region.name)}: daily cases, forecast, and detected drift</text>"
    )

    # axes
    x0, x1 = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    y0, y1 = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM
    parts.append(f'<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}" stroke="#333"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="#333"/>')
    for k in range(5):
        value = ymax * k / 4
        yy = y_of(value)
        parts.append(
            f'<text x="{x0 - 6}" y="{_fmt(yy + 3)}" text-anchor="end">{int(round(value))}</text>'
        )
        if k:
            parts.append(
                f'<line x1="{x0}" y1="{_fmt(yy)}" x2="{x1}" y2="{_fmt(yy)}" '
                f'stroke="#eee"/>'
            )
    month_seen = set()
    for day in range(day0, day1 + 1):
        d = dates.to_date(day)
        if d.day == 1 and d.month not in month_seen:
            month_seen.add(d.month)
            parts.append(
                f'<text x="{_fmt(x_of(day))}" y="{y1 + 16}" text-anchor="middle">'
                f"{d.strftime('%b')}</text>"
            )

    # daily-case bars
    bar_w = max(plot_w / max(n, 1) * 0.8, 0.5)
    for i, v in enumerate(actuals.values):
        if v <= 0:
            continue
        xx = x_of(day0 + i) - bar_w / 2
        yy = y_of(float(v))
        parts.append(
            f'<rect x="{_fmt(xx)}" y="{_fmt(yy)}" width="{_fmt(bar_w)}" '
            f'height="{_fmt(y1 - yy)}" fill="{BAR_COLOR}"/>'
        )

    # forecast curve (clipped at the plot top)
    if forecasts is not None and len(forecasts.values) > 0:
        points = " ".join(
            f"{_fmt(x_of(forecasts.start_day + i))},{_fmt(y_of(float(v)))}"
            for i, v in enumerate(forecasts.values)
            if day0 <= forecasts.start_day + i <= day1
        )
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{FORECAST_COLOR}" '
            f'stroke-width="1.8"/>'
        )
    else:
        parts.append(
            f'<text x="{x0 + 8}" y="{y0 + 14}" fill="{THRESHOLD_COLOR}">'
            "warning: no forecast available</text>"
        )

    def vline(day: int, color: str, label: str, label_y: int, dash: str = "4,3") -> None:
        if not day0 <= day <= day1:
            return
        xx = _fmt(x_of(day))
        parts.append(
            f'<line x1="{xx}" y1="{y0}" x2="{xx}" y2="{y1}" stroke="{color}" '
            f'stroke-dasharray="{dash}"/>'
        )
        parts.append(
            f'<text x="{_fmt(x_of(day) + 3)}" y="{label_y}" fill="{color}">'
            f"{_esc(label)}</text>"
        )

    label_y = y0 + 12
    for event in sorted(report.events, key=lambda e: (e.day, e.kind.value)):
        label = f"{_NPI_LABELS.get(event.kind.value, event.kind.value)} {dates.iso(event.day)}"
        vline(event.day, NPI_COLOR, label, label_y)
        label_y += 12
    if report.threshold_day is not None:
        vline(report.threshold_day, THRESHOLD_COLOR,
              f"1 death/1M {dates.iso(report.threshold_day)}", label_y)
        label_y += 12
    if report.drift_day is not None:
        vline(report.drift_day, DRIFT_COLOR,
              f"drift {dates.iso(report.drift_day)}", label_y, dash="1,0")

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
