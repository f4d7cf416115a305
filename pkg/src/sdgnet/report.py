"""Per-country classification tables and chart data (CSV + minimal SVG)."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .exceptions import DomainError
from .features import NodeFeatures
from .model import classify, predict_probability
from .network import IndicatorNetwork, write_matrix

logger = logging.getLogger(__name__)

GOALS = tuple(range(1, 18))
SYNERGY_COLOR = "#1a9641"
TRADEOFF_COLOR = "#d7191c"


@dataclass(frozen=True)
class ReportRow:
    indicator_id: str
    sdg_goal: int
    x_d: float
    x_h: float
    probability: float
    predicted_label: int
    y_label: int


@dataclass
class CountryReport:
    country_code: str
    rows: list[ReportRow]
    per_goal_counts: dict[int, tuple[int, int]]  # goal -> (synergy, trade-off)

    @property
    def totals(self) -> tuple[int, int]:
        syn = sum(s for s, _ in self.per_goal_counts.values())
        tro = sum(t for _, t in self.per_goal_counts.values())
        return syn, tro


def country_report(model_beta, features: Sequence[NodeFeatures], threshold: float = 0.5) -> CountryReport:
    """Classify one country's indicators and count them per SDG goal."""
    features = list(features)
    if not features:
        raise DomainError("no features to report on")
    countries = {f.country_code for f in features}
    if len(countries) != 1:
        raise DomainError(f"features span several countries: {sorted(countries)}")
    rows = []
    counts: dict[int, list[int]] = {}
    for f in features:
        p = predict_probability(model_beta, f.x_d, f.x_h)
        lab = classify(p, threshold)
        rows.append(ReportRow(f.indicator_id, f.sdg_goal, f.x_d, f.x_h, p, lab, f.y_label))
        c = counts.setdefault(f.sdg_goal, [0, 0])
        c[0 if lab == 1 else 1] += 1
    per_goal = {g: tuple(counts[g]) for g in sorted(counts)}
    return CountryReport(features[0].country_code, rows, per_goal)


def write_report(report: CountryReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["indicator_id", "sdg_goal", "x_d", "x_h", "probability",
                    "predicted_label", "y_label"])
        for r in report.rows:
            w.writerow([r.indicator_id, r.sdg_goal, f"{r.x_d:.6f}", f"{r.x_h:.6f}",
                        f"{r.probability:.4f}", r.predicted_label, r.y_label])


def write_per_goal(report: CountryReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["goal", "synergy_count", "tradeoff_count"])
        for g, (s, t) in report.per_goal_counts.items():
            w.writerow([g, s, t])


# --- colours ---------------------------------------------------------------

def _lerp(c0, c1, t):
    return tuple(round(a + (b - a) * t) for a, b in zip(c0, c1))


def diverging_color(value: float) -> str:
    """Red at -1, white at 0, green at +1; values outside are clamped."""
    v = max(-1.0, min(1.0, float(value)))
    red, white, green = (215, 25, 28), (255, 255, 255), (26, 150, 65)
    rgb = _lerp(white, red, -v) if v < 0 else _lerp(white, green, v)
    return "#%02x%02x%02x" % rgb


def _svg(width, height, body) -> str:
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n' + "\n".join(body) + "\n</svg>\n")


def heatmap_svg(weights: np.ndarray, labels: Sequence[str] = (), cell: int = 8) -> str:
    n = weights.shape[0]
    margin = 4
    body = ['<rect width="100%" height="100%" fill="white"/>']
    for i in range(n):
        for j in range(n):
            title = f"<title>{escape(labels[i])} / {escape(labels[j])}: {weights[i, j]:.3f}</title>" if labels else ""
            body.append(f'<rect x="{margin + j * cell}" y="{margin + i * cell}" width="{cell}" '
                        f'height="{cell}" fill="{diverging_color(weights[i, j])}">{title}</rect>')
    side = 2 * margin + n * cell
    return _svg(side, side, body)


def heatmap_export(network: IndicatorNetwork, path, svg: bool = True) -> list[Path]:
    """Write the full correlation matrix (diagonal 1.0) and optionally an SVG beside it."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        write_matrix(network.weights, fh)
    out = [path]
    if svg:
        svg_path = path.with_name(path.name + ".svg")
        labels = [nd.indicator_id for nd in network.nodes]
        svg_path.write_text(heatmap_svg(network.weights, labels))
        out.append(svg_path)
    return out


def bar_rows(report: CountryReport) -> list[tuple[int, int, int]]:
    return [(g, *report.per_goal_counts.get(g, (0, 0))) for g in GOALS]


def pie_rows(report: CountryReport) -> list[tuple[int, float]]:
    """Share of synergy-dominated indicators per goal (goals with none omitted)."""
    total = report.totals[0]
    if total == 0:
        return []
    return [(g, s / total * 100.0) for g, s, _ in bar_rows(report) if s > 0]


def bars_svg(rows) -> str:
    width, height, base = 40 + 34 * len(rows), 220, 190
    top = max([max(s, t) for _, s, t in rows] + [1])
    scale = 160 / top
    body = ['<rect width="100%" height="100%" fill="white"/>',
            f'<line x1="30" y1="{base}" x2="{width - 5}" y2="{base}" stroke="black"/>']
    for k, (g, s, t) in enumerate(rows):
        x = 34 + 34 * k
        for dx, count, color in ((0, s, SYNERGY_COLOR), (13, t, TRADEOFF_COLOR)):
            h = count * scale
            body.append(f'<rect x="{x + dx}" y="{base - h:.2f}" width="12" height="{h:.2f}" '
                        f'fill="{color}"><title>SDG {g}: {count}</title></rect>')
        body.append(f'<text x="{x + 12}" y="{base + 14}" font-size="10" '
                    f'text-anchor="middle">{g}</text>')
    return _svg(width, height, body)


def pie_svg(rows) -> str:
    cx = cy = r = 100
    body = ['<rect width="100%" height="100%" fill="white"/>']
    angle = -math.pi / 2
    for k, (g, pct) in enumerate(rows):
        hue = round(360 * k / max(len(rows), 1))
        color = f"hsl({hue},60%,55%)"
        if pct >= 100.0 - 1e-9:
            body.append(f'<circle cx="{cx}" cy="{cy}" r="{r}" fill="{color}">'
                        f'<title>SDG {g}: {pct:.2f}%</title></circle>')
            continue
        end = angle + 2 * math.pi * pct / 100.0
        x0, y0 = cx + r * math.cos(angle), cy + r * math.sin(angle)
        x1, y1 = cx + r * math.cos(end), cy + r * math.sin(end)
        large = 1 if pct > 50.0 else 0
        body.append(f'<path d="M{cx},{cy} L{x0:.3f},{y0:.3f} A{r},{r} 0 {large} 1 {x1:.3f},{y1:.3f} Z" '
                    f'fill="{color}" stroke="white"><title>SDG {g}: {pct:.2f}%</title></path>')
        angle = end
    return _svg(2 * r, 2 * r, body)


def distribution_export(report: CountryReport, bars_path, pie_path, svg: bool = True) -> list[Path]:
    """Grouped-bar counts for goals 1-17 and the synergy pie shares.

    The pie files are skipped when the country has no synergy-dominated
    indicator.
    """
    bars_path, pie_path = Path(bars_path), Path(pie_path)
    bars = bar_rows(report)
    with open(bars_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["goal", "synergy_count", "tradeoff_count"])
        w.writerows(bars)
    out = [bars_path]
    if svg:
        p = bars_path.with_name(bars_path.name + ".svg")
        p.write_text(bars_svg(bars))
        out.append(p)

    pie = pie_rows(report)
    if not pie:
        logger.warning("%s: no synergy-dominated indicators, pie chart skipped", report.country_code)
        return out
    with open(pie_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["goal", "percent"])
        for g, pct in pie:
            w.writerow([g, f"{pct:.4f}"])
    out.append(pie_path)
    if svg:
        p = pie_path.with_name(pie_path.name + ".svg")
        p.write_text(pie_svg(pie))
        out.append(p)
    return out
