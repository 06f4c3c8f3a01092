"""Colour-coded tables and SVG figures for detection reports.

All output is deterministic: fixed float formatting, no timestamps,
no randomness, so identical reports give byte-identical files. SVGs
are hand-assembled strings — adequate for bar charts, scatters and
front overlays, and dependency-free.

The colour scheme is a five-step viridis-like ramp per metric, with
linear RGB interpolation between breakpoints; the chi-squared p-value
scale interpolates in log10 space.
"""

from __future__ import annotations

import html
import os
from dataclasses import dataclass

import numpy as np

from .detection import BinHistogram, BinsizeQuad, DetectionReport, Region
from .problems import ProblemSpec, reference_front

__all__ = [
    "ColourScale",
    "SCALES",
    "colour_for",
    "CSV_COLUMNS",
    "render_table",
    "render_histogram",
    "render_region_scatter",
    "render_front_scatter",
    "write_report_files",
]

_PALETTE = ("#fde725", "#5ec962", "#21918c", "#3b528b", "#440154")


def _hex_to_rgb(colour: str) -> tuple[int, int, int]:
    return tuple(int(colour[i : i + 2], 16) for i in (1, 3, 5))


def _rgb_to_hex(rgb: tuple[float, float, float]) -> str:
    return "#" + "".join(f"{int(c + 0.5):02x}" for c in rgb)


@dataclass(frozen=True)
class ColourScale:
    """Breakpoint colour ramp for one metric.

    Breakpoints are (value, colour) pairs ordered from best to worst;
    values may run in either direction. ``log10`` interpolates
    positionally in log space. Values beyond either end clamp.
    """

    metric: str
    breakpoints: tuple[tuple[float, str], ...]
    log10: bool = False

    def colour(self, value: float) -> str:
        values = [v for v, _ in self.breakpoints]
        colours = [c for _, c in self.breakpoints]
        if self.log10:
            value = np.log10(max(value, 1e-300))
            values = [np.log10(v) for v in values]
        ascending = values[-1] > values[0]
        if not ascending:
            values = [-v for v in values]
            value = -value
        if value <= values[0]:
            return colours[0]
        if value >= values[-1]:
            return colours[-1]
        idx = int(np.searchsorted(values, value, side="right")) - 1
        lo, hi = values[idx], values[idx + 1]
        t = 0.0 if hi == lo else (value - lo) / (hi - lo)
        rgb_lo = _hex_to_rgb(colours[idx])
        rgb_hi = _hex_to_rgb(colours[idx + 1])
        return _rgb_to_hex(tuple(a + t * (b - a) for a, b in zip(rgb_lo, rgb_hi)))


SCALES: dict[str, ColourScale] = {
    "bias_rej": ColourScale(
        "bias_rej", tuple(zip((0.1, 0.2, 0.3, 0.5, 1.0), _PALETTE))
    ),
    "chi2_p": ColourScale(
        "chi2_p", tuple(zip((0.1, 0.05, 0.01, 1e-20, 1e-50), _PALETTE)), log10=True
    ),
    "binsize": ColourScale(
        "binsize", tuple(zip((1.0, 1.2, 2.0, 4.0, 10.0), _PALETTE))
    ),
    "cei": ColourScale("cei", tuple(zip((1.0, 0.8, 0.6, 0.4, 0.1), _PALETTE))),
}


def colour_for(metric: str, value: float) -> str:
    """Hex colour of a metric value under the shared scheme."""
    if metric not in SCALES:
        raise ValueError(f"no colour scale for metric {metric!r}")
    return SCALES[metric].colour(value)


# --------------------------------------------------------------------------
# Tables
# --------------------------------------------------------------------------

CSV_COLUMNS = (
    "algorithm",
    "problem",
    "d",
    "BIAS_rej",
    "chi2_p",
    "binsize_B_L",
    "binsize_C_L",
    "binsize_C_R",
    "binsize_B_R",
    "CEI",
    "region",
)


def _row_values(report: DetectionReport) -> list[str]:
    return [
        report.algorithm,
        report.problem,
        str(report.d),
        f"{report.bias_rej:.4f}",
        f"{report.chi2_p_merged:.3e}",
        f"{report.quad.b_l:.3f}",
        f"{report.quad.c_l:.3f}",
        f"{report.quad.c_r:.3f}",
        f"{report.quad.b_r:.3f}",
        f"{report.cei.mean:.3f}",
        report.region.value,
    ]


def _cell_colours(report: DetectionReport) -> list[str | None]:
    return [
        None,
        None,
        None,
        colour_for("bias_rej", report.bias_rej),
        colour_for("chi2_p", report.chi2_p_merged),
        colour_for("binsize", report.quad.b_l),
        colour_for("binsize", report.quad.c_l),
        colour_for("binsize", report.quad.c_r),
        colour_for("binsize", report.quad.b_r),
        colour_for("cei", report.cei.mean),
        None,
    ]


def _sorted_reports(reports: list[DetectionReport]) -> list[DetectionReport]:
    return sorted(reports, key=lambda r: (r.algorithm, r.problem, r.d))


def render_table(reports: list[DetectionReport], format: str = "csv") -> str:
    """One row per (algorithm, problem, dimension) cell.

    csv is plain values; markdown and html colour-code the metric
    cells by backgrounds.
    """
    if not reports:
        raise ValueError("no reports to render")
    rows = _sorted_reports(reports)
    if format == "csv":
        lines = [",".join(CSV_COLUMNS)]
        lines += [",".join(_row_values(r)) for r in rows]
        return "\n".join(lines) + "\n"
    if format == "markdown":
        lines = [
            "| " + " | ".join(CSV_COLUMNS) + " |",
            "|" + "---|" * len(CSV_COLUMNS),
        ]
        for r in rows:
            cells = []
            for value, colour in zip(_row_values(r), _cell_colours(r)):
                if colour is None:
                    cells.append(value)
                else:
                    cells.append(
                        f'<span style="background:{colour}">{value}</span>'
                    )
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"
    if format == "html":
        out = [
            "<table>",
            "<thead><tr>"
            + "".join(f"<th>{html.escape(c)}</th>" for c in CSV_COLUMNS)
            + "</tr></thead>",
            "<tbody>",
        ]
        for r in rows:
            cells = []
            for value, colour in zip(_row_values(r), _cell_colours(r)):
                style = f' style="background:{colour}"' if colour else ""
                cells.append(f"<td{style}>{html.escape(value)}</td>")
            out.append("<tr>" + "".join(cells) + "</tr>")
        out += ["</tbody>", "</table>"]
        return "\n".join(out) + "\n"
    raise ValueError(f"unknown table format {format!r}")


# --------------------------------------------------------------------------
# SVG figures
# --------------------------------------------------------------------------


def _svg_open(width: int, height: int) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def render_histogram(
    hist: BinHistogram, quad: BinsizeQuad | None = None, title: str = ""
) -> str:
    """Bar chart of relative binsizes with the four tracked bins tinted.

    A dashed line marks binsize 1 (perfect uniformity); the boundary
    and centre bins of interest are tinted and labelled.
    """
    width, height = 640, 360
    left, right, top, bottom = 60, 20, 40, 50
    plot_w = width - left - right
    plot_h = height - top - bottom
    sizes = hist.binsizes
    K = hist.K
    y_max = max(1.2, float(sizes.max()) * 1.1)
    special = {0: "B_L", K // 2 - 1: "C_L", K // 2: "C_R", K - 1: "B_R"}

    parts = _svg_open(width, height)
    if title:
        parts.append(
            f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{html.escape(title)}</text>'
        )
    bar_w = plot_w / K
    for k in range(K):
        x = left + k * bar_w
        h = plot_h * float(sizes[k]) / y_max
        y = top + plot_h - h
        fill = "#e8734a" if k in special else "#7aa6c2"
        parts.append(
            f'<rect x="{_fmt(x + 1)}" y="{_fmt(y)}" width="{_fmt(bar_w - 2)}" '
            f'height="{_fmt(h)}" fill="{fill}"/>'
        )
        if k in special:
            parts.append(
                f'<text x="{_fmt(x + bar_w / 2)}" y="{height - 32}" '
                f'text-anchor="middle" font-family="sans-serif" font-size="11">'
                f"{special[k]}</text>"
            )
            parts.append(
                f'<text x="{_fmt(x + bar_w / 2)}" y="{_fmt(y - 4)}" '
                f'text-anchor="middle" font-family="sans-serif" font-size="10">'
                f"{sizes[k]:.2f}</text>"
            )
    y_one = top + plot_h - plot_h / y_max
    parts.append(
        f'<line x1="{left}" y1="{_fmt(y_one)}" x2="{left + plot_w}" '
        f'y2="{_fmt(y_one)}" stroke="#333333" stroke-dasharray="6,4"/>'
    )
    parts.append(
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" '
        f'y2="{top + plot_h}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>'
    )
    for value in (0.0, 1.0, y_max):
        y = top + plot_h - plot_h * value / y_max
        parts.append(
            f'<text x="{left - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{value:.1f}</text>'
        )
    parts.append(
        f'<text x="{left + plot_w / 2:.0f}" y="{height - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">coordinate bin</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_region_scatter(reports: list[DetectionReport], tau: float = 0.5) -> str:
    """Boundary sum vs centre sum per cell, over the region taxonomy.

    Points are coloured by their rejection fraction; the (2, 2)
    uniformity reference is marked with a cross.
    """
    if not reports:
        raise ValueError("no reports to render")
    width, height = 520, 520
    left, right, top, bottom = 60, 20, 20, 60
    plot_w = width - left - right
    plot_h = height - top - bottom
    xs = [r.quad.boundary_sum() for r in reports]
    ys = [r.quad.centre_sum() for r in reports]
    lim = max(4.0, max(xs) * 1.1, max(ys) * 1.1)

    def sx(v: float) -> float:
        return left + plot_w * v / lim

    def sy(v: float) -> float:
        return top + plot_h * (1.0 - v / lim)

    lo, hi = 2.0 - tau, 2.0 + tau
    parts = _svg_open(width, height)
    # region shading: E (bound), A (centre), the unbiased square
    parts.append(
        f'<rect x="{_fmt(sx(hi))}" y="{_fmt(sy(hi))}" '
        f'width="{_fmt(sx(lim) - sx(hi))}" height="{_fmt(sy(0) - sy(hi))}" '
        f'fill="#f2e8dc"/>'
    )
    parts.append(
        f'<rect x="{_fmt(sx(0))}" y="{_fmt(sy(lim))}" '
        f'width="{_fmt(sx(hi) - sx(0))}" height="{_fmt(sy(hi) - sy(lim))}" '
        f'fill="#dce8f2"/>'
    )
    parts.append(
        f'<rect x="{_fmt(sx(lo))}" y="{_fmt(sy(hi))}" '
        f'width="{_fmt(sx(hi) - sx(lo))}" height="{_fmt(sy(lo) - sy(hi))}" '
        f'fill="#dff2dc"/>'
    )
    labels = (
        ("E", lim * 0.9, 1.0),
        ("A", 1.0, lim * 0.95),
        ("B/C/D", lim * 0.9, lim * 0.95),
    )
    for text, lx, ly in labels:
        parts.append(
            f'<text x="{_fmt(sx(lx))}" y="{_fmt(sy(ly))}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13" fill="#666666">{text}</text>'
        )
    # axes
    parts.append(
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" '
        f'y2="{top + plot_h}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>'
    )
    for v in range(0, int(lim) + 1):
        parts.append(
            f'<text x="{_fmt(sx(v))}" y="{height - 40}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{v}</text>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{_fmt(sy(v) + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{v}</text>'
        )
    parts.append(
        f'<text x="{left + plot_w / 2:.0f}" y="{height - 14}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">boundary binsize sum</text>'
    )
    parts.append(
        f'<text x="16" y="{top + plot_h / 2:.0f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {top + plot_h / 2:.0f})">centre binsize sum</text>'
    )
    # (2, 2) reference cross
    cx, cy = sx(2.0), sy(2.0)
    parts.append(
        f'<path d="M {_fmt(cx - 6)} {_fmt(cy)} H {_fmt(cx + 6)} '
        f'M {_fmt(cx)} {_fmt(cy - 6)} V {_fmt(cy + 6)}" stroke="black" '
        f'stroke-width="1.5"/>'
    )
    for r in _sorted_reports(reports):
        colour = colour_for("bias_rej", r.bias_rej)
        x = min(r.quad.boundary_sum(), lim)
        y = min(r.quad.centre_sum(), lim)
        parts.append(
            f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="5" fill="{colour}" '
            f'stroke="#333333" stroke-width="0.5">'
            f"<title>{html.escape(f'{r.algorithm} {r.problem} d={r.d}')}</title>"
            f"</circle>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_front_scatter(
    spec: ProblemSpec, objectives: np.ndarray, title: str = "", curve_points: int = 512
) -> str:
    """Sampled objective pairs with the analytical envelope overlaid."""
    objectives = np.asarray(objectives, dtype=float)
    if objectives.ndim != 2 or objectives.shape[1] != 2 or objectives.shape[0] == 0:
        raise ValueError("expected a non-empty (n, 2) objective array")
    width, height = 520, 420
    left, right, top, bottom = 64, 20, 36, 56
    plot_w = width - left - right
    plot_h = height - top - bottom
    front = np.array(reference_front(spec, max(2, curve_points)), dtype=float)
    x_lo, x_hi = 0.0, 1.0
    y_all = np.concatenate([objectives[:, 1], front[:, 1]])
    y_lo, y_hi = float(y_all.min()), float(y_all.max())
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad

    def sx(v: float) -> float:
        return left + plot_w * (v - x_lo) / (x_hi - x_lo)

    def sy(v: float) -> float:
        return top + plot_h * (1.0 - (v - y_lo) / (y_hi - y_lo))

    parts = _svg_open(width, height)
    if title:
        parts.append(
            f'<text x="{width / 2:.0f}" y="22" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{html.escape(title)}</text>'
        )
    for g1, g2 in objectives.tolist():
        parts.append(
            f'<circle cx="{_fmt(sx(g1))}" cy="{_fmt(sy(g2))}" r="1.5" '
            f'fill="#9aa7b5" fill-opacity="0.6"/>'
        )
    if front.shape[0] == 1:
        parts.append(
            f'<circle cx="{_fmt(sx(front[0, 0]))}" cy="{_fmt(sy(front[0, 1]))}" '
            f'r="5" fill="#c23b22"/>'
        )
    else:
        coords = " ".join(
            f"{_fmt(sx(g1))},{_fmt(sy(g2))}" for g1, g2 in front.tolist()
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="#c23b22" '
            f'stroke-width="1.8"/>'
        )
    parts.append(
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" '
        f'y2="{top + plot_h}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>'
    )
    for frac in (0.0, 0.5, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        parts.append(
            f'<text x="{_fmt(sx(xv))}" y="{height - 36}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{xv:.1f}</text>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{_fmt(sy(yv) + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{yv:.2f}</text>'
        )
    parts.append(
        f'<text x="{left + plot_w / 2:.0f}" y="{height - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">g1</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_report_files(
    reports: list[DetectionReport], out_dir: str | os.PathLike, tau: float = 0.5
) -> list[str]:
    """Write report.csv/md/html, per-cell histograms and the region scatter."""
    out = os.fspath(out_dir)
    os.makedirs(out, exist_ok=True)
    written = []
    for fmt, name in (("csv", "report.csv"), ("markdown", "report.md"), ("html", "report.html")):
        path = os.path.join(out, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(render_table(reports, fmt))
        written.append(path)
    for report in _sorted_reports(reports):
        name = f"hist_{report.algorithm}_{report.problem}_d{report.d}.svg"
        title = f"{report.algorithm} {report.problem} d={report.d} ({report.source})"
        path = os.path.join(out, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(render_histogram(report.histogram, report.quad, title))
        written.append(path)
    path = os.path.join(out, "regions.svg")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_region_scatter(reports, tau=tau))
    written.append(path)
    return written
