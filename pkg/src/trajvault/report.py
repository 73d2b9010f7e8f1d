"""Report emission: aligned text tables, CSV files, plot-spec JSON, SVG, PNG.

Delimited outputs and the plot-spec JSON are the machine contract; alongside
them the render_* helpers draw conventional PNG figures. matplotlib is
imported lazily so report data can be produced without a plotting stack.
"""

from __future__ import annotations

import json
from typing import Optional

import numpy as np

from .coverage import CoverageReport, coverage_spectrum_points
from .stats import DensityCurve, EpisodeReturnSummary, Histogram


def format_table(headers: list, rows: list) -> str:
    """Aligned columns: headers, dashed rule, one line per row."""
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = []
    for j, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def fmt_float(x: Optional[float], places: int = 2) -> str:
    return "n/a" if x is None else f"{x:.{places}f}"


SUMMARY_HEADERS = ("Dataset", "Mean", "Stddev", "Min", "Max",
                   "#Transitions", "#Trajectories", "Joint-SACo")


def summary_row(name: str, summary: EpisodeReturnSummary,
                joint_saco: Optional[float]) -> list:
    return [name, fmt_float(summary.mean), fmt_float(summary.std),
            fmt_float(summary.min), fmt_float(summary.max),
            str(summary.n_transitions), str(summary.n_trajectories),
            fmt_float(joint_saco)]


def histogram_csv(hist: Histogram) -> str:
    lines = ["edge_left,edge_right,count"]
    for i in range(hist.counts.size):
        lines.append(f"{float(hist.bin_edges[i])!r},{float(hist.bin_edges[i + 1])!r},"
                     f"{int(hist.counts[i])}")
    return "\n".join(lines) + "\n"


def density_csv(curve: DensityCurve) -> str:
    lines = ["x,y"]
    for x, y in zip(curve.xs, curve.ys):
        lines.append(f"{float(x)!r},{float(y)!r}")
    return "\n".join(lines) + "\n"


def spectrum_csv(report: CoverageReport) -> str:
    lines = ["multiplicity,frequency"]
    for c, f in sorted(report.count_frequency.items()):
        lines.append(f"{int(c)},{int(f)}")
    return "\n".join(lines) + "\n"


def plot_spec(kind: str, title: str, series: list) -> dict:
    """{kind, title, series: [{x, y, label?}]} for downstream plotting."""
    out_series = []
    for s in series:
        entry = {"x": [float(v) for v in s["x"]], "y": [float(v) for v in s["y"]]}
        if "label" in s:
            entry["label"] = s["label"]
        out_series.append(entry)
    return {"kind": kind, "title": title, "series": out_series}


def histogram_plot_spec(hist: Histogram, title: str) -> dict:
    centers = 0.5 * (hist.bin_edges[:-1] + hist.bin_edges[1:])
    return plot_spec("histogram", title, [{"x": centers, "y": hist.counts}])


def density_plot_spec(curve: DensityCurve, title: str) -> dict:
    return plot_spec("density", title, [{"x": curve.xs, "y": curve.ys}])


def spectrum_plot_spec(report: CoverageReport, title: str) -> dict:
    pts = coverage_spectrum_points(report)
    return plot_spec("loglog-spectrum", title,
                     [{"x": [p[0] for p in pts], "y": [p[1] for p in pts]}])


def svg_histogram(hist: Histogram, title: str, width: int = 640,
                  height: int = 400) -> str:
    """Self-contained bar chart, no external assets."""
    margin = 48
    plot_w = width - 2 * margin
    plot_h = height - 2 * margin
    counts = hist.counts
    peak = max(int(counts.max()), 1)
    lo, hi = float(hist.bin_edges[0]), float(hist.bin_edges[-1])
    span = hi - lo or 1.0

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]
    for i in range(counts.size):
        x0 = margin + plot_w * (float(hist.bin_edges[i]) - lo) / span
        x1 = margin + plot_w * (float(hist.bin_edges[i + 1]) - lo) / span
        h = plot_h * int(counts[i]) / peak
        parts.append(
            f'<rect x="{x0:.2f}" y="{margin + plot_h - h:.2f}" '
            f'width="{max(x1 - x0 - 1, 1):.2f}" height="{h:.2f}" fill="#4878a8"/>')
    parts.append(
        f'<line x1="{margin}" y1="{margin + plot_h}" x2="{margin + plot_w}" '
        f'y2="{margin + plot_h}" stroke="black"/>')
    parts.append(
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{margin + plot_h}" stroke="black"/>')
    parts.append(
        f'<text x="{margin}" y="{height - 12}" font-family="sans-serif" '
        f'font-size="11">{lo:.4g}</text>')
    parts.append(
        f'<text x="{margin + plot_w}" y="{height - 12}" text-anchor="end" '
        f'font-family="sans-serif" font-size="11">{hi:.4g}</text>')
    parts.append(
        f'<text x="{margin - 6}" y="{margin + 4}" text-anchor="end" '
        f'font-family="sans-serif" font-size="11">{peak}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_histogram_png(hist: Histogram, path: str, title: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    widths = np.diff(hist.bin_edges)
    ax.bar(hist.bin_edges[:-1], hist.counts, width=widths, align="edge",
           color="#4878a8", edgecolor="white")
    ax.set_title(title)
    ax.set_xlabel("episode return")
    ax.set_ylabel("episodes")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_density_png(curve: DensityCurve, path: str, title: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.fill_between(curve.xs, curve.ys, color="#4878a8", alpha=0.4)
    ax.plot(curve.xs, curve.ys, color="#4878a8")
    ax.set_title(title)
    ax.set_xlabel("episode return")
    ax.set_ylabel("density")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_spectrum_png(report: CoverageReport, path: str, title: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    cs = sorted(report.count_frequency)
    fs = [report.count_frequency[c] for c in cs]
    ax.loglog(cs, fs, "o", color="#4878a8")
    ax.set_title(title)
    ax.set_xlabel("multiplicity")
    ax.set_ylabel("distinct keys")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
