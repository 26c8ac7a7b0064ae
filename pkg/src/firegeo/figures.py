"""Figure output: deterministic Poincare-disc SVG and matplotlib report charts.

The disc figure is written directly as SVG so that its bytes are a pure
function of the inputs; backbone edges are drawn as hyperbolic geodesics
(circular arcs orthogonal to the boundary circle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .geometry import PoincarePolar

#: Two points are drawn as a straight chord when |p x q| falls below this.
COLLINEAR_TOL = 1e-9

DISC_CX = 340.0
DISC_CY = 340.0
DISC_RADIUS = 320.0
CANVAS_W = 880
CANVAS_H = 680

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#bcbd22", "#17becf", "#aec7e8",
    "#ffbb78", "#98df8a",
)
UNASSIGNED_COLOR = "#999999"


@dataclass(frozen=True)
class FigureSpec:
    """Everything the disc renderer needs, in centered polar coordinates."""

    labels: list[str]
    polar: list[PoincarePolar]
    regions: list[str]
    gsib: list[bool]
    edges: list[tuple[int, int]]
    center: PoincarePolar = PoincarePolar(0.0, 0.0)
    chords: bool = False
    title: str = ""

    def __post_init__(self):
        n = len(self.labels)
        if not (len(self.polar) == len(self.regions) == len(self.gsib) == n):
            raise ValueError("labels, polar, regions and gsib must have equal length")
        if any(p.r >= 1.0 for p in self.polar) or self.center.r >= 1.0:
            raise ValueError("all radial coordinates must be < 1")
        if any(not 0 <= i < n or not 0 <= j < n for i, j in self.edges):
            raise ValueError("edge index out of range")


def region_colors(regions: list[str]) -> dict[str, str]:
    """Deterministic region -> color assignment (sorted names over a fixed palette)."""
    names = sorted(set(regions) - {"unassigned"})
    colors = {name: PALETTE[i % len(PALETTE)] for i, name in enumerate(names)}
    colors["unassigned"] = UNASSIGNED_COLOR
    return colors


def geodesic_arc(p: tuple[float, float], q: tuple[float, float]):
    """Center and radius of the circle through two disc points orthogonal to the
    unit circle, or None when the geodesic is a diameter (points collinear with
    the origin within tolerance)."""
    px, py = p
    qx, qy = q
    cross = px * qy - py * qx
    if abs(cross) < COLLINEAR_TOL:
        return None
    bp = px * px + py * py + 1.0
    bq = qx * qx + qy * qy + 1.0
    det = 4.0 * cross
    cx = (bp * 2.0 * qy - bq * 2.0 * py) / det
    cy = (bq * 2.0 * px - bp * 2.0 * qx) / det
    radius = math.sqrt(max(cx * cx + cy * cy - 1.0, 0.0))
    return cx, cy, radius


def _to_canvas(p: PoincarePolar) -> tuple[float, float]:
    return (DISC_CX + DISC_RADIUS * p.r * math.cos(p.theta),
            DISC_CY - DISC_RADIUS * p.r * math.sin(p.theta))


def _edge_path(spec: FigureSpec, i: int, j: int) -> str:
    x1, y1 = _to_canvas(spec.polar[i])
    x2, y2 = _to_canvas(spec.polar[j])
    arc = None if spec.chords else geodesic_arc(
        (spec.polar[i].r * math.cos(spec.polar[i].theta),
         spec.polar[i].r * math.sin(spec.polar[i].theta)),
        (spec.polar[j].r * math.cos(spec.polar[j].theta),
         spec.polar[j].r * math.sin(spec.polar[j].theta)),
    )
    if arc is None:
        return f'M {x1:.4f} {y1:.4f} L {x2:.4f} {y2:.4f}'
    cx, cy, radius = arc
    ccx = DISC_CX + DISC_RADIUS * cx
    ccy = DISC_CY - DISC_RADIUS * cy
    r_svg = DISC_RADIUS * radius
    # Minor arc; sweep follows the orientation of (P - C) x (Q - C) in canvas coords.
    cross = (x1 - ccx) * (y2 - ccy) - (y1 - ccy) * (x2 - ccx)
    sweep = 1 if cross > 0.0 else 0
    return f'M {x1:.4f} {y1:.4f} A {r_svg:.4f} {r_svg:.4f} 0 0 {sweep} {x2:.4f} {y2:.4f}'


def render_svg(spec: FigureSpec, path) -> None:
    """Write the Poincare-disc figure: boundary circle, geodesic backbone edges,
    region-coloured nodes with identifiers, systemic-importance asterisks, a
    cross at the network center, and a region legend."""
    colors = region_colors(spec.regions)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS_W}" height="{CANVAS_H}" '
        f'viewBox="0 0 {CANVAS_W} {CANVAS_H}">',
        f'<rect width="{CANVAS_W}" height="{CANVAS_H}" fill="#ffffff"/>',
        f'<circle class="boundary" cx="{DISC_CX:.1f}" cy="{DISC_CY:.1f}" '
        f'r="{DISC_RADIUS:.1f}" fill="none" stroke="#000000" stroke-width="1"/>',
    ]
    if spec.title:
        lines.append(f'<text x="{DISC_CX:.1f}" y="24" font-size="16" '
                     f'text-anchor="middle" font-family="sans-serif">{spec.title}</text>')
    for i, j in spec.edges:
        lines.append(f'<path class="edge" d="{_edge_path(spec, i, j)}" '
                     'fill="none" stroke="#777777" stroke-width="0.8"/>')
    for label, p, region, is_gsib in zip(spec.labels, spec.polar, spec.regions, spec.gsib):
        x, y = _to_canvas(p)
        lines.append(f'<circle class="node" cx="{x:.4f}" cy="{y:.4f}" r="4" '
                     f'fill="{colors[region]}" stroke="#222222" stroke-width="0.5"/>')
        lines.append(f'<text class="label" x="{x:.4f}" y="{y - 6.0:.4f}" font-size="7" '
                     f'text-anchor="middle" font-family="sans-serif">{label}</text>')
        if is_gsib:
            lines.append(f'<text class="gsib" x="{x + 5.0:.4f}" y="{y + 3.0:.4f}" '
                         'font-size="11" font-family="sans-serif">*</text>')
    ccx, ccy = _to_canvas(spec.center)
    lines.append(f'<path class="center" d="M {ccx - 7.0:.4f} {ccy:.4f} H {ccx + 7.0:.4f} '
                 f'M {ccx:.4f} {ccy - 7.0:.4f} V {ccy + 7.0:.4f}" '
                 'stroke="#000000" stroke-width="1.6" fill="none"/>')
    lx, ly = DISC_CX + DISC_RADIUS + 40.0, 60.0
    lines.append(f'<text x="{lx:.1f}" y="{ly - 18.0:.1f}" font-size="12" '
                 'font-family="sans-serif" font-weight="bold">Regions</text>')
    for k, (region, color) in enumerate(sorted(colors.items())):
        y = ly + 18.0 * k
        lines.append(f'<rect x="{lx:.1f}" y="{y - 9.0:.1f}" width="11" height="11" '
                     f'fill="{color}" stroke="#222222" stroke-width="0.5"/>')
        lines.append(f'<text x="{lx + 16.0:.1f}" y="{y:.1f}" font-size="11" '
                     f'font-family="sans-serif">{region}</text>')
    lines.append(f'<text x="{lx:.1f}" y="{ly + 18.0 * len(colors) + 10.0:.1f}" '
                 'font-size="11" font-family="sans-serif">* systemically important</text>')
    lines.append(f'<text x="{lx:.1f}" y="{ly + 18.0 * len(colors) + 28.0:.1f}" '
                 'font-size="11" font-family="sans-serif">+ capital-weighted center</text>')
    lines.append('</svg>')
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def plot_weight_distribution(weights: np.ndarray, path, title: str = "") -> None:
    """Histogram of the off-diagonal link weights with the inter-decile range in red."""
    w = np.asarray(weights, dtype=float)
    vals = w[np.triu_indices(w.shape[0], k=1)]
    q10, q90 = np.quantile(vals, [0.1, 0.9])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(vals, bins=50, color="#4878a8", edgecolor="none")
    ax.axvspan(q10, q90, color="red", alpha=0.15)
    ax.axvline(q10, color="red", lw=1)
    ax.axvline(q90, color="red", lw=1)
    ax.set_yscale("log")
    ax.set_xlabel("link weight")
    ax.set_ylabel("count")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_stress_comparison(stresses: dict[str, tuple[float, float]], path) -> None:
    """Grouped bars of hyperbolic vs Euclidean embedding stress per label."""
    labels = list(stresses)
    hyp = [stresses[k][0] for k in labels]
    euc = [stresses[k][1] for k in labels]
    x = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(x - 0.18, hyp, width=0.36, label="hyperbolic", color="#c44e52")
    ax.bar(x + 0.18, euc, width=0.36, label="Euclidean", color="#4c72b0")
    ax.set_xticks(x)
    ax.set_xticklabels(labels)
    ax.set_ylabel("embedding stress")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_radial_change(r_a: np.ndarray, r_b: np.ndarray, highlight: np.ndarray,
                       path, label_a: str = "year A", label_b: str = "year B") -> None:
    """Scatter of radial coordinates across two matched years; highlighted banks in red."""
    r_a = np.asarray(r_a, dtype=float)
    r_b = np.asarray(r_b, dtype=float)
    highlight = np.asarray(highlight, dtype=bool)
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(r_a[~highlight], r_b[~highlight], s=18, color="#4c72b0", label="other")
    if highlight.any():
        ax.scatter(r_a[highlight], r_b[highlight], s=26, color="#c44e52",
                   label="systemically important")
    lim = max(1.0, r_a.max(), r_b.max()) * 1.05
    ax.plot([0, lim], [0, lim], color="#888888", lw=0.8, ls="--")
    ax.set_xlabel(f"radial coordinate, {label_a}")
    ax.set_ylabel(f"radial coordinate, {label_b}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
