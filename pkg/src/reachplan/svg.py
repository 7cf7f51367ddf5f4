"""Deterministic SVG rendering of regions, intersections, plans, databases.

Output strings depend only on the rendered data (fixed element order, fixed
float formatting), so identical inputs give byte-identical files.
"""

from __future__ import annotations

import numpy as np

from .baseregion import BaseGridSpec, BaseRegion
from .regiongeo import IntersectionRecord
from .sequencer import PlanResult

_PALETTE = ("#4878cf", "#ee854a", "#6acc64", "#d65f5f",
            "#956cb4", "#8c613c", "#dc7ec0", "#797979")


def _f(value: float) -> str:
    return format(float(value), ".9g")


class SvgCanvas:
    """Maps world (x, y) meters to SVG pixels with y up."""

    def __init__(self, xmin, ymin, xmax, ymax, scale=200.0, pad=10.0):
        self.xmin, self.ymin = xmin, ymin
        self.scale = scale
        self.pad = pad
        self.width = (xmax - xmin) * scale + 2 * pad
        self.height = (ymax - ymin) * scale + 2 * pad
        self.ymax = ymax
        self.parts: list[str] = []

    def px(self, x: float) -> float:
        return (x - self.xmin) * self.scale + self.pad

    def py(self, y: float) -> float:
        return (self.ymax - y) * self.scale + self.pad

    def rect(self, x, y, w, h, fill, opacity=None, stroke=None):
        attrs = [f'x="{_f(self.px(x))}"', f'y="{_f(self.py(y + h))}"',
                 f'width="{_f(w * self.scale)}"', f'height="{_f(h * self.scale)}"',
                 f'fill="{fill}"']
        if opacity is not None:
            attrs.append(f'fill-opacity="{_f(opacity)}"')
        if stroke is not None:
            attrs.append(f'stroke="{stroke}" stroke-width="1"')
        self.parts.append(f"<rect {' '.join(attrs)}/>")

    def circle(self, x, y, r_world, stroke, fill="none", width=2.0):
        self.parts.append(
            f'<circle cx="{_f(self.px(x))}" cy="{_f(self.py(y))}" '
            f'r="{_f(r_world * self.scale)}" fill="{fill}" stroke="{stroke}" '
            f'stroke-width="{_f(width)}"/>')

    def dot(self, x, y, radius_px, fill):
        self.parts.append(
            f'<circle cx="{_f(self.px(x))}" cy="{_f(self.py(y))}" '
            f'r="{_f(radius_px)}" fill="{fill}"/>')

    def polyline(self, points, stroke, width=2.0, dash=None):
        pts = " ".join(f"{_f(self.px(x))},{_f(self.py(y))}" for x, y in points)
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{stroke}" '
            f'stroke-width="{_f(width)}"{dash_attr}/>')

    def text(self, x, y, label, size=12, fill="#000000"):
        self.parts.append(
            f'<text x="{_f(self.px(x))}" y="{_f(self.py(y))}" '
            f'font-size="{size}" font-family="monospace" fill="{fill}">'
            f'{label}</text>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" '
                f'width="{_f(self.width)}" height="{_f(self.height)}" '
                f'viewBox="0 0 {_f(self.width)} {_f(self.height)}">')
        return "\n".join([head, *self.parts, "</svg>"]) + "\n"


def _grid_canvas(grid: BaseGridSpec, scale=160.0) -> SvgCanvas:
    return SvgCanvas(grid.x0, grid.y0,
                     grid.x0 + grid.width * grid.cell,
                     grid.y0 + grid.height * grid.cell, scale=scale)


def _draw_mask(canvas: SvgCanvas, grid: BaseGridSpec, mask: np.ndarray,
               color: str, opacity=1.0):
    for row in range(grid.height):
        for col in range(grid.width):
            if mask[row, col]:
                canvas.rect(grid.x0 + col * grid.cell,
                            grid.y0 + row * grid.cell,
                            grid.cell, grid.cell, color, opacity=opacity)


def render_region(region: BaseRegion, color: str = _PALETTE[0]) -> str:
    """One region mask over its grid."""
    canvas = _grid_canvas(region.grid)
    canvas.rect(region.grid.x0, region.grid.y0,
                region.grid.width * region.grid.cell,
                region.grid.height * region.grid.cell,
                "#f4f4f4", stroke="#999999")
    _draw_mask(canvas, region.grid, region.mask, color, opacity=0.85)
    canvas.text(region.grid.x0 + 0.02, region.grid.y0 + 0.02, region.tray_id)
    return canvas.render()


def render_regions_overlay(regions: list[BaseRegion]) -> str:
    """All regions blended on one grid, one color per tray."""
    grid = regions[0].grid
    canvas = _grid_canvas(grid)
    canvas.rect(grid.x0, grid.y0, grid.width * grid.cell,
                grid.height * grid.cell, "#f4f4f4", stroke="#999999")
    for i, region in enumerate(regions):
        _draw_mask(canvas, grid, region.mask,
                   _PALETTE[i % len(_PALETTE)], opacity=0.45)
    for i, region in enumerate(regions):
        canvas.text(grid.x0 + 0.02, grid.y0 + 0.02 + 0.06 * i, region.tray_id,
                    fill=_PALETTE[i % len(_PALETTE)])
    return canvas.render()


def render_intersections(records: list[IntersectionRecord],
                         sigma: float | None = None) -> str:
    """Intersection masks with inscribed circles and robust centers."""
    grid = records[0].grid
    canvas = _grid_canvas(grid)
    canvas.rect(grid.x0, grid.y0, grid.width * grid.cell,
                grid.height * grid.cell, "#f4f4f4", stroke="#999999")
    for i, record in enumerate(records):
        color = _PALETTE[i % len(_PALETTE)]
        _draw_mask(canvas, grid, record.mask, color, opacity=0.40)
    for i, record in enumerate(records):
        color = _PALETTE[i % len(_PALETTE)]
        cx, cy = record.robust_center
        kept = sigma is None or record.robust_radius >= sigma
        canvas.circle(cx, cy, record.robust_radius, color,
                      width=2.0 if kept else 1.0)
        canvas.dot(cx, cy, 3.0, color if kept else "#bbbbbb")
        canvas.text(cx + 0.01, cy + 0.01, "+".join(record.trays), size=10,
                    fill=color)
    return canvas.render()


def render_plan(regions: list[BaseRegion], plan: PlanResult) -> str:
    """Regions, the chosen robust circles, and the stop path."""
    grid = regions[0].grid
    xs = [plan.start[0], plan.goal[0], grid.x0, grid.x0 + grid.width * grid.cell]
    ys = [plan.start[1], plan.goal[1], grid.y0, grid.y0 + grid.height * grid.cell]
    canvas = SvgCanvas(min(xs) - 0.05, min(ys) - 0.05,
                       max(xs) + 0.05, max(ys) + 0.05, scale=160.0)
    canvas.rect(grid.x0, grid.y0, grid.width * grid.cell,
                grid.height * grid.cell, "#f4f4f4", stroke="#999999")
    for i, region in enumerate(regions):
        _draw_mask(canvas, grid, region.mask,
                   _PALETTE[i % len(_PALETTE)], opacity=0.35)
    points = [plan.start, *[s.center for s in plan.stops], plan.goal]
    canvas.polyline(points, "#222222", width=2.5)
    canvas.dot(plan.start[0], plan.start[1], 5.0, "#2ca02c")
    canvas.dot(plan.goal[0], plan.goal[1], 5.0, "#d62728")
    for i, stop in enumerate(plan.stops):
        canvas.circle(stop.center[0], stop.center[1], stop.radius, "#222222")
        canvas.dot(stop.center[0], stop.center[1], 4.0, "#222222")
        canvas.text(stop.center[0] + 0.02, stop.center[1] + 0.02,
                    f"{i + 1}:{'+'.join(stop.trays)}", size=11)
    return canvas.render()


def render_projection(projection: dict[tuple[int, int, int], int],
                      cell_x: float, cell_y: float) -> str:
    """Top view (x, y) of the 3D reachability projection; counts as shading."""
    if not projection:
        raise ValueError("empty projection")
    flat: dict[tuple[int, int], int] = {}
    for (ix, iy, _iz), count in sorted(projection.items()):
        flat[(ix, iy)] = flat.get((ix, iy), 0) + count
    peak = max(flat.values())
    xs = [k[0] for k in flat]
    ys = [k[1] for k in flat]
    canvas = SvgCanvas(min(xs) * cell_x, min(ys) * cell_y,
                       (max(xs) + 1) * cell_x, (max(ys) + 1) * cell_y,
                       scale=200.0)
    for (ix, iy), count in sorted(flat.items()):
        shade = int(235 - 215 * (count / peak))
        color = f"#{shade:02x}{shade:02x}ff"
        canvas.rect(ix * cell_x, iy * cell_y, cell_x, cell_y, color)
    return canvas.render()


def render_histogram(values, bins: int = 30, color: str = _PALETTE[0]) -> str:
    """Simple bar histogram (used for simulated error radii)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("nothing to histogram")
    if float(values.max() - values.min()) < 1e-12:
        bins = 1  # constant data (e.g. worst-case-boundary radii)
    counts, edges = np.histogram(values, bins=bins)
    peak = max(int(counts.max()), 1)
    canvas = SvgCanvas(0.0, 0.0, 1.0, 0.6, scale=400.0)
    span = edges[-1] - edges[0] or 1.0
    for i, count in enumerate(counts):
        x0 = (edges[i] - edges[0]) / span
        x1 = (edges[i + 1] - edges[0]) / span
        canvas.rect(x0, 0.0, x1 - x0, 0.55 * count / peak, color)
    canvas.text(0.0, 0.57, f"min={_f(values.min())} max={_f(values.max())}",
                size=11)
    return canvas.render()
