"""Axis, tick-label, and title annotations as an editable vector document.

The SVG keeps every element separately addressable (``id``/``class``
attributes) so the UI can restyle or move them: ``#title``, ``#x-axis``,
``#y-axis``, ``.x-tick-label``, ``.y-tick-label``.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET

import numpy as np
from PIL import Image, ImageDraw

from ..raster import RasterImage
from .geometry import BarRect, ChartGeometry, ChartSpec, LinePolyline, PieSector, ScatterBubble
from .table import DataTable

FONT_PX = 12
AXIS_COLOR = "#444444"
TEXT_COLOR = "#222222"


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


def _default_spec_columns(table: DataTable) -> tuple[str, str]:
    """Fallback (x, y) columns: first non-numeric (else first) as x, last other numeric as y."""
    non_numeric = [c.name for c in table.columns if c.kind != "numeric"]
    x_col = non_numeric[0] if non_numeric else table.columns[0].name
    numeric = [n for n in table.numeric_columns() if n != x_col] or table.numeric_columns()
    return x_col, numeric[-1]


def _tick_anchors(geometry: ChartGeometry) -> list[tuple[float, float]]:
    """One (x, y) anchor per datum, in mark order."""
    anchors = []
    x0, y0, x1, y1 = geometry.plot_area
    for mark in geometry.marks:
        if isinstance(mark, BarRect):
            anchors.append((mark.x + mark.w / 2.0, y1))
        elif isinstance(mark, ScatterBubble):
            anchors.append((mark.center[0], y1))
        elif isinstance(mark, PieSector):
            mid = (mark.start_angle + mark.end_angle) / 2.0
            r = mark.radius * 1.12
            anchors.append(
                (mark.center[0] + r * math.sin(mid), mark.center[1] - r * math.cos(mid))
            )
        elif isinstance(mark, LinePolyline):
            anchors.extend((px, y1) for px, _ in mark.points)
    return anchors


def _y_tick_values(table: DataTable, y_column: str, chart_type: str) -> list[float]:
    values = [v for v in table.column_values(y_column) if v is not None]
    if not values:
        return []
    lo = 0.0 if chart_type == "bar" else float(min(values))
    hi = float(max(values))
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / 4.0 for i in range(5)]


def _layout(geometry: ChartGeometry, table: DataTable, spec: ChartSpec | None) -> dict:
    if spec is not None:
        x_col, y_col = spec.x_column, spec.y_column
    else:
        x_col, y_col = _default_spec_columns(table)
    x_idx = table.column_index(x_col)
    anchors = _tick_anchors(geometry)
    labels = []
    binding = geometry.data_binding
    for mark_i, anchor in enumerate(anchors):
        row_i = binding.get(mark_i, mark_i if mark_i < len(table.rows) else None)
        text = _format_value(table.rows[row_i][x_idx]) if row_i is not None else ""
        labels.append((anchor, text))

    x0, y0, x1, y1 = geometry.plot_area
    y_ticks = []
    for v in _y_tick_values(table, y_col, geometry.chart_type):
        if geometry.chart_type == "bar":
            values = [t for t in table.column_values(y_col) if t is not None]
            top = max(values)
            frac = 0.0 if top == 0 else v / top
        else:
            values = [t for t in table.column_values(y_col) if t is not None]
            lo, hi = min(values), max(values)
            frac = 0.5 if hi == lo else (v - lo) / (hi - lo)
        y_ticks.append((y1 - frac * (y1 - y0), _format_value(v)))

    return {
        "title": table.title,
        "x_labels": labels,
        "y_ticks": y_ticks,
        "plot": (x0, y0, x1, y1),
        "canvas": geometry.canvas_size,
    }


def export_annotations(
    geometry: ChartGeometry, table: DataTable, spec: ChartSpec | None = None
) -> str:
    """Build the SVG annotation document (axes, per-datum tick labels, title)."""
    layout = _layout(geometry, table, spec)
    w, h = layout["canvas"]
    x0, y0, x1, y1 = layout["plot"]

    svg = ET.Element(
        "svg",
        {
            "xmlns": "http://www.w3.org/2000/svg",
            "width": str(w),
            "height": str(h),
            "viewBox": f"0 0 {w} {h}",
        },
    )
    axes = ET.SubElement(svg, "g", {"id": "axes", "stroke": AXIS_COLOR, "stroke-width": "1"})
    ET.SubElement(
        axes,
        "line",
        {"id": "x-axis", "x1": f"{x0:.2f}", "y1": f"{y1:.2f}", "x2": f"{x1:.2f}", "y2": f"{y1:.2f}"},
    )
    ET.SubElement(
        axes,
        "line",
        {"id": "y-axis", "x1": f"{x0:.2f}", "y1": f"{y0:.2f}", "x2": f"{x0:.2f}", "y2": f"{y1:.2f}"},
    )

    text_attrs = {"font-family": "sans-serif", "font-size": str(FONT_PX), "fill": TEXT_COLOR}
    xg = ET.SubElement(svg, "g", {"id": "x-tick-labels"})
    for (ax, ay), text in layout["x_labels"]:
        el = ET.SubElement(
            xg,
            "text",
            {
                "class": "x-tick-label",
                "x": f"{ax:.2f}",
                "y": f"{min(ay + FONT_PX + 4, h - 2):.2f}",
                "text-anchor": "middle",
                **text_attrs,
            },
        )
        el.text = text

    yg = ET.SubElement(svg, "g", {"id": "y-tick-labels"})
    for (ty, text) in layout["y_ticks"]:
        el = ET.SubElement(
            yg,
            "text",
            {
                "class": "y-tick-label",
                "x": f"{max(x0 - 6, 2):.2f}",
                "y": f"{ty + FONT_PX / 3:.2f}",
                "text-anchor": "end",
                **text_attrs,
            },
        )
        el.text = text

    if layout["title"]:
        title = ET.SubElement(
            svg,
            "text",
            {
                "id": "title",
                "x": f"{w / 2:.2f}",
                "y": f"{max(y0 - 10, FONT_PX + 4):.2f}",
                "text-anchor": "middle",
                "font-family": "sans-serif",
                "font-size": str(FONT_PX + 4),
                "fill": TEXT_COLOR,
            },
        )
        title.text = layout["title"]

    return ET.tostring(svg, encoding="unicode")


def rasterize_annotations(
    geometry: ChartGeometry, table: DataTable, spec: ChartSpec | None = None
) -> RasterImage:
    """Raster twin of the SVG annotations for PNG compositing (transparent bg)."""
    layout = _layout(geometry, table, spec)
    w, h = layout["canvas"]
    x0, y0, x1, y1 = layout["plot"]
    im = Image.new("RGBA", (w, h), (0, 0, 0, 0))
    draw = ImageDraw.Draw(im)
    draw.line([(x0, y1), (x1, y1)], fill=(68, 68, 68, 255), width=1)
    draw.line([(x0, y0), (x0, y1)], fill=(68, 68, 68, 255), width=1)
    for (ax, ay), text in layout["x_labels"]:
        if text:
            draw.text((ax, min(ay + 4, h - 12)), text, fill=(34, 34, 34, 255), anchor="ma")
    for (ty, text) in layout["y_ticks"]:
        draw.text((max(x0 - 6, 2), ty), text, fill=(34, 34, 34, 255), anchor="rm")
    if layout["title"]:
        draw.text((w / 2, max(y0 - 18, 4)), layout["title"], fill=(34, 34, 34, 255), anchor="ma")
    return RasterImage(np.asarray(im))
