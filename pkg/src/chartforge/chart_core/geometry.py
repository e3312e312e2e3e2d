"""Chart specs and resolved mark geometry for bar / line / pie / scatter.

All mark coordinates are float pixels in canvas space (row 0 at the top).
Proportionality lives here: bar heights, sector angles, and bubble radii are
computed exactly from the data before any rasterization quantizes them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import ColumnMissing, MalformedInput, NegativePieValue
from .table import DataTable

CHART_TYPES = ("bar", "line", "pie", "scatter")

# Fraction of the aspect-fitted plot rectangle left clear on each side.
PLOT_INSET = 0.04
# Bar width as a fraction of each x slot.
BAR_FILL = 0.8
# Pie radius as a fraction of the smaller plot dimension.
PIE_RADIUS_FRAC = 0.45
# Scatter bubble radius bounds as fractions of the smaller plot dimension.
BUBBLE_MAX_FRAC = 0.10
BUBBLE_MIN_PX = 3.0


@dataclass
class ChartSpec:
    chart_type: str
    x_column: str
    y_column: str
    size_column: str | None = None
    canvas_size: tuple[int, int] = (512, 512)  # (width, height)
    aspect_ratio: tuple[int, int] = (1, 1)  # width : height, realized by padding

    def __post_init__(self):
        if self.chart_type not in CHART_TYPES:
            raise MalformedInput(f"unknown chart type {self.chart_type!r}")
        w, h = self.canvas_size
        if w < 1 or h < 1:
            raise MalformedInput("canvas dimensions must be positive")
        an, ad = self.aspect_ratio
        if an < 1 or ad < 1:
            raise MalformedInput("aspect ratio terms must be positive")

    def validate_against(self, table: DataTable) -> None:
        names = {c.name for c in table.columns}
        for attr in ("x_column", "y_column"):
            name = getattr(self, attr)
            if name not in names:
                raise ColumnMissing(f"{attr} {name!r} not in table")
        if self.size_column is not None and self.size_column not in names:
            raise ColumnMissing(f"size_column {self.size_column!r} not in table")

    def to_dict(self) -> dict:
        return {
            "chart_type": self.chart_type,
            "x_column": self.x_column,
            "y_column": self.y_column,
            "size_column": self.size_column,
            "canvas_size": list(self.canvas_size),
            "aspect_ratio": list(self.aspect_ratio),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChartSpec":
        return cls(
            chart_type=d["chart_type"],
            x_column=d["x_column"],
            y_column=d["y_column"],
            size_column=d.get("size_column"),
            canvas_size=tuple(d.get("canvas_size", (512, 512))),
            aspect_ratio=tuple(d.get("aspect_ratio", (1, 1))),
        )


@dataclass
class BarRect:
    x: float
    y: float  # top edge
    w: float
    h: float

    @property
    def bottom(self) -> float:
        return self.y + self.h


@dataclass
class LinePolyline:
    points: list[tuple[float, float]]  # (x, y) in px


@dataclass
class PieSector:
    center: tuple[float, float]  # (x, y)
    radius: float
    start_angle: float  # radians, measured clockwise from 12 o'clock
    end_angle: float

    @property
    def angle(self) -> float:
        return self.end_angle - self.start_angle


@dataclass
class ScatterBubble:
    center: tuple[float, float]
    radius: float


Mark = BarRect | LinePolyline | PieSector | ScatterBubble


@dataclass
class ChartGeometry:
    """Resolved marks plus the mark-to-row binding.

    ``data_binding`` maps mark index to source row index; for line charts
    (one polyline mark) it maps polyline vertex index to row index instead.
    """

    chart_type: str
    canvas_size: tuple[int, int]  # (width, height)
    marks: list[Mark]
    data_binding: dict[int, int] = field(default_factory=dict)
    plot_area: tuple[float, float, float, float] = (0, 0, 0, 0)  # x0, y0, x1, y1

    @property
    def width(self) -> int:
        return self.canvas_size[0]

    @property
    def height(self) -> int:
        return self.canvas_size[1]


def plot_rect(spec: ChartSpec) -> tuple[float, float, float, float]:
    """Aspect-fitted, inset plot rectangle (x0, y0, x1, y1) inside the canvas."""
    cw, ch = spec.canvas_size
    an, ad = spec.aspect_ratio
    target = an / ad
    if cw / ch > target:
        ph = float(ch)
        pw = ph * target
    else:
        pw = float(cw)
        ph = pw / target
    x0 = (cw - pw) / 2.0
    y0 = (ch - ph) / 2.0
    ix = pw * PLOT_INSET
    iy = ph * PLOT_INSET
    return x0 + ix, y0 + iy, x0 + pw - ix, y0 + ph - iy


def _numeric_values(table: DataTable, name: str) -> list[float]:
    idx = table.column_index(name)
    if table.columns[idx].kind != "numeric":
        raise MalformedInput(f"column {name!r} is not numeric")
    values = []
    for i, row in enumerate(table.rows):
        v = row[idx]
        if v is None:
            raise MalformedInput(f"row {i} has no value for {name!r}")
        values.append(float(v))
    return values


def _row_order(table: DataTable, spec: ChartSpec) -> list[int]:
    """Row indices ordered by x: numeric x sorts, categorical keeps input order."""
    idx = table.column_index(spec.x_column)
    order = list(range(len(table.rows)))
    if table.columns[idx].kind == "numeric":
        order.sort(key=lambda i: (table.rows[i][idx] is None, table.rows[i][idx]))
    return order


def derive_geometry(table: DataTable, spec: ChartSpec) -> ChartGeometry:
    """Resolve the table into visual marks for the requested chart type."""
    spec.validate_against(table)
    px0, py0, px1, py1 = plot_rect(spec)
    plot_w = px1 - px0
    plot_h = py1 - py0
    order = _row_order(table, spec)
    ys = _numeric_values(table, spec.y_column)

    geom = ChartGeometry(
        chart_type=spec.chart_type,
        canvas_size=spec.canvas_size,
        marks=[],
        plot_area=(px0, py0, px1, py1),
    )

    if spec.chart_type == "bar":
        y_max = max(ys)
        if y_max <= 0:
            raise MalformedInput("bar chart needs a positive maximum y value")
        n = len(order)
        slot = plot_w / n
        bar_w = slot * BAR_FILL
        for mark_i, row_i in enumerate(order):
            h = max(0.0, ys[row_i]) / y_max * plot_h
            x = px0 + slot * mark_i + (slot - bar_w) / 2.0
            geom.marks.append(BarRect(x=x, y=py1 - h, w=bar_w, h=h))
            geom.data_binding[mark_i] = row_i

    elif spec.chart_type == "line":
        y_min = min(ys)
        y_max = max(ys)
        span = y_max - y_min
        points = []
        n = len(order)
        for mark_i, row_i in enumerate(order):
            fx = 0.5 if n == 1 else mark_i / (n - 1)
            fy = 0.5 if span == 0 else (ys[row_i] - y_min) / span
            points.append((px0 + fx * plot_w, py1 - fy * plot_h))
            geom.data_binding[mark_i] = row_i
        geom.marks.append(LinePolyline(points=points))

    elif spec.chart_type == "pie":
        if any(v < 0 for v in ys):
            raise NegativePieValue("pie values must be non-negative")
        total = sum(ys)
        n = len(order)
        # Zero totals are split evenly so sector angles still close the circle.
        fracs = [1.0 / n] * n if total == 0 else [ys[i] / total for i in order]
        cx = (px0 + px1) / 2.0
        cy = (py0 + py1) / 2.0
        radius = PIE_RADIUS_FRAC * min(plot_w, plot_h)
        cumulative = 0.0
        for mark_i, row_i in enumerate(order):
            start = 2.0 * math.pi * cumulative
            cumulative += fracs[mark_i]
            end = 2.0 * math.pi * cumulative
            geom.marks.append(
                PieSector(center=(cx, cy), radius=radius, start_angle=start, end_angle=end)
            )
            geom.data_binding[mark_i] = row_i

    elif spec.chart_type == "scatter":
        xs = _numeric_values(table, spec.x_column)
        x_min, x_max = min(xs), max(xs)
        y_min, y_max = min(ys), max(ys)
        x_span = x_max - x_min
        y_span = y_max - y_min
        r_max = BUBBLE_MAX_FRAC * min(plot_w, plot_h)
        sizes = None
        if spec.size_column is not None:
            sizes = _numeric_values(table, spec.size_column)
            if any(s < 0 for s in sizes):
                raise MalformedInput("size values must be non-negative")
            s_max = max(sizes)
            sizes = None if s_max == 0 else sizes
        # Inset so the largest bubble stays inside the plot rectangle.
        bx0, bx1 = px0 + r_max, px1 - r_max
        by0, by1 = py0 + r_max, py1 - r_max
        for mark_i, row_i in enumerate(order):
            fx = 0.5 if x_span == 0 else (xs[row_i] - x_min) / x_span
            fy = 0.5 if y_span == 0 else (ys[row_i] - y_min) / y_span
            if sizes is None:
                radius = r_max * 0.5
            else:
                # Area-proportional encoding: radius scales with sqrt(size).
                radius = max(BUBBLE_MIN_PX, r_max * math.sqrt(sizes[row_i] / max(sizes)))
            geom.marks.append(
                ScatterBubble(
                    center=(bx0 + fx * (bx1 - bx0), by1 - fy * (by1 - by0)),
                    radius=radius,
                )
            )
            geom.data_binding[mark_i] = row_i

    return geom
