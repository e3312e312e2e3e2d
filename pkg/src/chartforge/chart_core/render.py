"""Mark rasterization and plain chart previews.

A pixel belongs to a mark when its center (col + 0.5, row + 0.5) lies inside
the mark region, so pixel counts track mark areas to within one row/column of
quantization. The same rasterizer backs previews and condition masks, which
keeps the two pixel-identical for the solid variant.
"""

from __future__ import annotations

import math

import numpy as np

from ..raster import RasterImage
from .geometry import BarRect, ChartGeometry, LinePolyline, Mark, PieSector, ScatterBubble

BACKGROUND_RGBA = (255, 255, 255, 255)
MARK_RGBA = (31, 119, 180, 255)
# Default polyline stroke width in px; wide enough to survive the documented
# augmentation ranges (a 3 px hairline vanishes under a sigma=3 blur).
LINE_STROKE_PX = 9.0


def _pixel_centers(shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    h, w = shape
    ys = np.arange(h, dtype=np.float64)[:, None] + 0.5
    xs = np.arange(w, dtype=np.float64)[None, :] + 0.5
    return ys, xs


def _polyline_distance(points: list[tuple[float, float]], shape: tuple[int, int]) -> np.ndarray:
    """Per-pixel Euclidean distance from pixel centers to the polyline."""
    ys, xs = _pixel_centers(shape)
    dist = np.full(shape, np.inf, dtype=np.float64)
    if len(points) == 1:
        px, py = points[0]
        return np.hypot(xs - px, ys - py)
    for (x0, y0), (x1, y1) in zip(points[:-1], points[1:]):
        dx = x1 - x0
        dy = y1 - y0
        seg_sq = dx * dx + dy * dy
        if seg_sq == 0:
            d = np.hypot(xs - x0, ys - y0)
        else:
            t = np.clip(((xs - x0) * dx + (ys - y0) * dy) / seg_sq, 0.0, 1.0)
            d = np.hypot(xs - (x0 + t * dx), ys - (y0 + t * dy))
        dist = np.minimum(dist, d)
    return dist


def _sector_angles(center: tuple[float, float], shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """(angle, radius) of each pixel center; angle clockwise from 12 o'clock in [0, 2pi)."""
    ys, xs = _pixel_centers(shape)
    dx = xs - center[0]
    dy = ys - center[1]
    ang = np.arctan2(dx, -dy)  # 0 at 12 o'clock, increasing clockwise
    ang = np.mod(ang, 2.0 * math.pi)
    return ang, np.hypot(dx, dy)


def mark_pixels(mark: Mark, shape: tuple[int, int], stroke_px: float = LINE_STROKE_PX) -> np.ndarray:
    """Boolean raster of a single mark (solid-fill semantics)."""
    ys, xs = _pixel_centers(shape)
    if isinstance(mark, BarRect):
        return (xs >= mark.x) & (xs < mark.x + mark.w) & (ys >= mark.y) & (ys < mark.y + mark.h)
    if isinstance(mark, ScatterBubble):
        return np.hypot(xs - mark.center[0], ys - mark.center[1]) <= mark.radius
    if isinstance(mark, PieSector):
        ang, rad = _sector_angles(mark.center, shape)
        span = mark.end_angle - mark.start_angle
        if span >= 2.0 * math.pi - 1e-12:
            in_angle = np.ones(shape, dtype=bool)
        else:
            rel = np.mod(ang - mark.start_angle, 2.0 * math.pi)
            in_angle = rel < span
        return in_angle & (rad <= mark.radius)
    if isinstance(mark, LinePolyline):
        return _polyline_distance(mark.points, shape) <= stroke_px / 2.0
    raise TypeError(f"unknown mark type {type(mark).__name__}")


def rasterize_marks(
    geometry: ChartGeometry,
    stroke_px: float = LINE_STROKE_PX,
) -> np.ndarray:
    """Boolean union of all marks on the geometry's canvas."""
    w, h = geometry.canvas_size
    out = np.zeros((h, w), dtype=bool)
    for mark in geometry.marks:
        out |= mark_pixels(mark, (h, w), stroke_px=stroke_px)
    return out


def filled_under_curve_pixels(geometry: ChartGeometry) -> np.ndarray:
    """Pixels between the polyline and the plot bottom, per column."""
    w, h = geometry.canvas_size
    out = np.zeros((h, w), dtype=bool)
    polys = [m for m in geometry.marks if isinstance(m, LinePolyline)]
    if not polys:
        return out
    bottom = geometry.plot_area[3] if geometry.plot_area[3] > 0 else float(h)
    ys = np.arange(h, dtype=np.float64) + 0.5
    for poly in polys:
        pts = sorted(poly.points, key=lambda p: p[0])
        px = np.array([p[0] for p in pts])
        py = np.array([p[1] for p in pts])
        for col in range(w):
            cx = col + 0.5
            if cx < px[0] or cx > px[-1]:
                continue
            curve_y = float(np.interp(cx, px, py))
            out[:, col] |= (ys >= curve_y) & (ys < bottom)
    return out


def render_plain(geometry: ChartGeometry, spec=None) -> RasterImage:
    """Deterministic preview: marks in one flat color on a plain background."""
    mask = rasterize_marks(geometry)
    h, w = mask.shape
    px = np.empty((h, w, 4), dtype=np.uint8)
    px[:, :] = np.asarray(BACKGROUND_RGBA, dtype=np.uint8)
    px[mask] = np.asarray(MARK_RGBA, dtype=np.uint8)
    return RasterImage(px)


def render_mask_raster(mask_pixels: np.ndarray) -> RasterImage:
    """Render a binary mask as a flat-color image (marks on white)."""
    m = np.asarray(mask_pixels).astype(bool)
    h, w = m.shape
    px = np.empty((h, w, 4), dtype=np.uint8)
    px[:, :] = np.asarray(BACKGROUND_RGBA, dtype=np.uint8)
    px[m] = np.asarray(MARK_RGBA, dtype=np.uint8)
    return RasterImage(px)
