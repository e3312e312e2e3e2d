"""Data-distortion evaluation between the plain chart and generated imagery.

The line path compares smoothed central-axis traces window by window: each
window's score is ``1 - |mean_chart - mean_generated| / 255`` on pixel-value
profiles where row 0 maps to 255 and the bottom row to 0 (higher on canvas
is a larger value, matching y-axis intuition). Bar, pie, and scatter marks
are measured directly in the raster and compared against the same
measurement applied to an ideal render of the geometry, so a faithful
render scores exactly 1.0 mark for mark.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .chart_core.geometry import BarRect, ChartGeometry, PieSector, ScatterBubble
from .chart_core.mask import ChartMask
from .chart_core.render import rasterize_marks
from .errors import EmptyForeground, MarkNotFound, NoEdgesFound, UnsupportedChartType
from .raster import RasterImage

# Window width as a fraction of canvas width; stride equals the window.
WINDOW_FRAC = 0.05
SMOOTH_K = 5
ERROR_THRESHOLD = 0.9
DILATE_RADIUS = 8
# Color distance from the flat background beyond which a pixel is foreground.
FG_COLOR_DELTA = 40


@dataclass
class AxisTrace:
    """Per-column central-axis row; NaN marks columns without foreground."""

    values: np.ndarray
    image_height: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def coverage(self) -> float:
        return float(self.defined.mean()) if self.values.size else 0.0


@dataclass
class WindowScore:
    index: int
    x_range: tuple[int, int]
    score: float


@dataclass
class DistortionReport:
    global_score: float
    windows: list[WindowScore]
    error_boxes: list[tuple[int, int, int, int]]  # x0, y0, x1, y1
    metric_kind: str  # height | trend | angle | size
    mark_scores: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "global_score": self.global_score,
            "metric_kind": self.metric_kind,
            "windows": [
                {"index": w.index, "x_range": list(w.x_range), "score": w.score}
                for w in self.windows
            ],
            "error_boxes": [list(b) for b in self.error_boxes],
            "mark_scores": self.mark_scores,
        }


def foreground_of(image: RasterImage) -> np.ndarray:
    """Foreground pixels: the alpha channel when it varies, else pixels whose
    color departs from the flat corner background."""
    alpha = image.alpha
    if (alpha < 255).any():
        return alpha >= 128
    px = image.rgb.astype(np.int16)
    corners = [px[0, 0], px[0, -1], px[-1, 0], px[-1, -1]]
    bg = corners[0]
    best = 0
    for cand in corners:
        votes = sum(1 for other in corners if np.array_equal(cand, other))
        if votes > best:
            best = votes
            bg = cand
    return np.abs(px - bg).max(axis=2) > FG_COLOR_DELTA


def extract_axis(image: RasterImage) -> AxisTrace:
    """Per-column mean row of the foreground (the element's central axis)."""
    fg = foreground_of(image)
    if not fg.any():
        raise EmptyForeground("image has no foreground pixels")
    h, w = fg.shape
    counts = fg.sum(axis=0)
    rows = np.arange(h, dtype=np.float64)[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        trace = (fg * rows).sum(axis=0) / counts
    trace[counts == 0] = np.nan
    return AxisTrace(values=trace, image_height=h)


def box_smooth(trace: AxisTrace, k: int = SMOOTH_K) -> AxisTrace:
    """Width-k moving average with edge clamping; NaN entries are skipped."""
    if k < 1 or k % 2 == 0:
        raise ValueError("k must be a positive odd integer")
    if k == 1:
        return AxisTrace(values=trace.values.copy(), image_height=trace.image_height)
    values = trace.values
    n = values.size
    half = k // 2
    out = np.full(n, np.nan)
    for i in range(n):
        window = values[[min(max(i + o, 0), n - 1) for o in range(-half, half + 1)]]
        good = ~np.isnan(window)
        if good.any():
            out[i] = float(window[good].mean())
    return AxisTrace(values=out, image_height=trace.image_height)


def trace_profile(trace: AxisTrace) -> np.ndarray:
    """Rows mapped to pixel values: row 0 -> 255, bottom row -> 0."""
    h = trace.image_height
    return 255.0 * (1.0 - trace.values / max(h - 1, 1))


def _windows(width: int, window_w: int, stride: int) -> list[tuple[int, int]]:
    return [(start, min(start + window_w, width)) for start in range(0, width, stride)]


def _windowed_report(
    chart_trace: AxisTrace,
    gen_trace: AxisTrace,
    window_w: int | None,
    stride: int | None,
    smooth_k: int,
) -> DistortionReport:
    width = chart_trace.values.size
    if window_w is None:
        window_w = max(1, round(WINDOW_FRAC * width))
    if stride is None:
        stride = window_w
    chart_s = box_smooth(chart_trace, smooth_k)
    gen_s = box_smooth(gen_trace, smooth_k)
    p_chart = trace_profile(chart_s)
    p_gen = trace_profile(gen_s)

    windows: list[WindowScore] = []
    boxes: list[tuple[int, int, int, int]] = []
    h = chart_trace.image_height
    for i, (x0, x1) in enumerate(_windows(width, window_w, stride)):
        c = p_chart[x0:x1]
        g = p_gen[x0:x1]
        c_ok = ~np.isnan(c)
        g_ok = ~np.isnan(g)
        if not c_ok.any():
            # No chart content in this window: nothing to distort.
            score = 1.0
        elif not g_ok.any():
            score = 0.0
        else:
            score = 1.0 - abs(float(c[c_ok].mean()) - float(g[g_ok].mean())) / 255.0
        score = min(1.0, max(0.0, score))
        windows.append(WindowScore(index=i, x_range=(x0, x1), score=score))
        if score < ERROR_THRESHOLD:
            rows = np.concatenate(
                [chart_s.values[x0:x1][c_ok], gen_s.values[x0:x1][g_ok]]
            )
            if rows.size:
                pad = max(4, window_w // 2)
                y0 = max(0, int(math.floor(rows.min())) - pad)
                y1 = min(h, int(math.ceil(rows.max())) + pad)
            else:
                y0, y1 = 0, h
            boxes.append((x0, y0, x1, y1))

    global_score = float(np.mean([w.score for w in windows])) if windows else 0.0
    return DistortionReport(
        global_score=global_score, windows=windows, error_boxes=boxes, metric_kind="trend"
    )


# A line element must define its trace on at least this fraction of columns.
MIN_TRACE_COVERAGE = 0.5


def trend_score(
    chart: RasterImage,
    generated: RasterImage,
    window_w: int | None = None,
    stride: int | None = None,
    smooth_k: int = SMOOTH_K,
) -> DistortionReport:
    """Windowed trend comparison between two images' central-axis traces."""
    if (chart.height, chart.width) != (generated.height, generated.width):
        raise ValueError("chart and generated images must share canvas size")
    gen_trace = extract_axis(generated)
    if gen_trace.coverage() < MIN_TRACE_COVERAGE:
        raise EmptyForeground(
            f"generated element defines a trace on only {gen_trace.coverage():.0%} "
            f"of columns; a line element needs at least {MIN_TRACE_COVERAGE:.0%}"
        )
    return _windowed_report(extract_axis(chart), gen_trace, window_w, stride, smooth_k)


# --- per-mark metrics ---------------------------------------------------------


def _pixel_grid(shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    ys = np.arange(shape[0], dtype=np.float64)[:, None] + 0.5
    xs = np.arange(shape[1], dtype=np.float64)[None, :] + 0.5
    return ys, xs


def _bar_height(fg: np.ndarray, mark: BarRect) -> float | None:
    h, w = fg.shape
    c0 = max(0, int(math.ceil(mark.x - 0.5)))
    c1 = min(w, int(math.ceil(mark.x + mark.w - 0.5)))
    if c1 <= c0:
        return None
    rows = np.flatnonzero(fg[:, c0:c1].any(axis=1))
    if rows.size == 0:
        return None
    return float(mark.bottom - (float(rows[0]) + 0.5))


def _wedge_ratio(fg: np.ndarray, mark: PieSector) -> float | None:
    h, w = fg.shape
    ys, xs = _pixel_grid(fg.shape)
    dx = xs - mark.center[0]
    dy = ys - mark.center[1]
    rad = np.hypot(dx, dy)
    disk = (rad <= mark.radius * 1.15) & fg
    total = int(disk.sum())
    if total == 0:
        return None
    ang = np.mod(np.arctan2(dx, -dy), 2.0 * math.pi)
    span = mark.end_angle - mark.start_angle
    rel = np.mod(ang - mark.start_angle, 2.0 * math.pi)
    in_wedge = (rel < span) & disk
    return float(in_wedge.sum()) / total


def _bubble_radius(fg: np.ndarray, mark: ScatterBubble) -> float | None:
    ys, xs = _pixel_grid(fg.shape)
    region = np.hypot(xs - mark.center[0], ys - mark.center[1]) <= mark.radius * 1.5
    count = int((region & fg).sum())
    if count == 0:
        return None
    return math.sqrt(count / math.pi)


def _mark_box(mark, shape) -> tuple[int, int, int, int]:
    h, w = shape
    if isinstance(mark, BarRect):
        return (
            max(0, int(mark.x)),
            max(0, int(mark.y)),
            min(w, int(math.ceil(mark.x + mark.w))),
            min(h, int(math.ceil(mark.y + mark.h))),
        )
    if isinstance(mark, PieSector):
        cx, cy = mark.center
        r = mark.radius
        return (
            max(0, int(cx - r)),
            max(0, int(cy - r)),
            min(w, int(math.ceil(cx + r))),
            min(h, int(math.ceil(cy + r))),
        )
    cx, cy = mark.center
    r = mark.radius * 1.2
    return (
        max(0, int(cx - r)),
        max(0, int(cy - r)),
        min(w, int(math.ceil(cx + r))),
        min(h, int(math.ceil(cy + r))),
    )


_METRIC_KIND = {"bar": "height", "pie": "angle", "scatter": "size"}


def mark_metric_score(geometry: ChartGeometry, generated: RasterImage) -> DistortionReport:
    """Per-mark distortion for bar (height), pie (angular mass), scatter (radius).

    Each mark's quantity is measured identically on the generated raster and
    on an ideal render of the geometry; the score is
    ``1 - |measured - expected| / expected`` clamped to [0, 1], and the
    global score is the mark mean. Comparing measurement against measurement
    (not against unquantized geometry) is what makes a faithful render score
    exactly 1.0.
    """
    if geometry.chart_type not in _METRIC_KIND:
        raise UnsupportedChartType(
            f"mark metrics are defined for bar/pie/scatter, not {geometry.chart_type}"
        )
    w, h = geometry.canvas_size
    if (generated.height, generated.width) != (h, w):
        raise ValueError("generated image must match the geometry canvas")
    fg = foreground_of(generated)
    ideal = rasterize_marks(geometry)

    def measure(bits: np.ndarray, mark) -> float | None:
        if isinstance(mark, BarRect):
            return _bar_height(bits, mark)
        if isinstance(mark, PieSector):
            return _wedge_ratio(bits, mark)
        if isinstance(mark, ScatterBubble):
            return _bubble_radius(bits, mark)
        return None

    scores = []
    mark_scores = []
    boxes = []
    for i, mark in enumerate(geometry.marks):
        expected = measure(ideal, mark)
        if expected is None or expected <= 0:
            continue  # degenerate mark (zero bar, empty sector)
        measured = measure(fg, mark)
        if measured is None:
            raise MarkNotFound(f"mark {i} has no opaque pixels in its neighborhood")
        score = min(1.0, max(0.0, 1.0 - abs(measured - expected) / expected))
        scores.append(score)
        mark_scores.append(
            {"mark": i, "score": score, "measured": measured, "expected": expected}
        )
        if score < ERROR_THRESHOLD:
            boxes.append(_mark_box(mark, (h, w)))
    if not scores:
        raise MarkNotFound("geometry has no measurable marks")
    return DistortionReport(
        global_score=float(np.mean(scores)),
        windows=[],
        error_boxes=boxes,
        metric_kind=_METRIC_KIND[geometry.chart_type],
        mark_scores=mark_scores,
    )


# --- background path ----------------------------------------------------------


def otsu_threshold(values: np.ndarray, bins: int = 256) -> float:
    """Otsu's threshold over a histogram of non-negative values."""
    values = np.asarray(values, dtype=np.float64).ravel()
    top = float(values.max())
    if top <= 0:
        return 0.0
    hist, edges = np.histogram(values, bins=bins, range=(0.0, top))
    hist = hist.astype(np.float64)
    total = hist.sum()
    omega = np.cumsum(hist) / total
    centers = (edges[:-1] + edges[1:]) / 2.0
    mu = np.cumsum(hist * centers) / total
    mu_total = mu[-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        between = (mu_total * omega - mu) ** 2 / (omega * (1.0 - omega))
    between[~np.isfinite(between)] = -1.0
    # The criterion is flat across empty histogram gaps; take the plateau
    # middle so the threshold lands mid-valley.
    best = between.max()
    candidates = np.flatnonzero(between >= best * (1.0 - 1e-12))
    return float(centers[int(candidates.mean())])


def _disk_structure(radius: int) -> np.ndarray:
    span = np.arange(-radius, radius + 1)
    yy, xx = np.meshgrid(span, span, indexing="ij")
    return np.hypot(yy, xx) <= radius


def mask_boundary(bits: np.ndarray) -> np.ndarray:
    bits = bits.astype(bool)
    return bits & ~ndimage.binary_erosion(bits, border_value=0)


def _trace_of_bits(bits: np.ndarray) -> AxisTrace:
    h, w = bits.shape
    counts = bits.sum(axis=0)
    rows = np.arange(h, dtype=np.float64)[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        trace = (bits * rows).sum(axis=0) / counts
    trace = np.where(counts == 0, np.nan, trace)
    return AxisTrace(values=trace, image_height=h)


def background_score(
    chart_mask: ChartMask,
    generated: RasterImage,
    window_w: int | None = None,
    stride: int | None = None,
    dilate_radius: int = DILATE_RADIUS,
    smooth_k: int = SMOOTH_K,
) -> DistortionReport:
    """Edge-based distortion for background embeddings.

    Sobel edges of the generated image, thresholded at Otsu's level and
    filtered by a dilated chart mask, are traced and compared against the
    mask's own boundary trace with the trend machinery.
    """
    bits = chart_mask.pixels.astype(bool)
    if bits.shape != (generated.height, generated.width):
        raise ValueError("mask and image sizes differ")
    lum = generated.luminance()
    gx = ndimage.sobel(lum, axis=1, mode="nearest")
    gy = ndimage.sobel(lum, axis=0, mode="nearest")
    mag = np.hypot(gx, gy)
    if mag.max() <= 0:
        raise NoEdgesFound("generated image has no gradients")
    edges = mag > otsu_threshold(mag)
    dilated = ndimage.binary_dilation(bits, structure=_disk_structure(dilate_radius))
    edges &= dilated
    if not edges.any():
        raise NoEdgesFound("no edges inside the dilated chart mask")
    edge_trace = _trace_of_bits(edges)
    boundary_trace = _trace_of_bits(mask_boundary(bits))
    return _windowed_report(boundary_trace, edge_trace, window_w, stride, smooth_k)
