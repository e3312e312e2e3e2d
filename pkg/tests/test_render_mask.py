import numpy as np
import pytest

from chartforge.chart_core import (
    BarRect,
    ChartGeometry,
    LinePolyline,
    MARK_RGBA,
    mark_pixels,
    rasterize_marks,
    render_plain,
    synthesize_mask,
)
from chartforge.errors import IncompatibleVariant


def _mark_color_count(image):
    return int((image.pixels == np.asarray(MARK_RGBA, dtype=np.uint8)).all(axis=2).sum())


def test_empty_geometry_renders_background_only():
    geom = ChartGeometry(chart_type="bar", canvas_size=(64, 64), marks=[])
    image = render_plain(geom)
    assert _mark_color_count(image) == 0
    assert (image.pixels[:, :, :3] == 255).all()


def test_full_width_bar_pixel_count():
    # One full-width bar of height H covers H*W pixels exactly (integer-aligned).
    h, w = 100, 64
    geom = ChartGeometry(
        chart_type="bar",
        canvas_size=(w, 128),
        marks=[BarRect(x=0, y=28, w=w, h=h)],
    )
    image = render_plain(geom)
    count = _mark_color_count(image)
    assert count == h * w


def test_fractional_bar_within_one_percent():
    geom = ChartGeometry(
        chart_type="bar",
        canvas_size=(64, 128),
        marks=[BarRect(x=0.3, y=27.7, w=63.4, h=100.2)],
    )
    count = _mark_color_count(render_plain(geom))
    assert count == pytest.approx(100.2 * 63.4, rel=0.01)


def test_render_is_deterministic(bar_geometry):
    a = render_plain(bar_geometry)
    b = render_plain(bar_geometry)
    assert np.array_equal(a.pixels, b.pixels)
    assert a.to_png() == b.to_png()


def test_solid_mask_matches_render_marks(bar_geometry):
    mask = synthesize_mask(bar_geometry, "solid_marks")
    image = render_plain(bar_geometry)
    rendered = (image.pixels == np.asarray(MARK_RGBA, dtype=np.uint8)).all(axis=2)
    diff = np.logical_xor(mask.pixels.astype(bool), rendered).sum()
    assert diff <= 0.02 * max(1, mask.count())


def test_stroke_band_within_distance_oracle(line_geometry):
    band = 20.0
    mask = synthesize_mask(line_geometry, "stroke_band", band_px=band)
    poly = [m for m in line_geometry.marks if isinstance(m, LinePolyline)][0]
    h, w = mask.shape
    ys, xs = np.mgrid[0:h, 0:w]
    ys = ys + 0.5
    xs = xs + 0.5
    dist = np.full((h, w), np.inf)
    pts = poly.points
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        dx, dy = x1 - x0, y1 - y0
        seg = dx * dx + dy * dy
        t = np.clip(((xs - x0) * dx + (ys - y0) * dy) / seg, 0, 1)
        d = np.hypot(xs - (x0 + t * dx), ys - (y0 + t * dy))
        dist = np.minimum(dist, d)
    on = mask.pixels.astype(bool)
    assert (dist[on] <= band / 2 + 1e-9).all()


def test_incompatible_variants_rejected(pie_geometry, bar_geometry):
    with pytest.raises(IncompatibleVariant):
        synthesize_mask(pie_geometry, "stroke_band")
    with pytest.raises(IncompatibleVariant):
        synthesize_mask(bar_geometry, "filled_under_curve")
    with pytest.raises(IncompatibleVariant):
        synthesize_mask(bar_geometry, "no_such_variant")


def test_filled_under_curve_fills_down_to_plot_bottom(line_geometry):
    mask = synthesize_mask(line_geometry, "filled_under_curve")
    stroke = synthesize_mask(line_geometry, "solid_marks")
    assert mask.count() > stroke.count()
    # Every column under the polyline reaches down toward the plot bottom:
    poly = [m for m in line_geometry.marks if isinstance(m, LinePolyline)][0]
    bottom = line_geometry.plot_area[3]
    xs = [p[0] for p in poly.points]
    col = int((min(xs) + max(xs)) / 2)
    rows = np.flatnonzero(mask.pixels[:, col])
    assert rows.size > 0
    assert rows[-1] + 0.5 >= bottom - 1.5


def test_mask_pixels_inside_mark_regions(scatter_geometry):
    mask = synthesize_mask(scatter_geometry, "bubble_fill")
    h, w = mask.shape
    union = np.zeros((h, w), dtype=bool)
    for mark in scatter_geometry.marks:
        union |= mark_pixels(mark, (h, w))
    assert not (mask.pixels.astype(bool) & ~union).any()


def test_sector_fill_equals_solid_for_pie(pie_geometry):
    a = synthesize_mask(pie_geometry, "sector_fill")
    b = synthesize_mask(pie_geometry, "solid_marks")
    assert np.array_equal(a.pixels, b.pixels)


def test_pie_sector_pixels_partition_disk(pie_geometry):
    h, w = pie_geometry.canvas_size[1], pie_geometry.canvas_size[0]
    total = rasterize_marks(pie_geometry).sum()
    per_mark = sum(mark_pixels(m, (h, w)).sum() for m in pie_geometry.marks)
    assert total == per_mark  # sectors are disjoint and cover the disk
