import math

import numpy as np
import pytest

from chartforge.chart_core import (
    BarRect,
    ChartSpec,
    PieSector,
    ScatterBubble,
    derive_geometry,
    mark_pixels,
    parse_table,
)
from chartforge.errors import ColumnMissing, NegativePieValue


def test_equal_pie_shares_make_right_angles():
    table = parse_table(b"k,v\na,25\nb,25\nc,25\nd,25", "csv")
    geom = derive_geometry(table, ChartSpec("pie", "k", "v"))
    for sector in geom.marks:
        assert sector.angle == pytest.approx(math.pi / 2, abs=1e-12)


def test_pie_angles_close_the_circle(bar_table):
    geom = derive_geometry(bar_table, ChartSpec("pie", "year", "area"))
    total = sum(m.angle for m in geom.marks)
    assert abs(total - 2 * math.pi) < 1e-9


def test_pie_closure_for_zero_total():
    table = parse_table(b"k,v\na,0\nb,0\nc,0", "csv")
    geom = derive_geometry(table, ChartSpec("pie", "k", "v"))
    total = sum(m.angle for m in geom.marks)
    assert abs(total - 2 * math.pi) < 1e-9


def test_negative_pie_value_rejected():
    table = parse_table(b"k,v\na,5\nb,-1", "csv")
    with pytest.raises(NegativePieValue):
        derive_geometry(table, ChartSpec("pie", "k", "v"))


def test_bar_heights_proportional():
    table = parse_table(b"k,v\na,1\nb,2", "csv")
    geom = derive_geometry(table, ChartSpec("bar", "k", "v"))
    h1, h2 = geom.marks[0].h, geom.marks[1].h
    assert h2 == pytest.approx(2 * h1, abs=1e-9)


def test_bar_pairwise_ratios_match_data(bar_table, bar_geometry):
    ys = [row[1] for row in bar_table.rows]
    order = [bar_geometry.data_binding[i] for i in range(len(bar_geometry.marks))]
    heights = [m.h for m in bar_geometry.marks]
    for i in range(len(heights)):
        for j in range(len(heights)):
            assert heights[i] / heights[j] == pytest.approx(
                ys[order[i]] / ys[order[j]], rel=1e-9
            )


def test_marks_ordered_by_numeric_x():
    table = parse_table(b"year,v\n2003,1\n2001,2\n2002,3", "csv")
    geom = derive_geometry(table, ChartSpec("bar", "year", "v"))
    xs = [m.x for m in geom.marks]
    assert xs == sorted(xs)
    # binding follows the sort: first mark is the 2001 row
    assert geom.data_binding[0] == 1


def test_scatter_radius_follows_sqrt_of_size():
    table = parse_table(b"x,y,s\n1,1,1\n2,2,4", "csv")
    geom = derive_geometry(table, ChartSpec("scatter", "x", "y", size_column="s"))
    r1, r2 = geom.marks[0].radius, geom.marks[1].radius
    assert r2 == pytest.approx(2 * r1, rel=1e-9)


def test_scatter_radius_area_checked_by_raster_integration():
    # Oracle: integrate the rendered bubble areas; area ratio must follow the
    # size ratio because radius encodes sqrt(size).
    table = parse_table(b"x,y,s\n1,1,1\n4,1,4", "csv")
    spec = ChartSpec("scatter", "x", "y", size_column="s")
    geom = derive_geometry(table, spec)
    h, w = spec.canvas_size[1], spec.canvas_size[0]
    areas = [int(mark_pixels(m, (h, w)).sum()) for m in geom.marks]
    assert areas[1] / areas[0] == pytest.approx(4.0, rel=0.03)


def test_scatter_radius_monotone_in_size(rng):
    sizes = rng.uniform(0.5, 9.0, size=8)
    rows = "\n".join(f"{i},{i},{s:.4f}" for i, s in enumerate(sizes))
    table = parse_table(f"x,y,s\n{rows}".encode(), "csv")
    geom = derive_geometry(table, ChartSpec("scatter", "x", "y", size_column="s"))
    order = np.argsort(sizes)
    radii = np.array([m.radius for m in geom.marks])
    assert (np.diff(radii[order]) >= -1e-12).all()


def test_missing_column_rejected(bar_table):
    with pytest.raises(ColumnMissing):
        derive_geometry(bar_table, ChartSpec("bar", "nope", "area"))
    with pytest.raises(ColumnMissing):
        derive_geometry(bar_table, ChartSpec("scatter", "year", "area", size_column="nope"))


def test_marks_fit_canvas(bar_geometry, pie_geometry, scatter_geometry):
    w, h = bar_geometry.canvas_size
    for geom in (bar_geometry, pie_geometry, scatter_geometry):
        for mark in geom.marks:
            if isinstance(mark, BarRect):
                assert 0 <= mark.x and mark.x + mark.w <= w
                assert 0 <= mark.y and mark.y + mark.h <= h + 1e-9
            elif isinstance(mark, (PieSector, ScatterBubble)):
                cx, cy = mark.center
                assert 0 <= cx - mark.radius and cx + mark.radius <= w
                assert 0 <= cy - mark.radius and cy + mark.radius <= h
