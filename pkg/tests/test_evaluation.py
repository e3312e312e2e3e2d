import math

import numpy as np
import pytest

from chartforge.chart_core import (
    BarRect,
    ChartGeometry,
    ChartSpec,
    derive_geometry,
    render_mask_raster,
    render_plain,
    synthesize_mask,
)
from chartforge.errors import EmptyForeground, MarkNotFound, NoEdgesFound, UnsupportedChartType
from chartforge.evaluation import (
    AxisTrace,
    background_score,
    box_smooth,
    extract_axis,
    mark_metric_score,
    otsu_threshold,
    trend_score,
)
from chartforge.raster import RasterImage


def _line_image(h, w, row, thickness=3):
    px = np.full((h, w, 4), 255, dtype=np.uint8)
    r0 = max(0, row - thickness // 2)
    px[r0 : r0 + thickness, :, :3] = 0
    return RasterImage(px)


class TestExtractAxis:
    def test_thick_horizontal_line(self):
        trace = extract_axis(_line_image(256, 64, 100))
        assert np.allclose(trace.values, 100.0)

    def test_diagonal_line(self):
        # Keep the line off the image corners so the flat-background rule
        # sees clean white corners.
        h, w = 64, 32
        px = np.full((h, w, 4), 255, dtype=np.uint8)
        for c in range(w):
            px[c + 8, c, :3] = 0
        trace = extract_axis(RasterImage(px))
        for c in range(w):
            assert abs(trace.values[c] - (c + 8)) <= 0.5

    def test_random_blob_matches_centroid_oracle(self, rng):
        px = np.full((48, 48, 4), 255, dtype=np.uint8)
        blob = rng.random((48, 48)) < 0.2
        px[blob] = (10, 10, 10, 255)
        trace = extract_axis(RasterImage(px))
        for c in range(48):
            rows = np.flatnonzero(blob[:, c])
            if rows.size == 0:
                assert math.isnan(trace.values[c])
            else:
                assert trace.values[c] == pytest.approx(rows.mean(), abs=1e-9)

    def test_alpha_channel_preferred(self):
        px = np.zeros((32, 32, 4), dtype=np.uint8)
        px[:, :, :3] = 77
        px[10:13, :, 3] = 255
        trace = extract_axis(RasterImage(px))
        assert np.allclose(trace.values, 11.0)

    def test_empty_foreground(self):
        px = np.full((16, 16, 4), 255, dtype=np.uint8)
        with pytest.raises(EmptyForeground):
            extract_axis(RasterImage(px))


class TestBoxSmooth:
    def test_k1_identity(self):
        trace = AxisTrace(values=np.array([1.0, 5.0, 2.0]), image_height=10)
        out = box_smooth(trace, 1)
        assert np.array_equal(out.values, trace.values)

    def test_constant_unchanged(self):
        trace = AxisTrace(values=np.full(20, 7.0), image_height=10)
        assert np.allclose(box_smooth(trace, 5).values, 7.0)

    def test_step_matches_convolution_oracle(self):
        values = np.array([0.0] * 10 + [10.0] * 10)
        trace = AxisTrace(values=values, image_height=20)
        out = box_smooth(trace, 5)
        padded = np.pad(values, 2, mode="edge")
        oracle = np.convolve(padded, np.ones(5) / 5, mode="valid")
        assert np.allclose(out.values, oracle, atol=1e-12)

    def test_nan_values_skipped(self):
        values = np.array([1.0, np.nan, 3.0, np.nan, np.nan])
        out = box_smooth(AxisTrace(values=values, image_height=10), 3)
        assert out.values[0] == pytest.approx(1.0)  # clamped window [1, 1, nan]
        assert out.values[1] == pytest.approx(2.0)  # window [1, nan, 3]
        assert out.values[2] == pytest.approx(3.0)  # window [nan, 3, nan]
        assert math.isnan(out.values[4])  # window all NaN stays absent

    def test_even_k_rejected(self):
        with pytest.raises(ValueError):
            box_smooth(AxisTrace(values=np.zeros(4), image_height=4), 4)


class TestTrendScore:
    def test_self_comparison_perfect(self, bar_table):
        geom = derive_geometry(bar_table, ChartSpec("line", "year", "area"))
        image = render_plain(geom)
        report = trend_score(image, image)
        assert report.global_score == 1.0
        assert all(w.score == 1.0 for w in report.windows)
        assert report.error_boxes == []

    def test_full_offset_scores_zero(self):
        # Traces at row 0 and row H-1 map to profiles 255 and 0, the window-score
        # extreme. The lines stop short of the corners so background
        # detection stays on the white corners.
        h = w = 256
        chart = np.full((h, w, 4), 255, dtype=np.uint8)
        generated = np.full((h, w, 4), 255, dtype=np.uint8)
        chart[0, 2 : w - 2, :3] = 0
        generated[h - 1, 2 : w - 2, :3] = 0
        report = trend_score(RasterImage(chart), RasterImage(generated))
        assert all(win.score == 0.0 for win in report.windows)
        assert report.global_score == 0.0
        assert len(report.error_boxes) == len(report.windows)

    def test_twenty_percent_deviation_scores_point_eight(self):
        # Hand-computed window-score case: traces differ by 20% of (H-1) inside one
        # window; profiles differ by 51 levels there, so S = 1 - 51/255 = 0.8.
        h = w = 500
        window = 25
        offset = int(round(0.2 * (h - 1)))
        chart = np.full((h, w, 4), 255, dtype=np.uint8)
        gen = np.full((h, w, 4), 255, dtype=np.uint8)
        base = 200
        chart[base : base + 3, :, :3] = 0
        gen[base : base + 3, :, :3] = 0
        x0, x1 = 10 * window, 11 * window
        gen[base : base + 3, x0:x1, :3] = 255
        gen[base + offset : base + offset + 3, x0:x1, :3] = 0
        report = trend_score(RasterImage(chart), RasterImage(gen), window_w=window, stride=window)
        target = report.windows[10]
        assert target.score == pytest.approx(0.8, abs=0.01)
        away = [w_.score for w_ in report.windows if abs(w_.index - 10) > 1]
        assert min(away) > 0.99
        assert any(b[0] == x0 for b in report.error_boxes)

    def test_size_mismatch_rejected(self):
        with pytest.raises(ValueError):
            trend_score(_line_image(64, 64, 10), _line_image(32, 32, 5))

    def test_window_tiling_covers_canvas(self, bar_table):
        geom = derive_geometry(bar_table, ChartSpec("line", "year", "area"))
        image = render_plain(geom)
        report = trend_score(image, image)
        spans = [w.x_range for w in report.windows]
        assert spans[0][0] == 0
        assert spans[-1][1] == image.width
        for (a0, a1), (b0, b1) in zip(spans[:-1], spans[1:]):
            assert a1 == b0


class TestMarkMetrics:
    def test_self_render_scores_one(self, bar_geometry, pie_geometry, scatter_geometry):
        for geom in (bar_geometry, pie_geometry, scatter_geometry):
            report = mark_metric_score(geom, render_plain(geom))
            assert report.global_score == 1.0
            assert report.error_boxes == []

    def test_ten_percent_taller_bar_scores_point_nine(self, bar_table):
        spec = ChartSpec("bar", "year", "area")
        geom = derive_geometry(bar_table, spec)
        distorted = ChartGeometry(
            chart_type="bar",
            canvas_size=geom.canvas_size,
            marks=[BarRect(m.x, m.y, m.w, m.h) for m in geom.marks],
            data_binding=dict(geom.data_binding),
            plot_area=geom.plot_area,
        )
        mark = distorted.marks[2]
        grow = 0.1 * mark.h
        distorted.marks[2] = BarRect(mark.x, mark.y - grow, mark.w, mark.h + grow)
        report = mark_metric_score(geom, render_plain(distorted))
        bad = [m for m in report.mark_scores if m["mark"] == 2][0]
        assert bad["score"] == pytest.approx(0.9, abs=0.02)
        others = [m["score"] for m in report.mark_scores if m["mark"] != 2]
        assert min(others) == 1.0
        assert len(report.error_boxes) == 0 or bad["score"] < 0.9

    def test_missing_bar_raises(self, bar_geometry):
        partial = ChartGeometry(
            chart_type="bar",
            canvas_size=bar_geometry.canvas_size,
            marks=bar_geometry.marks[:-1],
            data_binding={i: i for i in range(len(bar_geometry.marks) - 1)},
            plot_area=bar_geometry.plot_area,
        )
        with pytest.raises(MarkNotFound):
            mark_metric_score(bar_geometry, render_plain(partial))

    def test_line_geometry_rejected(self, line_geometry):
        with pytest.raises(UnsupportedChartType):
            mark_metric_score(line_geometry, render_plain(line_geometry))

    def test_monotone_height_error(self, bar_table):
        # Growing a single bar's error strictly decreases its score until clamp.
        spec = ChartSpec("bar", "year", "area")
        geom = derive_geometry(bar_table, spec)
        scores = []
        for frac in (0.05, 0.15, 0.3, 0.6):
            marks = [BarRect(m.x, m.y, m.w, m.h) for m in geom.marks]
            m = marks[1]
            grow = frac * m.h
            marks[1] = BarRect(m.x, m.y - grow, m.w, m.h + grow)
            distorted = ChartGeometry(
                chart_type="bar",
                canvas_size=geom.canvas_size,
                marks=marks,
                data_binding=dict(geom.data_binding),
                plot_area=geom.plot_area,
            )
            report = mark_metric_score(geom, render_plain(distorted))
            scores.append([m_["score"] for m_ in report.mark_scores if m_["mark"] == 1][0])
        assert all(a > b for a, b in zip(scores[:-1], scores[1:]))


class TestBackgroundScore:
    def test_own_render_scores_high(self, bar_geometry, line_geometry):
        for geom, variant in ((bar_geometry, "solid_marks"), (line_geometry, "stroke_band")):
            mask = synthesize_mask(geom, variant)
            report = background_score(mask, render_mask_raster(mask.pixels))
            assert report.global_score >= 0.95

    def test_uniform_image_has_no_edges(self, bar_geometry):
        mask = synthesize_mask(bar_geometry, "solid_marks")
        uniform = RasterImage.blank(*bar_geometry.canvas_size, color=(128, 128, 128, 255))
        with pytest.raises(NoEdgesFound):
            background_score(mask, uniform)

    def test_edges_outside_dilated_mask_filtered(self):
        mask_bits = np.zeros((128, 128), dtype=np.uint8)
        mask_bits[40:60, 40:60] = 1
        from chartforge.chart_core.mask import ChartMask

        mask = ChartMask(pixels=mask_bits, variant="solid_marks")
        px = np.full((128, 128, 4), 255, dtype=np.uint8)
        px[110:, :, :3] = 0  # strong edge far from the mask
        with pytest.raises(NoEdgesFound):
            background_score(mask, RasterImage(px))

    def test_otsu_splits_bimodal(self, rng):
        values = np.concatenate([rng.normal(10, 1, 500), rng.normal(200, 5, 500)])
        values = np.clip(values, 0, None)
        t = otsu_threshold(values)
        assert 20 < t < 190
