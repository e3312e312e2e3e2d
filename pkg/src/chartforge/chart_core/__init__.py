"""Chart ingestion, geometry, rendering, masks, augmentation, annotations."""

from .annotations import export_annotations, rasterize_annotations
from .augment import AUGMENT_OPS, GUARD_PX, SAFE_RANGES, augment, column_centroids, integrity_shift
from .geometry import (
    BarRect,
    CHART_TYPES,
    ChartGeometry,
    ChartSpec,
    LinePolyline,
    PieSector,
    ScatterBubble,
    derive_geometry,
    plot_rect,
)
from .mask import MASK_VARIANTS, STROKE_BAND_PX, ChartMask, compatible_variants, synthesize_mask
from .render import (
    LINE_STROKE_PX,
    MARK_RGBA,
    mark_pixels,
    rasterize_marks,
    render_mask_raster,
    render_plain,
)
from .table import Column, DataTable, parse_table

__all__ = [
    "AUGMENT_OPS",
    "BarRect",
    "CHART_TYPES",
    "ChartGeometry",
    "ChartMask",
    "ChartSpec",
    "Column",
    "DataTable",
    "GUARD_PX",
    "LINE_STROKE_PX",
    "LinePolyline",
    "MARK_RGBA",
    "MASK_VARIANTS",
    "PieSector",
    "SAFE_RANGES",
    "STROKE_BAND_PX",
    "ScatterBubble",
    "augment",
    "column_centroids",
    "compatible_variants",
    "derive_geometry",
    "export_annotations",
    "integrity_shift",
    "mark_pixels",
    "parse_table",
    "plot_rect",
    "rasterize_annotations",
    "rasterize_marks",
    "render_mask_raster",
    "render_plain",
    "synthesize_mask",
]
