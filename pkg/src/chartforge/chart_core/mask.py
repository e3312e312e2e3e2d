"""Chart condition masks: binary rasters of the marks in several variants."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import IncompatibleVariant
from .geometry import ChartGeometry
from .render import LINE_STROKE_PX, filled_under_curve_pixels, rasterize_marks

MASK_VARIANTS = ("solid_marks", "filled_under_curve", "stroke_band", "sector_fill", "bubble_fill")

# Width of the stroke_band variant, px.
STROKE_BAND_PX = 20.0

_COMPATIBLE = {
    "bar": {"solid_marks"},
    "line": {"solid_marks", "filled_under_curve", "stroke_band"},
    "pie": {"solid_marks", "sector_fill"},
    "scatter": {"solid_marks", "bubble_fill"},
}


@dataclass
class ChartMask:
    """Binary raster of chart marks; the condition image for generation."""

    pixels: np.ndarray  # H x W uint8 in {0, 1}
    variant: str
    source_geometry: ChartGeometry | None = None

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {px.shape}")
        self.pixels = (px > 0).astype(np.uint8)

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def is_empty(self) -> bool:
        return not bool(self.pixels.any())

    def count(self) -> int:
        return int(self.pixels.sum())


def compatible_variants(chart_type: str) -> set[str]:
    return set(_COMPATIBLE.get(chart_type, {"solid_marks"}))


def synthesize_mask(
    geometry: ChartGeometry,
    variant: str = "solid_marks",
    band_px: float = STROKE_BAND_PX,
) -> ChartMask:
    """Rasterize the geometry into a binary mask of the requested variant.

    ``stroke_band`` widens the polyline stroke to ``band_px``;
    ``filled_under_curve`` fills from the polyline down to the plot bottom.
    ``sector_fill`` / ``bubble_fill`` are the solid fills of their chart
    types under the variant names the UI exposes.
    """
    if variant not in MASK_VARIANTS:
        raise IncompatibleVariant(f"unknown mask variant {variant!r}")
    if variant not in compatible_variants(geometry.chart_type):
        raise IncompatibleVariant(
            f"variant {variant!r} is not defined for {geometry.chart_type} charts"
        )
    if variant == "filled_under_curve":
        bits = filled_under_curve_pixels(geometry)
    elif variant == "stroke_band":
        bits = rasterize_marks(geometry, stroke_px=band_px)
    else:
        bits = rasterize_marks(geometry, stroke_px=LINE_STROKE_PX)
    return ChartMask(pixels=bits.astype(np.uint8), variant=variant, source_geometry=geometry)
