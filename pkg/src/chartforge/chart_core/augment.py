"""Seeded mask augmentation with a data-integrity guard.

Shape diversity must not move the data: every augmented mask is re-binarized
at 0.5 and then checked against the source mask. Bar masks may not move any
bar's top edge by more than ``GUARD_PX``; other masks may not move any
column's foreground centroid by more than ``GUARD_PX``. The warp displaces
whole columns horizontally (a vertical displacement of the documented
amplitude would shift line centroids by the full amplitude and fail the
guard by construction); steep segments still translate a horizontal slide
into a vertical centroid move of slope * amplitude, so in-range warps on
near-vertical strokes can legitimately raise IntegrityViolated.

Documented safe parameter ranges:

* ``gaussian_blur``: sigma in [0, 3] px
* ``motion_blur``: length in [0, 9] px, angle in [0, pi)
* ``warp``: amplitude in [0, 4] px, wavelength >= 64 px
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from ..errors import IntegrityViolated
from .geometry import BarRect
from .mask import ChartMask

AUGMENT_OPS = ("gaussian_blur", "motion_blur", "warp")

GUARD_PX = 2.0

SAFE_RANGES = {
    "gaussian_blur": {"sigma": (0.0, 3.0)},
    "motion_blur": {"length": (0, 9), "angle": (0.0, math.pi)},
    "warp": {"amplitude": (0.0, 4.0), "wavelength": (64.0, float("inf"))},
}


def _gaussian(bits: np.ndarray, sigma: float) -> np.ndarray:
    if sigma <= 0:
        return bits.astype(np.float64)
    return ndimage.gaussian_filter(bits.astype(np.float64), sigma=sigma, mode="nearest")


def _motion_kernel(length: int, angle: float) -> np.ndarray:
    k = max(3, 2 * ((length - 1) // 2) + 1)
    kernel = np.zeros((k, k), dtype=np.float64)
    c = (k - 1) / 2.0
    dx = math.cos(angle)
    dy = math.sin(angle)
    for i in range(length):
        t = i - (length - 1) / 2.0
        r = int(round(c + t * dy))
        col = int(round(c + t * dx))
        kernel[r, col] += 1.0
    return kernel / kernel.sum()


def _motion(bits: np.ndarray, length: int, angle: float) -> np.ndarray:
    if length <= 1:
        return bits.astype(np.float64)
    kernel = _motion_kernel(int(length), angle)
    return ndimage.convolve(bits.astype(np.float64), kernel, mode="nearest")


def _warp(bits: np.ndarray, amplitude: float, wavelength: float, phase: float) -> np.ndarray:
    # Displacement depends on the column only, so each column is a rigid
    # horizontal slide: no shear across a stroke's thickness, bar tops stay
    # put, and a line's centroid moves at most slope * amplitude.
    if amplitude == 0:
        return bits.astype(np.float64)
    h, w = bits.shape
    cols = np.arange(w, dtype=np.float64)
    shift = amplitude * np.sin(2.0 * math.pi * cols / wavelength + phase)
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), cols, indexing="ij")
    coords = np.stack([yy, xx - shift[None, :]])
    return ndimage.map_coordinates(
        bits.astype(np.float64), coords, order=1, mode="constant", cval=0.0
    )


def column_centroids(bits: np.ndarray) -> np.ndarray:
    """Per-column mean row of set pixels; NaN where a column is empty."""
    bits = np.asarray(bits, dtype=np.float64)
    counts = bits.sum(axis=0)
    rows = np.arange(bits.shape[0], dtype=np.float64)[:, None]
    sums = (bits * rows).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        cent = sums / counts
    cent[counts == 0] = np.nan
    return cent


def _bar_top_shift(before: np.ndarray, after: np.ndarray, geometry) -> float:
    """Largest per-bar change of the topmost occupied row."""
    h, w = before.shape
    worst = 0.0
    for mark in geometry.marks:
        if not isinstance(mark, BarRect) or mark.h <= 0:
            continue
        c0 = max(0, int(math.ceil(mark.x - 0.5)))
        c1 = min(w, int(math.ceil(mark.x + mark.w - 0.5)))
        if c1 <= c0:
            continue
        rows_before = np.flatnonzero(before[:, c0:c1].any(axis=1))
        rows_after = np.flatnonzero(after[:, c0:c1].any(axis=1))
        if rows_before.size == 0:
            continue
        if rows_after.size == 0:
            return float("inf")
        worst = max(worst, abs(float(rows_before[0]) - float(rows_after[0])))
    return worst


def _centroid_shift(before: np.ndarray, after: np.ndarray) -> float:
    """Largest per-column centroid change over columns occupied in both."""
    cb = column_centroids(before)
    ca = column_centroids(after)
    both = ~np.isnan(cb) & ~np.isnan(ca)
    if not both.any():
        return float("inf")
    return float(np.max(np.abs(cb[both] - ca[both])))


def integrity_shift(before: ChartMask, after_bits: np.ndarray) -> float:
    """Guard metric between a mask and a candidate augmented raster."""
    geometry = before.source_geometry
    if geometry is not None and geometry.chart_type == "bar":
        return _bar_top_shift(before.pixels.astype(bool), after_bits.astype(bool), geometry)
    return _centroid_shift(before.pixels.astype(bool), after_bits.astype(bool))


def augment(mask: ChartMask, op: str, params: dict | None = None, seed: int = 0) -> ChartMask:
    """Apply one augmentation and re-binarize at 0.5.

    Raises IntegrityViolated when the guard metric exceeds ``GUARD_PX`` or
    the marks vanish; the caller is expected to shrink the parameters.
    """
    if op not in AUGMENT_OPS:
        raise ValueError(f"unknown augmentation {op!r}")
    params = dict(params or {})
    bits = mask.pixels.astype(np.float64)
    if op == "gaussian_blur":
        blurred = _gaussian(bits, float(params.get("sigma", 1.5)))
    elif op == "motion_blur":
        blurred = _motion(bits, int(params.get("length", 5)), float(params.get("angle", 0.0)))
    else:
        rng = np.random.default_rng(seed)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        blurred = _warp(
            bits,
            float(params.get("amplitude", 2.0)),
            float(params.get("wavelength", 128.0)),
            phase,
        )
    out = (blurred >= 0.5).astype(np.uint8)
    if not out.any():
        raise IntegrityViolated(f"{op} erased every mark pixel")
    shift = integrity_shift(mask, out)
    if shift > GUARD_PX:
        raise IntegrityViolated(f"{op} moved marks by {shift:.2f} px (limit {GUARD_PX})")
    return ChartMask(pixels=out, variant=mask.variant, source_geometry=mask.source_geometry)
