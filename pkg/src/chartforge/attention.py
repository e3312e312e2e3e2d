"""Attention-side math: score normalization, object masking, and fusion.

The fusion search is a dense, deterministic grid over 19 rotations and 21
scales (399 candidates). The objective for a candidate ``(theta, s)`` is the
sum of the transformed attention map over the chart-mask support, evaluated
in row-major mask order with a fixed bilinear accumulation order, so an
exhaustive re-evaluation reproduces the numbers bit for bit. Grid search is
the honest optimizer here: re-binarized resampling makes the objective
piecewise constant, so gradients carry no information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .chart_core.mask import ChartMask
from .errors import DimensionMismatch, EmptyMask, NonSquareImage
from .raster import RasterImage, bilinear_sample, resize_bilinear, rotate_scale

GRID_N = 16

# Fusion search lattice: theta in [-pi/4, pi/4] step pi/36, s in [0.5, 1.5] step 0.05.
THETA_STEPS = 19
SCALE_STEPS = 21
THETAS = tuple((i - (THETA_STEPS - 1) // 2) * (math.pi / 36.0) for i in range(THETA_STEPS))
SCALES = tuple(1.0 + 0.05 * (i - (SCALE_STEPS - 1) // 2) for i in range(SCALE_STEPS))


@dataclass
class AttentionInputs:
    """Q (n_q x d), K (n_k x d), V (n_k x c) with shared projection dim d."""

    Q: np.ndarray
    K: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        self.Q = np.asarray(self.Q, dtype=np.float64)
        self.K = np.asarray(self.K, dtype=np.float64)
        self.V = np.asarray(self.V, dtype=np.float64)
        if self.Q.ndim != 2 or self.K.ndim != 2 or self.V.ndim != 2:
            raise DimensionMismatch("Q, K, V must be 2-D matrices")
        if self.Q.shape[1] != self.K.shape[1]:
            raise DimensionMismatch(
                f"Q and K projection dims differ: {self.Q.shape[1]} vs {self.K.shape[1]}"
            )
        if self.K.shape[0] != self.V.shape[0]:
            raise DimensionMismatch(
                f"K rows and V rows differ: {self.K.shape[0]} vs {self.V.shape[0]}"
            )
        if self.Q.shape[1] < 1:
            raise DimensionMismatch("projection dimension must be >= 1")

    @property
    def d(self) -> int:
        return self.Q.shape[1]


def cross_attention(inputs: AttentionInputs) -> tuple[np.ndarray, np.ndarray]:
    """Scaled dot-product attention: (scores @ V, softmax(Q Kt / sqrt(d))).

    Scores are computed row-wise with max-subtraction for stability; each row
    sums to 1 up to float rounding.
    """
    logits = inputs.Q @ inputs.K.T / math.sqrt(inputs.d)
    logits = logits - logits.max(axis=1, keepdims=True)
    expd = np.exp(logits)
    scores = expd / expd.sum(axis=1, keepdims=True)
    return scores @ inputs.V, scores


@dataclass
class AttentionGrid:
    """N x N non-negative attention map for one prompt token."""

    values: np.ndarray
    token: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise DimensionMismatch(f"attention grid must be square, got {vals.shape}")
        if not np.isfinite(vals).all():
            raise ValueError("attention grid values must be finite")
        if (vals < 0).any():
            raise ValueError("attention grid values must be non-negative")
        self.values = vals

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def to_list(self) -> list[float]:
        return [float(v) for v in self.values.reshape(-1)]

    @classmethod
    def from_list(cls, values: list[float], n: int = GRID_N, token: str = "") -> "AttentionGrid":
        arr = np.asarray(values, dtype=np.float64)
        if arr.size != n * n:
            raise DimensionMismatch(f"expected {n * n} values, got {arr.size}")
        return cls(values=arr.reshape(n, n), token=token)


@dataclass
class ObjectMask:
    """Binary N x N mask of the object's location in attention space."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise DimensionMismatch("object mask must be 2-D")
        self.bits = (bits > 0).astype(np.uint8)


def threshold_mask(grid: AttentionGrid) -> ObjectMask:
    """Strict above-mean indicator: bit = 1 iff value > mean of the grid.

    Uniform grids therefore produce an all-zero mask.
    """
    mean = grid.values.mean()
    return ObjectMask(bits=(grid.values > mean).astype(np.uint8))


@dataclass
class ExtractedObject:
    """RGBA cutout; alpha is zero outside the (upsampled) object mask."""

    image: RasterImage
    coarse: bool = True


def apply_mask(mask: ObjectMask, image: RasterImage) -> ExtractedObject:
    """Upsample the object mask to the image and cut the object out.

    The mask is bilinearly resized with center alignment and re-binarized at
    0.5, so a set cell maps onto its (H/N)-scaled block with bilinearly
    rounded corners. Color channels are copied; alpha is 255 inside the mask
    and 0 outside.
    """
    if image.height != image.width:
        raise NonSquareImage(f"expected a square image, got {image.width}x{image.height}")
    up = resize_bilinear(mask.bits.astype(np.float64), image.height, image.width)
    opaque = up >= 0.5
    out = image.pixels.copy()
    out[:, :, 3] = np.where(opaque, 255, 0).astype(np.uint8)
    return ExtractedObject(image=RasterImage(out), coarse=True)


class SegmentationProvider:
    """Interface for external mattes; returns an H x W alpha in [0, 255]."""

    def segment(self, image: RasterImage) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError


def refine_object(obj: ExtractedObject, refiner: SegmentationProvider | None = None) -> ExtractedObject:
    """Remove redundant pixels from a coarse cutout.

    With an external refiner the provider's alpha is intersected with the
    coarse alpha (refinement never adds pixels). The built-in fallback keeps
    the largest connected opaque component and feathers the 1 px boundary
    ring to half opacity.
    """
    alpha = obj.image.alpha
    if refiner is not None:
        provided = np.asarray(refiner.segment(obj.image))
        if provided.shape != alpha.shape:
            raise DimensionMismatch(
                f"refiner alpha shape {provided.shape} != image {alpha.shape}"
            )
        new_alpha = np.minimum(provided.astype(np.uint8), alpha)
    else:
        opaque = alpha > 0
        labels, count = ndimage.label(opaque)
        if count > 1:
            sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=range(1, count + 1))
            keep = int(np.argmax(sizes)) + 1
            opaque = labels == keep
        interior = ndimage.binary_erosion(opaque, border_value=0)
        ring = opaque & ~interior
        new_alpha = np.where(interior, alpha, 0).astype(np.uint8)
        new_alpha[ring] = np.minimum(alpha[ring], 128).astype(np.uint8)
    out = obj.image.pixels.copy()
    out[:, :, 3] = new_alpha
    return ExtractedObject(image=RasterImage(out), coarse=False)


@dataclass
class AffineParams:
    theta: float  # rotation, radians
    s: float  # uniform scale, > 0

    def __post_init__(self):
        if self.s <= 0:
            raise ValueError("scale must be positive")


@dataclass
class FusedConditionImage:
    """Chart-information-bearing condition image for image-to-image injection.

    ``pixels`` is H x W (foreground: masked attention, peak-normalized to
    [0, 1]) or H x W x 3 (background: color fill inside the mask); either way
    it is zero outside the chart mask. ``objective`` is the raw attention
    mass captured inside the mask by the winning transform.
    """

    pixels: np.ndarray
    params: AffineParams
    objective: float
    mark_params: list[AffineParams] | None = None

    @property
    def support(self) -> np.ndarray:
        if self.pixels.ndim == 3:
            return self.pixels.max(axis=2) > 0
        return self.pixels > 0

    def to_raster(self) -> RasterImage:
        """Encode as an RGBA image for the generation backend."""
        if self.pixels.ndim == 3:
            rgb = np.clip(np.round(self.pixels * 255.0), 0, 255).astype(np.uint8)
        else:
            gray = np.clip(np.round(self.pixels * 255.0), 0, 255).astype(np.uint8)
            rgb = np.stack([gray, gray, gray], axis=2)
        alpha = np.full(rgb.shape[:2] + (1,), 255, dtype=np.uint8)
        return RasterImage(np.concatenate([rgb, alpha], axis=2))


def _mask_bits(chart_mask: ChartMask | np.ndarray) -> np.ndarray:
    if isinstance(chart_mask, ChartMask):
        return chart_mask.pixels.astype(bool)
    return np.asarray(chart_mask) > 0


def upsample_attention(grid: AttentionGrid, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear upsampling of raw attention values (no re-binarization)."""
    return resize_bilinear(grid.values, out_h, out_w)


def fusion_objectives(mask_bits: np.ndarray, upsampled: np.ndarray) -> np.ndarray:
    """Objective for every (theta, s) lattice point, THETA-major.

    Transformed values are gathered only at mask points (row-major order,
    matching ``np.nonzero``) and summed with ``np.sum`` along the point
    axis; callers re-deriving the objective must follow the same order for
    bitwise agreement. Lattice points are evaluated in chunks purely for
    speed; per-element arithmetic is unchanged.
    """
    h, w = upsampled.shape
    rows, cols = np.nonzero(mask_bits)
    if rows.size == 0:
        raise EmptyMask("chart mask has no set pixels")
    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0
    dy = rows.astype(np.float64) - cy
    dx = cols.astype(np.float64) - cx
    cos_t = np.array([math.cos(t) for t in THETAS for _ in SCALES])[:, None]
    sin_t = np.array([math.sin(t) for t in THETAS for _ in SCALES])[:, None]
    inv = np.array([1.0 / s for _ in THETAS for s in SCALES])[:, None]
    n_params = cos_t.shape[0]
    out = np.empty(n_params, dtype=np.float64)
    # Small chunks win: big (params x points) temporaries thrash the cache.
    chunk = 2
    for start in range(0, n_params, chunk):
        stop = min(start + chunk, n_params)
        sy = (cos_t[start:stop] * dy - sin_t[start:stop] * dx) * inv[start:stop] + cy
        sx = (sin_t[start:stop] * dy + cos_t[start:stop] * dx) * inv[start:stop] + cx
        out[start:stop] = np.sum(bilinear_sample(upsampled, sy, sx), axis=-1)
    return out


def fuse_foreground(chart_mask: ChartMask | np.ndarray, grid: AttentionGrid) -> FusedConditionImage:
    """Foreground fusion: mask times the best rotation/scale of the attention map.

    The winning parameters maximize the in-mask attention mass; exact ties
    prefer the smallest |theta|, then s closest to 1 (then theta, then s, so
    the choice is total). The fused pixels are the elementwise product under
    the winning transform, peak-normalized to [0, 1].
    """
    bits = _mask_bits(chart_mask)
    if not bits.any():
        raise EmptyMask("chart mask has no set pixels")
    h, w = bits.shape
    upsampled = upsample_attention(grid, h, w)
    objectives = fusion_objectives(bits, upsampled)

    best_i = 0
    best_key = None
    i = 0
    for theta in THETAS:
        for s in SCALES:
            key = (-objectives[i], abs(theta), abs(s - 1.0), theta, s)
            if best_key is None or key < best_key:
                best_key = key
                best_i = i
            i += 1
    theta = THETAS[best_i // len(SCALES)]
    s = SCALES[best_i % len(SCALES)]

    transformed = rotate_scale(upsampled, theta, s)
    product = np.where(bits, transformed, 0.0)
    peak = product.max()
    if peak > 0:
        product = product / peak
    return FusedConditionImage(
        pixels=product,
        params=AffineParams(theta=theta, s=s),
        objective=float(objectives[best_i]),
    )


def _mark_bboxes(chart_mask: ChartMask, pad: int = 2) -> list[tuple[int, int, int, int]]:
    from .chart_core.render import mark_pixels  # local import to avoid cycles

    geometry = chart_mask.source_geometry
    h, w = chart_mask.shape
    boxes = []
    for mark in geometry.marks:
        region = mark_pixels(mark, (h, w)) & (chart_mask.pixels > 0)
        rows = np.flatnonzero(region.any(axis=1))
        cols = np.flatnonzero(region.any(axis=0))
        if rows.size == 0 or cols.size == 0:
            continue
        boxes.append(
            (
                max(0, rows[0] - pad),
                max(0, cols[0] - pad),
                min(h, rows[-1] + 1 + pad),
                min(w, cols[-1] + 1 + pad),
            )
        )
    return boxes


def fuse_foreground_marks(chart_mask: ChartMask, grid: AttentionGrid) -> FusedConditionImage:
    """Per-mark fusion: run the rotation/scale search on each mark's local crop.

    The affine family has no translation term, so fitting the attention map
    per mark (on mark-local crops) is what places semantics on off-center
    marks. Falls back to whole-canvas fusion when the mask has no geometry.
    """
    if chart_mask.source_geometry is None or not chart_mask.source_geometry.marks:
        return fuse_foreground(chart_mask, grid)
    boxes = _mark_bboxes(chart_mask)
    if not boxes:
        raise EmptyMask("chart mask has no set pixels")
    h, w = chart_mask.shape
    out = np.zeros((h, w), dtype=np.float64)
    total = 0.0
    params: list[AffineParams] = []
    for r0, c0, r1, c1 in boxes:
        crop = chart_mask.pixels[r0:r1, c0:c1]
        if not crop.any():
            continue
        fused = fuse_foreground(crop, grid)
        out[r0:r1, c0:c1] = np.maximum(out[r0:r1, c0:c1], fused.pixels)
        total += fused.objective
        params.append(fused.params)
    peak = out.max()
    if peak > 0:
        out = out / peak
    first = params[0] if params else AffineParams(0.0, 1.0)
    return FusedConditionImage(pixels=out, params=first, objective=total, mark_params=params)


def dominant_color(grid: AttentionGrid, image: RasterImage) -> tuple[int, int, int]:
    """Attention-weighted mean color over above-mean attention pixels.

    Falls back to the plain mean color when the grid is uniform (no pixel
    exceeds the mean).
    """
    if image.height != image.width:
        raise NonSquareImage(f"expected a square image, got {image.width}x{image.height}")
    rgb = image.rgb.astype(np.float64)
    up = upsample_attention(grid, image.height, image.width)
    sel = up > grid.values.mean()
    if not sel.any():
        mean = rgb.reshape(-1, 3).mean(axis=0)
    else:
        weights = up[sel]
        total = weights.sum()
        if total <= 0:
            mean = rgb[sel].mean(axis=0)
        else:
            mean = (rgb[sel] * weights[:, None]).sum(axis=0) / total
    r, g, b = (int(round(float(c))) for c in mean)
    return (min(255, max(0, r)), min(255, max(0, g)), min(255, max(0, b)))


def fuse_background(
    chart_mask: ChartMask | np.ndarray, color: tuple[int, int, int]
) -> FusedConditionImage:
    """Color-mask condition: the chart mask filled with the dominant color.

    Pixels inside the mask carry the color normalized to [0, 1]; everything
    else is zero. Parameters are the identity; the result is ready to inject
    as an image-to-image initializer.
    """
    bits = _mask_bits(chart_mask)
    if not bits.any():
        raise EmptyMask("chart mask has no set pixels")
    rgb = np.asarray(color, dtype=np.float64) / 255.0
    if rgb.shape != (3,):
        raise DimensionMismatch("color must be an (r, g, b) triple")
    pixels = np.zeros(bits.shape + (3,), dtype=np.float64)
    pixels[bits] = rgb
    return FusedConditionImage(pixels=pixels, params=AffineParams(0.0, 1.0), objective=0.0)
