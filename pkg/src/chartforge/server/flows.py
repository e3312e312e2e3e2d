"""The four generation flows and the modification/evaluation orchestration.

These functions are the only place modules are composed: every flow is a
linear pipeline over chart_core / attention / genclient / modification /
evaluation so each one can be audited stage by stage. All flows are pure
functions of (table, spec, options, backend), which is what makes gallery
entries reproducible from their stored options.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..attention import (
    AttentionGrid,
    FusedConditionImage,
    apply_mask,
    dominant_color,
    fuse_background,
    fuse_foreground_marks,
    refine_object,
    threshold_mask,
)
from ..chart_core.augment import augment
from ..chart_core.geometry import BarRect, ChartGeometry, ChartSpec, derive_geometry
from ..chart_core.mask import ChartMask, compatible_variants, synthesize_mask
from ..chart_core.render import render_plain
from ..chart_core.table import DataTable
from ..errors import (
    IntegrityViolated,
    InvalidPlan,
    MissingAttention,
    NoLayers,
    UnsupportedChartType,
)
from ..evaluation import DistortionReport, background_score, mark_metric_score, trend_score
from ..genclient import BackendDescriptor, GenRequest, generate, object_token
from ..modification import ReplicationPlan, cut_grids, merge_seams, refine_canvas, warp_to_height
from ..raster import RasterImage, bilinear_sample

TARGETS = ("foreground", "background")
METHODS = ("conditional", "unconditional")

DEFAULT_VARIANTS = {
    "bar": "solid_marks",
    "line": "stroke_band",
    "pie": "sector_fill",
    "scatter": "bubble_fill",
}

COND_FOREGROUND_STRENGTH = 0.8
COND_BACKGROUND_STRENGTH = 0.7


@dataclass
class GenerateOptions:
    prompt_object: str
    prompt_description: str = ""
    target: str = "foreground"
    method: str = "unconditional"
    mask_variant: str | None = None
    seed: int = 0
    strength: float | None = None

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValueError(f"target must be one of {TARGETS}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")

    def to_dict(self) -> dict:
        return {
            "prompt_object": self.prompt_object,
            "prompt_description": self.prompt_description,
            "target": self.target,
            "method": self.method,
            "mask_variant": self.mask_variant,
            "seed": self.seed,
            "strength": self.strength,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GenerateOptions":
        return cls(
            prompt_object=d["prompt_object"],
            prompt_description=d.get("prompt_description", ""),
            target=d.get("target", "foreground"),
            method=d.get("method", "unconditional"),
            mask_variant=d.get("mask_variant"),
            seed=int(d.get("seed", 0)),
            strength=d.get("strength"),
        )


@dataclass
class FlowResult:
    image: RasterImage
    request: dict  # final backend request fields
    condition: FusedConditionImage | None = None
    chart_mask: ChartMask | None = None


def _object_grid(result, prompt_object: str) -> AttentionGrid:
    token = object_token(prompt_object)
    if token not in result.attention:
        raise MissingAttention(f"backend returned no grid for {token!r}")
    return result.attention[token]


def _condition_mask(geometry: ChartGeometry, options: GenerateOptions) -> ChartMask:
    variant = options.mask_variant or DEFAULT_VARIANTS[geometry.chart_type]
    if variant not in compatible_variants(geometry.chart_type):
        variant = DEFAULT_VARIANTS[geometry.chart_type]
    return synthesize_mask(geometry, variant)


def _augment_seeded(mask: ChartMask, seed: int) -> ChartMask:
    """Seed-chosen augmentation with mid-range params; integrity failures
    fall back to the pristine mask (deterministically)."""
    rng = np.random.default_rng(seed)
    op = ("gaussian_blur", "motion_blur", "warp")[int(rng.integers(0, 3))]
    params = {
        "gaussian_blur": {"sigma": float(rng.uniform(0.5, 2.0))},
        "motion_blur": {"length": int(rng.integers(3, 8)), "angle": float(rng.uniform(0, math.pi))},
        "warp": {"amplitude": float(rng.uniform(0.5, 2.0)), "wavelength": float(rng.uniform(64, 192))},
    }[op]
    try:
        return augment(mask, op, params, seed=seed)
    except IntegrityViolated:
        return mask


def run_generation(
    table: DataTable,
    spec: ChartSpec,
    options: GenerateOptions,
    backend: BackendDescriptor | None = None,
    geometry: ChartGeometry | None = None,
) -> FlowResult:
    """Dispatch one of the four generation flows."""
    if geometry is None:
        geometry = derive_geometry(table, spec)
    size = spec.canvas_size

    txt_request = GenRequest(
        prompt_object=options.prompt_object,
        prompt_description=options.prompt_description,
        mode="txt2img",
        seed=options.seed,
        size=size,
    )

    if options.method == "unconditional":
        result = generate(txt_request, backend)
        if options.target == "background":
            return FlowResult(image=result.image, request=txt_request.options_dict())
        grid = _object_grid(result, options.prompt_object)
        extracted = apply_mask(threshold_mask(grid), result.image)
        refined = refine_object(extracted)
        return FlowResult(image=refined.image, request=txt_request.options_dict())

    # Conditional flows: probe for attention/color, fuse, then image-to-image.
    mask = _condition_mask(geometry, options)
    probe = generate(txt_request, backend)
    grid = _object_grid(probe, options.prompt_object)

    if options.target == "foreground":
        augmented = _augment_seeded(mask, options.seed)
        fused = fuse_foreground_marks(augmented, grid)
        strength = options.strength if options.strength is not None else COND_FOREGROUND_STRENGTH
        chart_mask = augmented
    else:
        color = dominant_color(grid, probe.image)
        fused = fuse_background(mask, color)
        strength = options.strength if options.strength is not None else COND_BACKGROUND_STRENGTH
        chart_mask = mask

    img_request = GenRequest(
        prompt_object=options.prompt_object,
        prompt_description=options.prompt_description,
        mode="img2img",
        init_image=fused,
        strength=strength,
        seed=options.seed,
        size=size,
    )
    final = generate(img_request, backend)
    return FlowResult(
        image=final.image,
        request=img_request.options_dict(),
        condition=fused,
        chart_mask=chart_mask,
    )


# --- replication ---------------------------------------------------------------


def bar_pixel_heights(geometry: ChartGeometry) -> list[int]:
    heights = []
    for mark in geometry.marks:
        if not isinstance(mark, BarRect):
            raise UnsupportedChartType("replication is defined for bar charts")
        heights.append(max(1, int(round(mark.h))))
    return heights


def build_plan(geometry: ChartGeometry, slice_count: int = 5) -> ReplicationPlan:
    """Default plan: the tallest bar is the source; every bar is a target."""
    heights = bar_pixel_heights(geometry)
    source = int(np.argmax(heights))
    return ReplicationPlan(
        source_bar=source,
        targets=[(i, h) for i, h in enumerate(heights)],
        slice_count=slice_count,
    )


def validate_plan(geometry: ChartGeometry, plan: ReplicationPlan) -> None:
    heights = bar_pixel_heights(geometry)
    if not 0 <= plan.source_bar < len(heights):
        raise InvalidPlan(f"source bar {plan.source_bar} out of range")
    source_h = heights[plan.source_bar]
    for mark_i, target_h in plan.targets:
        if not 0 <= mark_i < len(heights):
            raise InvalidPlan(f"target mark {mark_i} out of range")
        if target_h < 1:
            raise InvalidPlan("target heights must be >= 1")
        if target_h > source_h:
            raise InvalidPlan(
                f"target height {target_h} exceeds source bar height {source_h}"
            )


def crop_to_mark(image: RasterImage, mark: BarRect) -> RasterImage:
    h, w = image.height, image.width
    x0 = max(0, int(math.floor(mark.x)))
    x1 = min(w, int(math.ceil(mark.x + mark.w)))
    y0 = max(0, int(math.floor(mark.y)))
    y1 = min(h, int(math.ceil(mark.y + mark.h)))
    if x1 <= x0 or y1 <= y0:
        raise InvalidPlan("source bar has an empty pixel footprint")
    return RasterImage(image.pixels[y0:y1, x0:x1].copy())


def replicate(
    geometry: ChartGeometry,
    element_canvas: RasterImage,
    plan: ReplicationPlan,
    backend: BackendDescriptor | None = None,
    strength: float = 0.3,
    seed: int = 0,
    prompt_object: str = "",
    prompt_description: str = "",
) -> list[tuple[int, RasterImage]]:
    """Cut the source-bar element, warp it to each target height, merge seams.

    Per-target seeds differ so replicated marks stay unique rather than
    stamped copies.
    """
    if geometry.chart_type != "bar":
        raise UnsupportedChartType("replication is defined for bar charts")
    validate_plan(geometry, plan)
    element = crop_to_mark(element_canvas, geometry.marks[plan.source_bar])
    slices = cut_grids(element, plan.slice_count)
    out = []
    for offset, (mark_i, target_h) in enumerate(plan.targets):
        warped = warp_to_height(slices, target_h)
        merged = merge_seams(
            warped,
            backend,
            strength,
            prompt_object=prompt_object,
            prompt_description=prompt_description,
            seed=seed + offset,
        )
        out.append((mark_i, merged))
    return out


# --- compositing and refinement --------------------------------------------------


def transform_rgba(
    image: RasterImage,
    out_size: tuple[int, int],
    tx: float = 0.0,
    ty: float = 0.0,
    rotate: float = 0.0,
    scale: float = 1.0,
) -> RasterImage:
    """Place a layer on the canvas: scale/rotate about the image center, then
    translate. Zero alpha outside the source."""
    w, h = out_size
    cy = (image.height - 1) / 2.0
    cx = (image.width - 1) / 2.0
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    dy = yy - ty - cy
    dx = xx - tx - cx
    cos_t = math.cos(rotate)
    sin_t = math.sin(rotate)
    inv = 1.0 / scale
    sy = (cos_t * dy - sin_t * dx) * inv + cy
    sx = (sin_t * dy + cos_t * dx) * inv + cx
    chans = [bilinear_sample(image.pixels[:, :, c].astype(np.float64), sy, sx) for c in range(4)]
    out = np.clip(np.round(np.stack(chans, axis=2)), 0, 255).astype(np.uint8)
    return RasterImage(out)


def alpha_composite(base: RasterImage, over: RasterImage) -> RasterImage:
    b = base.pixels.astype(np.float64) / 255.0
    o = over.pixels.astype(np.float64) / 255.0
    oa = o[:, :, 3:4]
    ba = b[:, :, 3:4]
    out_a = oa + ba * (1.0 - oa)
    with np.errstate(invalid="ignore", divide="ignore"):
        out_rgb = (o[:, :, :3] * oa + b[:, :, :3] * ba * (1.0 - oa)) / np.where(out_a > 0, out_a, 1.0)
    out = np.concatenate([out_rgb, out_a], axis=2)
    return RasterImage(np.clip(np.round(out * 255.0), 0, 255).astype(np.uint8))


def composite_layers(
    layers: list[tuple[RasterImage, dict, bool]],
    canvas_size: tuple[int, int],
    background=(255, 255, 255, 255),
) -> RasterImage:
    """Bottom-to-top alpha compositing of (image, transform, visible) layers."""
    w, h = canvas_size
    canvas = RasterImage.blank(w, h, background)
    visible = [(img, t) for img, t, vis in layers if vis]
    if not visible:
        raise NoLayers("no visible layers to composite")
    for image, transform in visible:
        placed = transform_rgba(
            image,
            (w, h),
            tx=float(transform.get("tx", 0.0)),
            ty=float(transform.get("ty", 0.0)),
            rotate=float(transform.get("rotate", 0.0)),
            scale=float(transform.get("scale", 1.0)),
        )
        canvas = alpha_composite(canvas, placed)
    return canvas


def refine_composite(
    composite: RasterImage,
    backend: BackendDescriptor | None,
    strength: float = 0.3,
    seed: int = 0,
    prompt_object: str = "",
    prompt_description: str = "",
) -> RasterImage:
    return refine_canvas(
        composite,
        backend,
        strength,
        prompt_object=prompt_object,
        prompt_description=prompt_description,
        seed=seed,
    )


# --- evaluation dispatch -----------------------------------------------------------


def evaluate_image(
    table: DataTable,
    spec: ChartSpec,
    image: RasterImage,
    kind: str | None = None,
    geometry: ChartGeometry | None = None,
) -> DistortionReport:
    """Route to the right metric: background layers go through edge tracing,
    line charts through trend windows, bar/pie/scatter through mark metrics."""
    if geometry is None:
        geometry = derive_geometry(table, spec)
    if kind == "background":
        mask = synthesize_mask(geometry, DEFAULT_VARIANTS[geometry.chart_type])
        return background_score(mask, image)
    if geometry.chart_type == "line":
        return trend_score(render_plain(geometry), image)
    return mark_metric_score(geometry, image)
