"""Element replication (cut / warp / merge) and whole-canvas refinement.

Replication reuses one generated element across bars of different heights:
the element is cut into equal horizontal grids, each grid's editability is
scored by its structural similarity to the others, and vertical rescaling is
distributed so the most self-similar (most editable) grids absorb the most
change. A low-strength image-to-image pass then hides the seams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeMismatch, TooShort
from .genclient import BackendDescriptor, GenRequest, generate
from .raster import RasterImage, resize_rgba

# Single-scale SSIM constants (original formulation defaults).
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_L = 255.0
SSIM_WINDOW = 8

DEFAULT_SLICE_COUNT = 5


@dataclass
class GridSlice:
    image: RasterImage
    index: int  # 0-based from top
    original_height: int


@dataclass
class ReplicationPlan:
    """Tallest-bar element reused for each (mark index, target height) pair."""

    source_bar: int
    targets: list[tuple[int, int]]  # (mark index, target height px)
    slice_count: int = DEFAULT_SLICE_COUNT


def cut_grids(element: RasterImage, count: int = DEFAULT_SLICE_COUNT) -> list[GridSlice]:
    """Cut into ``count`` horizontal grids whose heights differ by at most 1 px.

    The taller slices come first; concatenating the slices reproduces the
    element exactly.
    """
    if count < 1:
        raise ValueError("count must be positive")
    h = element.height
    if h < count:
        raise TooShort(f"element height {h} is less than slice count {count}")
    base, rem = divmod(h, count)
    slices = []
    top = 0
    for i in range(count):
        sh = base + (1 if i < rem else 0)
        slices.append(
            GridSlice(
                image=RasterImage(element.pixels[top : top + sh].copy()),
                index=i,
                original_height=sh,
            )
        )
        top += sh
    return slices


def concat_slices(slices: list[GridSlice]) -> RasterImage:
    return RasterImage(np.vstack([s.image.pixels for s in slices]))


def _sliding_mean(arr: np.ndarray, wh: int, ww: int) -> np.ndarray:
    view = np.lib.stride_tricks.sliding_window_view(arr, (wh, ww))
    return view.mean(axis=(2, 3))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Single-scale SSIM on luminance with uniform 8x8 sliding windows.

    Uses population statistics per window and the K1=0.01 / K2=0.03 / L=255
    constants; the result is the mean of the local SSIM map.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise SizeMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    wh = min(SSIM_WINDOW, a.shape[0])
    ww = min(SSIM_WINDOW, a.shape[1])
    c1 = (SSIM_K1 * SSIM_L) ** 2
    c2 = (SSIM_K2 * SSIM_L) ** 2
    mu1 = _sliding_mean(a, wh, ww)
    mu2 = _sliding_mean(b, wh, ww)
    sigma1 = _sliding_mean(a * a, wh, ww) - mu1 * mu1
    sigma2 = _sliding_mean(b * b, wh, ww) - mu2 * mu2
    cov = _sliding_mean(a * b, wh, ww) - mu1 * mu2
    num = (2.0 * mu1 * mu2 + c1) * (2.0 * cov + c2)
    den = (mu1 * mu1 + mu2 * mu2 + c1) * (sigma1 + sigma2 + c2)
    return float((num / den).mean())


def _luminance(slice_: GridSlice) -> np.ndarray:
    return slice_.image.luminance()


def slice_similarity(slices: list[GridSlice]) -> np.ndarray:
    """Pairwise SSIM matrix over slice luminances (symmetric, unit diagonal).

    Slices produced by ``cut_grids`` may differ in height by one pixel; pairs
    are compared over their common top rows. Width mismatches are an error.
    """
    if len(slices) < 2:
        raise ValueError("need at least two slices")
    widths = {s.image.width for s in slices}
    if len(widths) > 1:
        raise SizeMismatch(f"slice widths differ: {sorted(widths)}")
    lums = [_luminance(s) for s in slices]
    n = len(slices)
    out = np.ones((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            h = min(lums[i].shape[0], lums[j].shape[0])
            value = ssim(lums[i][:h], lums[j][:h])
            out[i, j] = value
            out[j, i] = value
    return out


def editability_weights(similarity: np.ndarray) -> np.ndarray:
    """Per-slice weights from mean off-diagonal SSIM, clamped to >= 0, normalized."""
    n = similarity.shape[0]
    means = (similarity.sum(axis=1) - np.diag(similarity)) / (n - 1)
    weights = np.clip(means, 0.0, None)
    total = weights.sum()
    if total <= 0:
        return np.full(n, 1.0 / n)
    return weights / total


def _allocate_heights(ideal: np.ndarray, target: int) -> list[int]:
    """Non-negative integer heights summing to target, largest-remainder rounding."""
    ideal = np.clip(np.asarray(ideal, dtype=np.float64), 0.0, None)
    total = ideal.sum()
    scaled = ideal * (target / total) if total > 0 else np.full(len(ideal), target / len(ideal))
    floors = np.floor(scaled).astype(int)
    remainder = target - int(floors.sum())
    fracs = scaled - floors
    order = sorted(range(len(ideal)), key=lambda i: (-fracs[i], i))
    for i in order[:remainder]:
        floors[i] += 1
    return [int(v) for v in floors]


def warp_to_height(slices: list[GridSlice], target_height: int) -> RasterImage:
    """Rescale the stack vertically to exactly ``target_height``.

    The height change is distributed in proportion to editability weights
    (mean pairwise SSIM), so visually repetitive slices stretch or shrink
    more than distinctive ones. Width is unchanged.
    """
    if target_height < 1:
        raise ValueError("target_height must be >= 1")
    if len(slices) == 1:
        weights = np.array([1.0])
    else:
        weights = editability_weights(slice_similarity(slices))
    heights = np.array([s.image.height for s in slices], dtype=np.float64)
    delta = target_height - heights.sum()
    ideal = heights + delta * weights
    allocated = _allocate_heights(ideal, target_height)
    parts = []
    for s, h in zip(slices, allocated):
        if h == 0:
            continue
        if h == s.image.height:
            parts.append(s.image.pixels)
        else:
            parts.append(resize_rgba(s.image, h, s.image.width).pixels)
    return RasterImage(np.vstack(parts))


def merge_seams(
    warped: RasterImage,
    backend: BackendDescriptor | None,
    strength: float,
    prompt_object: str = "",
    prompt_description: str = "",
    seed: int = 0,
) -> RasterImage:
    """Low-strength image-to-image pass that blends the grid junctions.

    Strength is capped at 0.5: the pass should rework seams and texture, not
    repaint the element.
    """
    if not 0.0 <= strength <= 0.5:
        raise ValueError("merge strength must lie in [0, 0.5]")
    request = GenRequest(
        prompt_object=prompt_object,
        prompt_description=prompt_description,
        mode="img2img",
        init_image=warped,
        strength=strength,
        seed=seed,
        size=(warped.width, warped.height),
    )
    return generate(request, backend).image


def refine_canvas(
    composite: RasterImage,
    backend: BackendDescriptor | None,
    strength: float,
    prompt_object: str = "",
    prompt_description: str = "",
    seed: int = 0,
) -> RasterImage:
    """Whole-canvas harmonization pass; same contract as ``merge_seams``."""
    if not 0.0 <= strength <= 0.5:
        raise ValueError("refine strength must lie in [0, 0.5]")
    request = GenRequest(
        prompt_object=prompt_object,
        prompt_description=prompt_description,
        mode="img2img",
        init_image=composite,
        strength=strength,
        seed=seed,
        size=(composite.width, composite.height),
    )
    return generate(request, backend).image
