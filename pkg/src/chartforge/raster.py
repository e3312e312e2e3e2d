"""RGBA raster type plus the resampling primitives shared by all modules.

Resampling conventions matter here: several contracts (mask upsampling,
fusion search) promise exact pixel counts or exact objective values, so the
interpolation rules are pinned down once and reused everywhere:

* Pixel (i, j) covers the unit square with center (i + 0.5, j + 0.5); resizing
  maps output pixel centers to input coordinates via
  ``src = (dst + 0.5) * in_size / out_size - 0.5`` (the usual align-centers
  rule), with edge clamping.
* Rotation/scaling happens about the array center ``((h-1)/2, (w-1)/2)`` with
  bilinear sampling and zero fill outside the source.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import DimensionMismatch


@dataclass
class RasterImage:
    """H x W x 4 uint8 image (red, green, blue, alpha)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 4:
            raise DimensionMismatch(f"expected HxWx4 pixels, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise DimensionMismatch("image dimensions must be positive")
        if px.dtype != np.uint8:
            px = np.clip(np.round(px), 0, 255).astype(np.uint8)
        self.pixels = px

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def size(self) -> tuple[int, int]:
        """(width, height), PIL order."""
        return self.width, self.height

    @property
    def rgb(self) -> np.ndarray:
        return self.pixels[:, :, :3]

    @property
    def alpha(self) -> np.ndarray:
        return self.pixels[:, :, 3]

    def copy(self) -> "RasterImage":
        return RasterImage(self.pixels.copy())

    def luminance(self) -> np.ndarray:
        """Rec. 601 luma as float64 in [0, 255]."""
        rgb = self.pixels[:, :, :3].astype(np.float64)
        return 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]

    @classmethod
    def blank(cls, width: int, height: int, color=(255, 255, 255, 255)) -> "RasterImage":
        px = np.empty((height, width, 4), dtype=np.uint8)
        px[:, :] = np.asarray(color, dtype=np.uint8)
        return cls(px)

    @classmethod
    def from_png(cls, data: bytes) -> "RasterImage":
        with Image.open(io.BytesIO(data)) as im:
            return cls(np.asarray(im.convert("RGBA")))

    def to_png(self) -> bytes:
        buf = io.BytesIO()
        Image.fromarray(self.pixels, "RGBA").save(buf, format="PNG")
        return buf.getvalue()

    def to_pil(self) -> Image.Image:
        return Image.fromarray(self.pixels, "RGBA")


def resize_bilinear(arr: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resize a 2-D float array with center-aligned bilinear interpolation.

    Edge samples clamp to the border row/column, so an isolated source cell
    upsampled by an integer factor k yields exactly a k x k block above 0.5.
    """
    arr = np.asarray(arr, dtype=np.float64)
    h, w = arr.shape
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * (w / out_w) - 0.5
    ys = np.clip(ys, 0.0, h - 1.0)
    xs = np.clip(xs, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    v00 = arr[np.ix_(y0, x0)]
    v01 = arr[np.ix_(y0, x1)]
    v10 = arr[np.ix_(y1, x0)]
    v11 = arr[np.ix_(y1, x1)]
    return (
        (1.0 - fy) * (1.0 - fx) * v00
        + (1.0 - fy) * fx * v01
        + fy * (1.0 - fx) * v10
        + fy * fx * v11
    )


def bilinear_sample(arr: np.ndarray, sy: np.ndarray, sx: np.ndarray) -> np.ndarray:
    """Sample a 2-D array at fractional (row, col) coords, zero outside.

    The four corner contributions are accumulated in a fixed order
    (00, 01, 10, 11) so results are bit-reproducible.
    """
    arr = np.asarray(arr, dtype=np.float64)
    h, w = arr.shape
    y0f = np.floor(sy)
    x0f = np.floor(sx)
    fy = sy - y0f
    fx = sx - x0f
    y0 = y0f.astype(np.intp)
    x0 = x0f.astype(np.intp)
    out = np.zeros(np.broadcast(sy, sx).shape, dtype=np.float64)
    for dy, dx, wgt in (
        (0, 0, (1.0 - fy) * (1.0 - fx)),
        (0, 1, (1.0 - fy) * fx),
        (1, 0, fy * (1.0 - fx)),
        (1, 1, fy * fx),
    ):
        yi = y0 + dy
        xi = x0 + dx
        valid = (yi >= 0) & (yi < h) & (xi >= 0) & (xi < w)
        vals = arr[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)]
        out = out + wgt * np.where(valid, vals, 0.0)
    return out


def rotate_scale_coords(
    shape: tuple[int, int], theta: float, scale: float
) -> tuple[np.ndarray, np.ndarray]:
    """Source (row, col) coordinates realizing a rotation+scale about center."""
    h, w = shape
    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0
    cos_t = math.cos(theta)
    sin_t = math.sin(theta)
    inv = 1.0 / scale
    yy, xx = np.meshgrid(
        np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij"
    )
    dy = yy - cy
    dx = xx - cx
    sy = (cos_t * dy - sin_t * dx) * inv + cy
    sx = (sin_t * dy + cos_t * dx) * inv + cx
    return sy, sx


def rotate_scale(arr: np.ndarray, theta: float, scale: float) -> np.ndarray:
    """Rotate by ``theta`` and scale by ``scale`` about the array center.

    Bilinear sampling, zero fill outside. ``theta=0, scale=1`` is an exact
    identity (integer sample coordinates, no rounding).
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    sy, sx = rotate_scale_coords(arr.shape, theta, scale)
    return bilinear_sample(arr, sy, sx)


def resize_rgba(image: RasterImage, out_h: int, out_w: int) -> RasterImage:
    """Channel-wise bilinear resize of an RGBA image."""
    chans = [
        resize_bilinear(image.pixels[:, :, c].astype(np.float64), out_h, out_w)
        for c in range(4)
    ]
    out = np.clip(np.round(np.stack(chans, axis=2)), 0, 255).astype(np.uint8)
    return RasterImage(out)
