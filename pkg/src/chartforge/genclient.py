"""Text-to-image backend orchestration plus a deterministic mock backend.

The wire contract is deliberately model-agnostic: JSON bodies over HTTP,
images as base64 PNG, and per-token attention grids (row-major, N=16)
traveling with every result. The mock backend implements the same contract
as a pure function of the request, which is what makes gallery backtracking
and the acceptance suite byte-reproducible.
"""

from __future__ import annotations

import base64
import colorsys
import hashlib
import math
import os
import re
import threading
from dataclasses import dataclass, field

import numpy as np
import requests

from .attention import GRID_N, AttentionGrid, FusedConditionImage
from .errors import (
    BackendTimeout,
    BackendUnreachable,
    DimensionMismatch,
    MissingAttention,
    ProviderUnavailable,
)
from .raster import RasterImage

ENV_BACKEND_URL = "CHARTFORGE_BACKEND_URL"

MODES = ("txt2img", "img2img")

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def object_token(prompt_object: str) -> str:
    """The token the object's attention grid is keyed by (head noun heuristic:
    last token of the object phrase)."""
    tokens = tokenize(prompt_object)
    return tokens[-1] if tokens else ""


@dataclass
class GenRequest:
    prompt_object: str
    prompt_description: str = ""
    mode: str = "txt2img"
    init_image: RasterImage | FusedConditionImage | None = None
    strength: float | None = None
    seed: int = 0
    size: tuple[int, int] = (512, 512)  # (width, height)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "img2img":
            if self.init_image is None:
                raise ValueError("img2img requires init_image")
            if self.strength is None:
                raise ValueError("img2img requires strength")
            if not 0.0 <= float(self.strength) <= 1.0:
                raise ValueError("strength must lie in [0, 1]")
        else:
            if self.strength is not None:
                raise ValueError("strength only applies to img2img")
            if self.init_image is not None:
                raise ValueError("init_image only applies to img2img")

    @property
    def prompt(self) -> str:
        return f"{self.prompt_object} {self.prompt_description}".strip()

    def init_raster(self) -> RasterImage | None:
        if self.init_image is None:
            return None
        if isinstance(self.init_image, FusedConditionImage):
            return self.init_image.to_raster()
        return self.init_image

    def options_dict(self) -> dict:
        """JSON-serializable request fields (images excluded)."""
        return {
            "prompt_object": self.prompt_object,
            "prompt_description": self.prompt_description,
            "mode": self.mode,
            "strength": self.strength,
            "seed": self.seed,
            "size": list(self.size),
        }


@dataclass
class GenResult:
    image: RasterImage
    attention: dict[str, AttentionGrid]
    backend_id: str
    seed: int


@dataclass
class BackendDescriptor:
    """Where generation requests go; empty/'mock' endpoint selects the mock."""

    endpoint: str = ""
    timeout_ms: int = 30000
    max_concurrent: int = 4
    _gate: threading.BoundedSemaphore = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.max_concurrent < 1:
            raise ValueError("max_concurrent must be >= 1")
        self._gate = threading.BoundedSemaphore(self.max_concurrent)

    @property
    def is_mock(self) -> bool:
        return self.endpoint.strip() in ("", "mock")


def validate_result(request: GenRequest, result: GenResult) -> GenResult:
    """Shared contract check for mock and HTTP results."""
    w, h = request.size
    if (result.image.width, result.image.height) != (w, h):
        raise DimensionMismatch(
            f"backend returned {result.image.width}x{result.image.height}, requested {w}x{h}"
        )
    token = object_token(request.prompt_object)
    if token not in result.attention:
        raise MissingAttention(f"no attention grid for object token {token!r}")
    return result


# --- deterministic mock backend ---------------------------------------------


def _digest_ints(*texts: str) -> list[int]:
    digest = hashlib.sha256("\x1f".join(texts).encode("utf-8")).digest()
    return [int.from_bytes(digest[i : i + 8], "big") for i in range(0, 32, 8)]


def procedural_layout(request: GenRequest) -> dict:
    """Blob geometry and palette the mock derives from (prompts, seed, size).

    Exposed so tests can recompute the blob center independently of the
    rendered output.
    """
    w, h = request.size
    rng = np.random.default_rng(
        [request.seed & 0xFFFFFFFFFFFFFFFF, *_digest_ints(request.prompt_object, request.prompt_description), w, h]
    )
    short = min(w, h)
    center = (
        w / 2.0 + float(rng.uniform(-0.15, 0.15)) * short,
        h / 2.0 + float(rng.uniform(-0.15, 0.15)) * short,
    )
    radius = float(rng.uniform(0.16, 0.26)) * short
    harmonics = [
        (int(k), float(rng.uniform(0.04, 0.12)), float(rng.uniform(0, 2 * math.pi)))
        for k in (2, 3, 5)
    ]
    hue = float(rng.uniform(0.0, 1.0))
    blob_rgb = tuple(
        int(round(255 * c)) for c in colorsys.hsv_to_rgb(hue, 0.78, 0.62)
    )
    bg_base = tuple(int(round(v)) for v in rng.uniform(185, 225, size=3))
    bg_waves = [
        (
            float(rng.uniform(0, math.pi)),
            float(rng.uniform(40, 120)),
            float(rng.uniform(0, 2 * math.pi)),
            float(rng.uniform(6, 14)),
        )
        for _ in range(2)
    ]
    return {
        "center": center,
        "radius": radius,
        "harmonics": harmonics,
        "blob_rgb": blob_rgb,
        "bg_base": bg_base,
        "bg_waves": bg_waves,
    }


def _procedural_image(request: GenRequest, layout: dict) -> np.ndarray:
    w, h = request.size
    ys = np.arange(h, dtype=np.float64)[:, None] + 0.5
    xs = np.arange(w, dtype=np.float64)[None, :] + 0.5

    rgb = np.zeros((h, w, 3), dtype=np.float64)
    rgb[:, :] = np.asarray(layout["bg_base"], dtype=np.float64)
    for angle, wavelength, phase, amp in layout["bg_waves"]:
        wave = np.sin(2 * math.pi * (xs * math.cos(angle) + ys * math.sin(angle)) / wavelength + phase)
        rgb += amp * wave[..., None]

    cx, cy = layout["center"]
    dx = xs - cx
    dy = ys - cy
    ang = np.arctan2(dy, dx)
    limit = np.full((h, w), layout["radius"], dtype=np.float64)
    for k, amp, phase in layout["harmonics"]:
        limit = limit * (1.0 + amp * np.sin(k * ang + phase))
    inside = np.hypot(dx, dy) <= limit
    rgb[inside] = np.asarray(layout["blob_rgb"], dtype=np.float64)

    out = np.empty((h, w, 4), dtype=np.uint8)
    out[:, :, :3] = np.clip(np.round(rgb), 0, 255).astype(np.uint8)
    out[:, :, 3] = 255
    return out


def _token_grids(request: GenRequest, layout: dict) -> dict[str, AttentionGrid]:
    w, h = request.size
    n = GRID_N
    cx, cy = layout["center"]
    # Grid cell centers in pixel coordinates.
    gy = (np.arange(n, dtype=np.float64)[:, None] + 0.5) * (h / n)
    gx = (np.arange(n, dtype=np.float64)[None, :] + 0.5) * (w / n)
    sigma = max(layout["radius"], 1.0)
    bump = np.exp(-((gy - cy) ** 2 + (gx - cx) ** 2) / (2.0 * sigma * sigma))

    grids: dict[str, AttentionGrid] = {}
    obj = object_token(request.prompt_object)
    for token in tokenize(request.prompt_object) or [""]:
        grids[token] = AttentionGrid(values=bump.copy(), token=token)
    if obj not in grids:
        grids[obj] = AttentionGrid(values=bump.copy(), token=obj)
    for token in tokenize(request.prompt_description):
        if token in grids:
            continue
        tx, ty, tw = _digest_ints(token)[:3]
        ox = (tx % 1009) / 1009.0 * w
        oy = (ty % 1013) / 1013.0 * h
        spread = (1.5 + (tw % 7) / 4.0) * sigma
        vals = 0.5 * np.exp(-((gy - oy) ** 2 + (gx - ox) ** 2) / (2.0 * spread * spread))
        grids[token] = AttentionGrid(values=vals, token=token)
    return grids


def mock_render(request: GenRequest) -> GenResult:
    """Procedural stand-in for the diffusion backend.

    txt2img paints a prompt-hash-colored blob on a textured background;
    img2img blends the initializer toward that procedural image by
    ``strength`` (0 keeps the initializer bit-exactly, 1 reproduces the
    txt2img output). Attention grids are Gaussian bumps centered on the
    blob with sigma equal to the blob radius.
    """
    layout = procedural_layout(request)
    procedural = _procedural_image(request, layout)
    if request.mode == "img2img":
        init = request.init_raster()
        if (init.width, init.height) != request.size:
            raise DimensionMismatch(
                f"init image is {init.width}x{init.height}, request is {request.size}"
            )
        s = float(request.strength)
        blended = init.pixels.astype(np.float64) * (1.0 - s) + procedural.astype(np.float64) * s
        pixels = np.clip(np.round(blended), 0, 255).astype(np.uint8)
    else:
        pixels = procedural
    result = GenResult(
        image=RasterImage(pixels),
        attention=_token_grids(request, layout),
        backend_id="mock",
        seed=request.seed,
    )
    return validate_result(request, result)


# --- HTTP backend ------------------------------------------------------------


def _encode_request(request: GenRequest) -> dict:
    body = request.options_dict()
    body["width"], body["height"] = request.size
    del body["size"]
    init = request.init_raster()
    if init is not None:
        body["init_image"] = base64.b64encode(init.to_png()).decode("ascii")
    return body


def _decode_result(payload: dict, request: GenRequest) -> GenResult:
    try:
        image = RasterImage.from_png(base64.b64decode(payload["image"]))
        attention = {}
        for token, grid in payload.get("attention", {}).items():
            n = int(grid.get("n", GRID_N))
            attention[token] = AttentionGrid.from_list(grid["values"], n=n, token=token)
        return GenResult(
            image=image,
            attention=attention,
            backend_id=str(payload.get("backend_id", "remote")),
            seed=int(payload.get("seed", request.seed)),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise BackendUnreachable(f"malformed backend response: {exc}") from exc


def http_generate(request: GenRequest, backend: BackendDescriptor) -> GenResult:
    url = backend.endpoint.rstrip("/") + "/generate"
    with backend._gate:
        try:
            response = requests.post(
                url, json=_encode_request(request), timeout=backend.timeout_ms / 1000.0
            )
        except requests.exceptions.Timeout as exc:
            raise BackendTimeout(f"backend at {url} timed out: {exc}") from exc
        except requests.exceptions.RequestException as exc:
            raise BackendUnreachable(f"backend at {url} unreachable: {exc}") from exc
    if response.status_code != 200:
        raise BackendUnreachable(f"backend at {url} returned HTTP {response.status_code}")
    return _decode_result(response.json(), request)


def resolve_backend(backend: BackendDescriptor | None = None) -> BackendDescriptor:
    """Explicit descriptor wins; otherwise CHARTFORGE_BACKEND_URL, else mock."""
    if backend is not None:
        return backend
    return BackendDescriptor(endpoint=os.environ.get(ENV_BACKEND_URL, ""))


# --- provider adapters over the same wire conventions -------------------------


class HttpKeywordProvider:
    """Keyword scoring over HTTP: ``POST {endpoint}/keywords {"text": ...}``
    answered with ``{"terms": [{"term": ..., "score": ...}, ...]}``."""

    def __init__(self, backend: BackendDescriptor):
        self.backend = backend

    def score_terms(self, title: str) -> list[tuple[str, float]]:
        url = self.backend.endpoint.rstrip("/") + "/keywords"
        try:
            response = requests.post(
                url, json={"text": title}, timeout=self.backend.timeout_ms / 1000.0
            )
        except requests.exceptions.RequestException as exc:
            raise ProviderUnavailable(f"keyword provider at {url}: {exc}") from exc
        if response.status_code != 200:
            raise ProviderUnavailable(f"keyword provider at {url}: HTTP {response.status_code}")
        try:
            terms = response.json()["terms"]
            return [(str(t["term"]), float(t["score"])) for t in terms]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderUnavailable(f"keyword provider at {url}: bad payload: {exc}") from exc


class HttpSegmentationProvider:
    """Matting over HTTP: ``POST {endpoint}/segment {"image": <b64 png>}``
    answered with ``{"alpha": <b64 png, grayscale>}``."""

    def __init__(self, backend: BackendDescriptor):
        self.backend = backend

    def segment(self, image: RasterImage) -> np.ndarray:
        url = self.backend.endpoint.rstrip("/") + "/segment"
        payload = {"image": base64.b64encode(image.to_png()).decode("ascii")}
        try:
            response = requests.post(
                url, json=payload, timeout=self.backend.timeout_ms / 1000.0
            )
        except requests.exceptions.RequestException as exc:
            raise ProviderUnavailable(f"segmentation provider at {url}: {exc}") from exc
        if response.status_code != 200:
            raise ProviderUnavailable(
                f"segmentation provider at {url}: HTTP {response.status_code}"
            )
        try:
            matte = RasterImage.from_png(base64.b64decode(response.json()["alpha"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderUnavailable(
                f"segmentation provider at {url}: bad payload: {exc}"
            ) from exc
        return matte.luminance().round().astype(np.uint8)


def generate(request: GenRequest, backend: BackendDescriptor | None = None) -> GenResult:
    """Run one generation against the resolved backend and validate the result."""
    descriptor = resolve_backend(backend)
    if descriptor.is_mock:
        return mock_render(request)
    return validate_result(request, http_generate(request, descriptor))
