"""Directory-per-project persistence: JSON metadata plus PNG/SVG assets.

Everything on disk is diffable and inspectable; there is no database. Asset
ids embed the owning project id (``<project>.<token>``) so the flat
``/assets/{id}`` endpoint can locate the file without an index. Per-project
mutations are serialized through a process-local lock registry (single
writer per project); reads work from immutable snapshots loaded from disk.
"""

from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..chart_core.geometry import ChartSpec
from ..chart_core.table import DataTable
from ..errors import AssetNotFound, MalformedInput, ProjectNotFound
from ..raster import RasterImage

LAYER_KINDS = ("annotation", "element", "background")

_MEDIA_TYPES = {".png": "image/png", ".svg": "image/svg+xml", ".json": "application/json"}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _token(nbytes: int = 16) -> str:
    return secrets.token_hex(nbytes)


def identity_transform() -> dict:
    return {"tx": 0.0, "ty": 0.0, "rotate": 0.0, "scale": 1.0}


@dataclass
class Layer:
    id: str
    asset: str
    kind: str  # annotation | element | background
    transform: dict = field(default_factory=identity_transform)
    visible: bool = True

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise MalformedInput(f"unknown layer kind {self.kind!r}")
        t = dict(identity_transform())
        t.update(self.transform or {})
        if float(t["scale"]) == 0.0:
            raise MalformedInput("layer scale must be invertible (nonzero)")
        self.transform = t

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "asset": self.asset,
            "kind": self.kind,
            "transform": self.transform,
            "visible": self.visible,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Layer":
        return cls(
            id=d["id"],
            asset=d["asset"],
            kind=d["kind"],
            transform=d.get("transform") or identity_transform(),
            visible=bool(d.get("visible", True)),
        )


@dataclass
class GalleryEntry:
    id: str
    target: str  # foreground | background
    method: str  # conditional | unconditional
    options: dict  # everything needed to reproduce the run (seed included)
    request: dict  # final backend request fields
    result_asset: str
    condition_asset: str | None = None
    kept: bool = True

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "target": self.target,
            "method": self.method,
            "options": self.options,
            "request": self.request,
            "result_asset": self.result_asset,
            "condition_asset": self.condition_asset,
            "kept": self.kept,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GalleryEntry":
        return cls(
            id=d["id"],
            target=d["target"],
            method=d["method"],
            options=d.get("options", {}),
            request=d.get("request", {}),
            result_asset=d["result_asset"],
            condition_asset=d.get("condition_asset"),
            kept=bool(d.get("kept", True)),
        )


@dataclass
class Project:
    id: str
    table: DataTable
    spec: ChartSpec
    created: str
    modified: str
    preview_asset: str = ""
    annotations_asset: str = ""
    gallery: list[GalleryEntry] = field(default_factory=list)
    layers: list[Layer] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "created": self.created,
            "modified": self.modified,
            "table": self.table.to_dict(),
            "spec": self.spec.to_dict(),
            "preview_asset": self.preview_asset,
            "annotations_asset": self.annotations_asset,
            "gallery": [e.to_dict() for e in self.gallery],
            "layers": [l.to_dict() for l in self.layers],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Project":
        return cls(
            id=d["id"],
            table=DataTable.from_dict(d["table"]),
            spec=ChartSpec.from_dict(d["spec"]),
            created=d["created"],
            modified=d["modified"],
            preview_asset=d.get("preview_asset", ""),
            annotations_asset=d.get("annotations_asset", ""),
            gallery=[GalleryEntry.from_dict(e) for e in d.get("gallery", [])],
            layers=[Layer.from_dict(l) for l in d.get("layers", [])],
        )

    def entry(self, entry_id: str) -> GalleryEntry:
        for e in self.gallery:
            if e.id == entry_id:
                return e
        raise AssetNotFound(f"no gallery entry {entry_id!r}")

    def layer(self, layer_id: str) -> Layer:
        for l in self.layers:
            if l.id == layer_id:
                return l
        raise AssetNotFound(f"no layer {layer_id!r}")


class ProjectStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "projects").mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    # --- locking --------------------------------------------------------

    def lock(self, project_id: str) -> threading.Lock:
        with self._registry_lock:
            if project_id not in self._locks:
                self._locks[project_id] = threading.Lock()
            return self._locks[project_id]

    # --- project lifecycle ----------------------------------------------

    def _project_dir(self, project_id: str) -> Path:
        return self.root / "projects" / project_id

    def create(self, table: DataTable, spec: ChartSpec) -> Project:
        project_id = _token()
        now = _now()
        project = Project(id=project_id, table=table, spec=spec, created=now, modified=now)
        pdir = self._project_dir(project_id)
        (pdir / "assets").mkdir(parents=True, exist_ok=True)
        self._write(project)
        return project

    def _write(self, project: Project) -> None:
        path = self._project_dir(project.id) / "project.json"
        path.write_text(json.dumps(project.to_dict(), indent=2), encoding="utf-8")

    def save(self, project: Project) -> None:
        project.modified = _now()
        if not self._project_dir(project.id).exists():
            raise ProjectNotFound(project.id)
        self._write(project)

    def get(self, project_id: str) -> Project:
        path = self._project_dir(project_id) / "project.json"
        if not path.exists():
            raise ProjectNotFound(project_id)
        return Project.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def list_ids(self) -> list[str]:
        return sorted(p.name for p in (self.root / "projects").iterdir() if p.is_dir())

    # --- assets -----------------------------------------------------------

    def add_asset(self, project_id: str, data: bytes | RasterImage, ext: str = "png") -> str:
        if isinstance(data, RasterImage):
            data = data.to_png()
            ext = "png"
        pdir = self._project_dir(project_id)
        if not pdir.exists():
            raise ProjectNotFound(project_id)
        asset_id = f"{project_id}.{_token(8)}"
        (pdir / "assets" / f"{asset_id.split('.', 1)[1]}.{ext}").write_bytes(data)
        return asset_id

    def _asset_path(self, asset_id: str) -> Path:
        if "." not in asset_id:
            raise AssetNotFound(asset_id)
        project_id, token = asset_id.split(".", 1)
        adir = self._project_dir(project_id) / "assets"
        if adir.exists():
            for ext in (".png", ".svg", ".json"):
                path = adir / f"{token}{ext}"
                if path.exists():
                    return path
        raise AssetNotFound(asset_id)

    def asset_bytes(self, asset_id: str) -> tuple[bytes, str]:
        path = self._asset_path(asset_id)
        return path.read_bytes(), _MEDIA_TYPES.get(path.suffix, "application/octet-stream")

    def asset_image(self, asset_id: str) -> RasterImage:
        data, media = self.asset_bytes(asset_id)
        if media != "image/png":
            raise AssetNotFound(f"{asset_id} is not a raster asset")
        return RasterImage.from_png(data)

    def validate_layers(self, project: Project) -> None:
        for layer in project.layers:
            self._asset_path(layer.asset)
