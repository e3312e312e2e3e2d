"""HTTP service: project management, generation flows, evaluation, export.

Endpoints and configuration:

* ``POST /projects``, ``GET /projects/{id}``, ``GET /projects/{id}/semantics``
* ``POST /projects/{id}/generate | replicate | refine | evaluate | export``
* ``PUT /projects/{id}/layers``, ``PATCH /projects/{id}/gallery/{entry_id}``
* ``POST /projects/import``, ``GET /assets/{id}``
* env: CHARTFORGE_BACKEND_URL (mock when unset), CHARTFORGE_DATA_DIR,
  CHARTFORGE_PORT, CHARTFORGE_EMBEDDINGS (optional related-terms corpus)
"""

from __future__ import annotations

import base64
import os
from pathlib import Path

from fastapi import FastAPI, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .. import semantics
from ..chart_core.annotations import export_annotations, rasterize_annotations
from ..chart_core.geometry import ChartSpec, derive_geometry
from ..chart_core.render import render_plain
from ..chart_core.table import DataTable, parse_table
from ..errors import (
    AssetNotFound,
    BackendTimeout,
    BackendUnreachable,
    ChartforgeError,
    ProjectNotFound,
    UnsupportedFormat,
)
from ..genclient import BackendDescriptor, resolve_backend
from ..raster import RasterImage
from . import flows
from .store import GalleryEntry, Layer, Project, ProjectStore, _token

ENV_DATA_DIR = "CHARTFORGE_DATA_DIR"
ENV_PORT = "CHARTFORGE_PORT"
ENV_EMBEDDINGS = "CHARTFORGE_EMBEDDINGS"

DEFAULT_DATA_DIR = "./chartforge_data"

_STATUS = {
    ProjectNotFound: 404,
    AssetNotFound: 404,
    BackendUnreachable: 502,
    BackendTimeout: 504,
}


class SpecBody(BaseModel):
    chart_type: str
    x_column: str | None = None
    y_column: str | None = None
    size_column: str | None = None
    canvas_size: tuple[int, int] = (512, 512)
    aspect_ratio: tuple[int, int] = (1, 1)


class CreateProjectBody(BaseModel):
    data: str
    format: str = "csv"
    title: str | None = None
    spec: SpecBody


class GenerateBody(BaseModel):
    prompt_object: str = Field(alias="object")
    prompt_description: str = Field(default="", alias="description")
    target: str = "foreground"
    method: str = "unconditional"
    mask_variant: str | None = None
    seed: int = 0
    strength: float | None = None
    add_layer: bool = True

    model_config = {"populate_by_name": True}


class ReplicateBody(BaseModel):
    entry_id: str
    slice_count: int = 5
    strength: float = 0.3
    seed: int = 0
    targets: list[tuple[int, int]] | None = None
    add_layers: bool = True


class RefineBody(BaseModel):
    strength: float = 0.3
    seed: int = 0
    prompt_object: str = Field(default="", alias="object")
    prompt_description: str = Field(default="", alias="description")

    model_config = {"populate_by_name": True}


class EvaluateBody(BaseModel):
    target: str = "preview"  # "preview", "composite", a layer id, or an asset id
    kind: str | None = None  # force "background" to use the edge path


class ExportBody(BaseModel):
    format: str = "png"  # png | layered


class LayerBody(BaseModel):
    id: str | None = None
    asset: str
    kind: str = "element"
    transform: dict = Field(default_factory=dict)
    visible: bool = True


class LayersBody(BaseModel):
    layers: list[LayerBody]


class GalleryPatchBody(BaseModel):
    kept: bool


class ImportBody(BaseModel):
    document: dict


def default_spec_columns(table: DataTable) -> tuple[str, str]:
    non_numeric = [c.name for c in table.columns if c.kind != "numeric"]
    x_col = non_numeric[0] if non_numeric else table.columns[0].name
    numeric = [n for n in table.numeric_columns() if n != x_col] or table.numeric_columns()
    return x_col, numeric[-1]


def create_app(
    data_dir: str | Path | None = None, backend: BackendDescriptor | None = None
) -> FastAPI:
    store = ProjectStore(data_dir or os.environ.get(ENV_DATA_DIR, DEFAULT_DATA_DIR))
    app = FastAPI(title="chartforge", version="0.1.0")
    app.state.store = store
    app.state.backend = backend
    app.state.embeddings = None
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(ChartforgeError)
    async def _domain_error(request, exc: ChartforgeError):
        from fastapi.responses import JSONResponse

        status = next(
            (code for cls, code in _STATUS.items() if isinstance(exc, cls)), 400
        )
        return JSONResponse(
            status_code=status, content={"error": type(exc).__name__, "detail": str(exc)}
        )

    def backend_for_request() -> BackendDescriptor:
        return resolve_backend(app.state.backend)

    def embeddings_table():
        if app.state.embeddings is None:
            path = os.environ.get(ENV_EMBEDDINGS, "")
            if path and Path(path).exists():
                app.state.embeddings = semantics.load_embeddings(Path(path).read_bytes())
            else:
                app.state.embeddings = semantics.EmbeddingTable({})
        return app.state.embeddings

    def project_payload(project: Project) -> dict:
        return project.to_dict()

    def resolve_spec(body: SpecBody, table: DataTable) -> ChartSpec:
        x_col, y_col = body.x_column, body.y_column
        if x_col is None or y_col is None:
            dx, dy = default_spec_columns(table)
            x_col = x_col or dx
            y_col = y_col or dy
        return ChartSpec(
            chart_type=body.chart_type,
            x_column=x_col,
            y_column=y_col,
            size_column=body.size_column,
            canvas_size=tuple(body.canvas_size),
            aspect_ratio=tuple(body.aspect_ratio),
        )

    # --- projects -----------------------------------------------------------

    @app.post("/projects")
    def create_project(body: CreateProjectBody):
        table = parse_table(body.data, body.format, title=body.title)
        spec = resolve_spec(body.spec, table)
        geometry = derive_geometry(table, spec)
        project = store.create(table, spec)
        preview = render_plain(geometry)
        svg = export_annotations(geometry, table, spec)
        project.preview_asset = store.add_asset(project.id, preview)
        project.annotations_asset = store.add_asset(
            project.id, svg.encode("utf-8"), ext="svg"
        )
        project.layers = [
            Layer(id=_token(6), asset=project.preview_asset, kind="element"),
            Layer(id=_token(6), asset=project.annotations_asset, kind="annotation"),
        ]
        store.save(project)
        return project_payload(project)

    @app.get("/projects")
    def list_projects():
        return {"projects": store.list_ids()}

    @app.get("/projects/{project_id}")
    def get_project(project_id: str):
        return project_payload(store.get(project_id))

    @app.get("/projects/{project_id}/semantics")
    def get_semantics(project_id: str, k: int = 8):
        project = store.get(project_id)
        title = project.table.title or ""
        table = embeddings_table()
        provider = semantics.FallbackKeywordProvider(table if len(table) else None)
        keywords = semantics.extract_keywords(title, provider)
        related = {}
        for term, _score in keywords.keywords:
            if len(table) and term in table:
                related[term] = [
                    {
                        "term": r.term,
                        "similarity": r.similarity,
                        "frequency": r.frequency,
                        "rank": r.rank,
                    }
                    for r in semantics.related_terms(term, table, k)
                ]
            else:
                related[term] = []
        return {
            "keywords": [{"term": t, "score": s} for t, s in keywords.keywords],
            "related": related,
        }

    # --- generation -----------------------------------------------------------

    @app.post("/projects/{project_id}/generate")
    def generate_entry(project_id: str, body: GenerateBody):
        with store.lock(project_id):
            project = store.get(project_id)
            options = flows.GenerateOptions(
                prompt_object=body.prompt_object,
                prompt_description=body.prompt_description,
                target=body.target,
                method=body.method,
                mask_variant=body.mask_variant,
                seed=body.seed,
                strength=body.strength,
            )
            result = flows.run_generation(
                project.table, project.spec, options, backend_for_request()
            )
            asset = store.add_asset(project.id, result.image)
            condition_asset = None
            if result.condition is not None:
                condition_asset = store.add_asset(project.id, result.condition.to_raster())
            entry = GalleryEntry(
                id=_token(6),
                target=options.target,
                method=options.method,
                options=options.to_dict(),
                request=result.request,
                result_asset=asset,
                condition_asset=condition_asset,
            )
            project.gallery.append(entry)
            if body.add_layer:
                kind = "background" if options.target == "background" else "element"
                insert_at = 0 if kind == "background" else len(project.layers)
                project.layers.insert(
                    insert_at, Layer(id=_token(6), asset=asset, kind=kind)
                )
            store.save(project)
            return entry.to_dict()

    @app.post("/projects/{project_id}/replicate")
    def replicate_entry(project_id: str, body: ReplicateBody):
        with store.lock(project_id):
            project = store.get(project_id)
            entry = project.entry(body.entry_id)
            geometry = derive_geometry(project.table, project.spec)
            plan = flows.build_plan(geometry, body.slice_count)
            if body.targets is not None:
                plan.targets = [(int(i), int(h)) for i, h in body.targets]
            element_canvas = store.asset_image(entry.result_asset)
            produced = flows.replicate(
                geometry,
                element_canvas,
                plan,
                backend_for_request(),
                strength=body.strength,
                seed=body.seed,
                prompt_object=entry.options.get("prompt_object", ""),
                prompt_description=entry.options.get("prompt_description", ""),
            )
            assets = []
            for mark_i, image in produced:
                asset = store.add_asset(project.id, image)
                mark = geometry.marks[mark_i]
                # Layer transforms translate the asset center, so position the
                # replicated element over its bar (bottom-aligned).
                transform = {
                    "tx": (mark.x + mark.w / 2.0) - 0.5 - (image.width - 1) / 2.0,
                    "ty": (mark.bottom - image.height / 2.0) - 0.5 - (image.height - 1) / 2.0,
                    "rotate": 0.0,
                    "scale": 1.0,
                }
                assets.append({"mark": mark_i, "asset": asset, "height": image.height})
                if body.add_layers:
                    project.layers.append(
                        Layer(id=_token(6), asset=asset, kind="element", transform=transform)
                    )
            store.save(project)
            return {"plan": {"source_bar": plan.source_bar, "targets": plan.targets}, "assets": assets}

    def _composite(project: Project) -> RasterImage:
        geometry = derive_geometry(project.table, project.spec)
        stack: list[tuple[RasterImage, dict, bool]] = []
        for layer in project.layers:
            if not layer.visible:
                continue
            if layer.kind == "annotation":
                image = rasterize_annotations(geometry, project.table, project.spec)
            else:
                image = store.asset_image(layer.asset)
            stack.append((image, layer.transform, layer.visible))
        return flows.composite_layers(stack, project.spec.canvas_size)

    @app.post("/projects/{project_id}/refine")
    def refine_project(project_id: str, body: RefineBody):
        with store.lock(project_id):
            project = store.get(project_id)
            composite = _composite(project)
            refined = flows.refine_composite(
                composite,
                backend_for_request(),
                strength=body.strength,
                seed=body.seed,
                prompt_object=body.prompt_object,
                prompt_description=body.prompt_description,
            )
            asset = store.add_asset(project.id, refined)
            store.save(project)
            return {"asset": asset}

    @app.post("/projects/{project_id}/evaluate")
    def evaluate_project(project_id: str, body: EvaluateBody):
        project = store.get(project_id)
        kind = body.kind
        if body.target == "preview":
            image = store.asset_image(project.preview_asset)
        elif body.target == "composite":
            image = _composite(project)
        else:
            try:
                layer = project.layer(body.target)
                image = store.asset_image(layer.asset)
                if kind is None and layer.kind == "background":
                    kind = "background"
            except AssetNotFound:
                image = store.asset_image(body.target)
        report = flows.evaluate_image(project.table, project.spec, image, kind=kind)
        return report.to_dict()

    # --- export / import --------------------------------------------------------

    @app.post("/projects/{project_id}/export")
    def export_project(project_id: str, body: ExportBody):
        project = store.get(project_id)
        if body.format == "png":
            composite = _composite(project)
            return Response(content=composite.to_png(), media_type="image/png")
        if body.format == "layered":
            layers = []
            for layer in project.layers:
                data, media = store.asset_bytes(layer.asset)
                layers.append(
                    {
                        "kind": layer.kind,
                        "transform": layer.transform,
                        "visible": layer.visible,
                        "media_type": media,
                        "data": base64.b64encode(data).decode("ascii"),
                    }
                )
            return {
                "version": 1,
                "table": project.table.to_dict(),
                "spec": project.spec.to_dict(),
                "layers": layers,
            }
        raise UnsupportedFormat(f"unknown export format {body.format!r}")

    @app.post("/projects/import")
    def import_project(body: ImportBody):
        doc = body.document
        if doc.get("version") != 1 or "table" not in doc or "spec" not in doc:
            raise UnsupportedFormat("expected a version-1 layered document")
        table = DataTable.from_dict(doc["table"])
        spec = ChartSpec.from_dict(doc["spec"])
        geometry = derive_geometry(table, spec)
        project = store.create(table, spec)
        project.preview_asset = store.add_asset(project.id, render_plain(geometry))
        project.annotations_asset = store.add_asset(
            project.id, export_annotations(geometry, table, spec).encode("utf-8"), ext="svg"
        )
        for item in doc.get("layers", []):
            data = base64.b64decode(item["data"])
            ext = "svg" if item.get("media_type") == "image/svg+xml" else "png"
            asset = store.add_asset(project.id, data, ext=ext)
            project.layers.append(
                Layer(
                    id=_token(6),
                    asset=asset,
                    kind=item.get("kind", "element"),
                    transform=item.get("transform") or {},
                    visible=bool(item.get("visible", True)),
                )
            )
        store.save(project)
        return project_payload(project)

    # --- layers and gallery -------------------------------------------------------

    @app.put("/projects/{project_id}/layers")
    def put_layers(project_id: str, body: LayersBody):
        with store.lock(project_id):
            project = store.get(project_id)
            project.layers = [
                Layer(
                    id=item.id or _token(6),
                    asset=item.asset,
                    kind=item.kind,
                    transform=item.transform,
                    visible=item.visible,
                )
                for item in body.layers
            ]
            store.validate_layers(project)
            store.save(project)
            return project_payload(project)

    @app.patch("/projects/{project_id}/gallery/{entry_id}")
    def patch_gallery(project_id: str, entry_id: str, body: GalleryPatchBody):
        with store.lock(project_id):
            project = store.get(project_id)
            entry = project.entry(entry_id)
            entry.kept = body.kept
            store.save(project)
            return entry.to_dict()

    # --- assets ---------------------------------------------------------------------

    @app.get("/assets/{asset_id}")
    def get_asset(asset_id: str):
        data, media = store.asset_bytes(asset_id)
        return Response(content=data, media_type=media)

    ui_root = Path(__file__).resolve().parents[3] / "frontend"
    if (ui_root / "index.html").exists():
        app.mount("/ui", StaticFiles(directory=ui_root, html=True), name="ui")

    return app


app = create_app()
