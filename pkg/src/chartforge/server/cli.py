"""Headless CLI over the same flows the service exposes.

Example:
    chartforge gen --data f.csv --type bar --object "book" \
        --desc "pile of books" --target fg --method cond --out out.png
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from ..chart_core.geometry import ChartSpec, derive_geometry
from ..chart_core.mask import MASK_VARIANTS
from ..chart_core.render import render_plain
from ..chart_core.table import parse_table
from ..errors import ChartforgeError
from ..genclient import resolve_backend
from . import flows
from .app import ENV_PORT, create_app, default_spec_columns

_TARGETS = {"fg": "foreground", "foreground": "foreground", "bg": "background", "background": "background"}
_METHODS = {
    "cond": "conditional",
    "conditional": "conditional",
    "uncond": "unconditional",
    "unconditional": "unconditional",
}


@click.group()
def main():
    """Pictorial visualization authoring from the command line."""


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None, help="Inferred from the extension when omitted.")
@click.option("--type", "chart_type", required=True, type=click.Choice(["bar", "line", "pie", "scatter"]))
@click.option("--x", "x_column", default=None, help="X column (defaults to the first non-numeric column).")
@click.option("--y", "y_column", default=None, help="Y column (defaults to the last numeric column).")
@click.option("--size-col", "size_column", default=None, help="Scatter bubble size column.")
@click.option("--title", default=None)
@click.option("--object", "prompt_object", required=True)
@click.option("--desc", "prompt_description", default="")
@click.option("--target", type=click.Choice(sorted(_TARGETS)), default="fg")
@click.option("--method", type=click.Choice(sorted(_METHODS)), default="uncond")
@click.option("--mask-variant", type=click.Choice(MASK_VARIANTS), default=None)
@click.option("--seed", type=int, default=0)
@click.option("--strength", type=float, default=None)
@click.option("--canvas", default="512x512", help="Canvas size, WxH.")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--condition-out", "condition_path", type=click.Path(path_type=Path), default=None, help="Also write the fused condition image (conditional flows).")
@click.option("--preview-out", "preview_path", type=click.Path(path_type=Path), default=None, help="Also write the plain chart preview.")
def gen(
    data_path,
    fmt,
    chart_type,
    x_column,
    y_column,
    size_column,
    title,
    prompt_object,
    prompt_description,
    target,
    method,
    mask_variant,
    seed,
    strength,
    canvas,
    out_path,
    condition_path,
    preview_path,
):
    """Run one generation flow and write the result as PNG."""
    try:
        if fmt is None:
            fmt = "json" if data_path.suffix.lower() == ".json" else "csv"
        table = parse_table(data_path.read_bytes(), fmt, title=title)
        if x_column is None or y_column is None:
            dx, dy = default_spec_columns(table)
            x_column = x_column or dx
            y_column = y_column or dy
        width, _, height = canvas.partition("x")
        spec = ChartSpec(
            chart_type=chart_type,
            x_column=x_column,
            y_column=y_column,
            size_column=size_column,
            canvas_size=(int(width), int(height or width)),
        )
        geometry = derive_geometry(table, spec)
        options = flows.GenerateOptions(
            prompt_object=prompt_object,
            prompt_description=prompt_description,
            target=_TARGETS[target],
            method=_METHODS[method],
            mask_variant=mask_variant,
            seed=seed,
            strength=strength,
        )
        result = flows.run_generation(
            table, spec, options, resolve_backend(), geometry=geometry
        )
    except ChartforgeError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(1)

    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_bytes(result.image.to_png())
    click.echo(f"wrote {out_path} ({options.target}/{options.method}, seed {seed})")
    if condition_path and result.condition is not None:
        condition_path.write_bytes(result.condition.to_raster().to_png())
        click.echo(f"wrote {condition_path}")
    if preview_path:
        preview_path.write_bytes(render_plain(geometry).to_png())
        click.echo(f"wrote {preview_path}")


@main.command()
@click.option("--port", type=int, default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--data-dir", type=click.Path(path_type=Path), default=None)
def serve(port, host, data_dir):
    """Run the HTTP service."""
    import uvicorn

    if port is None:
        port = int(os.environ.get(ENV_PORT, "8040"))
    app = create_app(data_dir=data_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
