"""Command line entry point: render one figure from an artifact directory."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .recipes import FIGURE_IDS, RecipeError, recipe_for
from .render import render
from .tables import TableError


@click.group()
def main():
    """Render figures from simulator CSV/manifest artifacts."""


@main.command(name="plot")
@click.argument("figure_id", type=click.Choice(FIGURE_IDS))
@click.option("--in", "in_dir", type=click.Path(path_type=Path), default=Path("."),
              show_default=True, help="Directory holding the CSV/manifest artifacts.")
@click.option("--out", "out_file", type=click.Path(path_type=Path), default=None,
              help="Output image file [default: <figure-id>.png].")
def plot(figure_id: str, in_dir: Path, out_file: Path | None):
    """Render FIGURE_ID from the artifacts in --in and write the image to --out."""
    if out_file is None:
        out_file = Path(f"{figure_id}.png")
    try:
        recipe = recipe_for(figure_id, in_dir, out_file)
        result = render(recipe)
    except (RecipeError, TableError) as exc:
        click.echo(f"plot error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"wrote {result.output} ({len(result.series)} series)")


if __name__ == "__main__":
    main()
