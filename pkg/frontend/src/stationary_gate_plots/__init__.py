"""Figure rendering for the stationary-light gate simulator's CSV artifacts."""

from .recipes import FIGURE_IDS, FigureRecipe, RecipeError, recipe_for
from .render import RenderResult, Series, build_layout, render
from .tables import (
    EmptyTableError,
    MissingColumnError,
    Table,
    TableError,
    read_manifest,
    read_table,
)

__version__ = "0.1.0"

__all__ = [
    "FIGURE_IDS",
    "FigureRecipe",
    "RecipeError",
    "recipe_for",
    "RenderResult",
    "Series",
    "build_layout",
    "render",
    "EmptyTableError",
    "MissingColumnError",
    "Table",
    "TableError",
    "read_manifest",
    "read_table",
    "__version__",
]
