"""Figure recipes: which artifact files feed which figure, and how its axes look.

Each figure id has a file-name convention inside the input directory:

  fig2  one spectrum table `fig2.csv` (+ `fig2_manifest.json` for the
        resonance marker)
  fig3  one fidelity sweep table `fig3.csv` holding all curve families
  s3    spectrum runs `s3_*.csv`, transparency widths read from the paired
        `s3_*_manifest.json` files
  s6    single-point fidelity runs `s6_*.csv` at different arm offsets, the
        offset read from the paired manifest
  s8    one placement study table `s8.csv`
  s9    placement study tables `s9_*.csv` merged row-wise

Atom-number sweeps (fig3, s9) default to a logarithmic x axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

FIGURE_IDS = ("fig2", "fig3", "s3", "s6", "s8", "s9")
_SCALES = ("linear", "log")
_LOG_X_FIGURES = ("fig3", "s9")


class RecipeError(ValueError):
    """A figure recipe is malformed or references missing inputs."""


@dataclass(frozen=True)
class FigureRecipe:
    figure: str
    input_csv: tuple[Path, ...]
    output: Path
    manifests: tuple[Path, ...] = ()
    x_scale: str = "linear"
    y_scale: str = "linear"

    def __post_init__(self):
        if self.figure not in FIGURE_IDS:
            raise RecipeError(
                f"unknown figure id {self.figure!r} (choose from {FIGURE_IDS})"
            )
        if self.x_scale not in _SCALES or self.y_scale not in _SCALES:
            raise RecipeError("axis scales must be 'linear' or 'log'")
        if not self.input_csv:
            raise RecipeError(f"{self.figure}: recipe needs at least one input CSV")
        for path in (*self.input_csv, *self.manifests):
            if not Path(path).is_file():
                raise RecipeError(f"{self.figure}: input file not found: {path}")


def _manifest_for(csv_path: Path) -> Path:
    return csv_path.with_name(csv_path.stem + "_manifest.json")


def _glob_csv(in_dir: Path, pattern: str, figure: str) -> tuple[Path, ...]:
    found = tuple(sorted(in_dir.glob(pattern)))
    if not found:
        raise RecipeError(f"{figure}: no files matching {pattern!r} in {in_dir}")
    return found


def recipe_for(figure: str, in_dir: Path, output: Path) -> FigureRecipe:
    """Build the conventional recipe for a figure id from an artifact directory."""
    if figure not in FIGURE_IDS:
        raise RecipeError(
            f"unknown figure id {figure!r} (choose from {FIGURE_IDS})"
        )
    in_dir = Path(in_dir)
    x_scale = "log" if figure in _LOG_X_FIGURES else "linear"
    if figure in ("fig2", "fig3", "s8"):
        csvs = (in_dir / f"{figure}.csv",)
    else:
        csvs = _glob_csv(in_dir, f"{figure}_*.csv", figure)
    if figure == "fig2":
        # the resonance marker is optional: render without it if the run
        # could not locate a transmission peak
        manifest = _manifest_for(csvs[0])
        manifests = (manifest,) if manifest.is_file() else ()
    elif figure in ("s3", "s6"):
        manifests = tuple(_manifest_for(path) for path in csvs)
    else:
        manifests = ()
    return FigureRecipe(
        figure=figure,
        input_csv=csvs,
        output=Path(output),
        manifests=manifests,
        x_scale=x_scale,
    )
