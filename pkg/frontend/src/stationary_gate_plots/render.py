"""Turn a figure recipe into an image file.

Rendering is a pure function of the referenced CSV/manifest contents: the
series data are the parsed file values, untouched, so a caller can check
them bit-for-bit against the files.  No physics is recomputed here.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .recipes import FigureRecipe
from .tables import Table, TableError, read_manifest, read_table


@dataclass(frozen=True)
class Series:
    """One plotted curve; `band` is an optional +/- spread around y."""

    label: str
    x: np.ndarray
    y: np.ndarray
    panel: int = 0
    band: np.ndarray | None = None


@dataclass(frozen=True)
class Layout:
    series: tuple[Series, ...]
    x_label: str
    y_labels: tuple[str, ...]
    titles: tuple[str, ...]
    markers: tuple[float, ...] = ()


@dataclass(frozen=True)
class RenderResult:
    figure: str
    output: Path
    series: tuple[Series, ...]
    markers: tuple[float, ...]
    x_scale: str
    y_scale: str


def _dig(payload: dict, *keys, path: Path):
    node = payload
    for key in keys:
        if not isinstance(node, dict) or key not in node:
            raise TableError(f"{path}: manifest lacks {'.'.join(keys)}")
        node = node[key]
    return node


def _fig2_layout(recipe: FigureRecipe) -> Layout:
    table = read_table(recipe.input_csv[0])
    table.require("delta", "abs2_r0", "abs2_t0", "abs2_r1", "abs2_t1")
    delta = table.floats("delta")
    series = (
        Series("|r0|^2 (no stored photon)", delta, table.floats("abs2_r0"), panel=0),
        Series("|t0|^2 (no stored photon)", delta, table.floats("abs2_t0"), panel=0),
        Series("|r1|^2 (stored photon)", delta, table.floats("abs2_r1"), panel=1),
        Series("|t1|^2 (stored photon)", delta, table.floats("abs2_t1"), panel=1),
    )
    markers: tuple[float, ...] = ()
    if recipe.manifests:
        manifest = read_manifest(recipe.manifests[0])
        delta_res = _dig(manifest, "derived", "delta_res", path=recipe.manifests[0])
        if delta_res is not None:
            markers = (float(delta_res),)
    return Layout(
        series=series,
        x_label="two-photon detuning delta (units of Gamma)",
        y_labels=("scattering probability",) * 2,
        titles=("bare chain", "chain with stored photon"),
        markers=markers,
    )


def _family_order(table: Table) -> list[tuple[str, str]]:
    seen: list[tuple[str, str]] = []
    for pair in zip(table.strings("scheme"), table.strings("t_b_mode")):
        if pair not in seen:
            seen.append(pair)
    return seen


def _fig3_layout(recipe: FigureRecipe) -> Layout:
    table = read_table(recipe.input_csv[0])
    table.require("n_atoms", "scheme", "t_b_mode", "f_cj", "f_cj_cond")
    n_atoms = table.floats("n_atoms")
    schemes = np.array(table.strings("scheme"))
    modes = np.array(table.strings("t_b_mode"))
    columns = (("f_cj", 0), ("f_cj_cond", 1))
    series = []
    for scheme, mode in _family_order(table):
        mask = (schemes == scheme) & (modes == mode)
        label = f"{scheme}, t_b={mode}"
        for column, panel in columns:
            series.append(
                Series(label, n_atoms[mask], table.floats(column)[mask], panel=panel)
            )
    return Layout(
        series=tuple(series),
        x_label="atom number",
        y_labels=("gate fidelity", "conditional gate fidelity"),
        titles=("unconditional", "conditional on success"),
    )


def _point_per_run(recipe: FigureRecipe, x_keys: tuple[str, ...],
                   y_specs: tuple[tuple[str, ...], ...]):
    """One (x, y1, y2, ...) point per run directory entry, sorted in x.

    x comes from each manifest (key path x_keys); every y comes from a
    manifest key path in y_specs.  The paired CSV is read to enforce the
    table contract even though the point data live in the manifest.
    """
    points = []
    for csv_path, manifest_path in zip(recipe.input_csv, recipe.manifests):
        read_table(csv_path)
        manifest = read_manifest(manifest_path)
        x = _dig(manifest, *x_keys, path=manifest_path)
        ys = [_dig(manifest, *spec, path=manifest_path) for spec in y_specs]
        if any(y is None for y in (x, *ys)):
            raise TableError(f"{manifest_path}: null value under plotted keys")
        points.append((float(x), *[float(y) for y in ys]))
    points.sort(key=lambda p: p[0])
    arrays = tuple(np.array(col, dtype=np.float64) for col in zip(*points))
    return arrays


def _s3_layout(recipe: FigureRecipe) -> Layout:
    x, analytic, numeric = _point_per_run(
        recipe,
        ("config", "ensemble", "omega0"),
        (("derived", "width_analytic"), ("derived", "width_numeric")),
    )
    return Layout(
        series=(
            Series("analytic width", x, analytic),
            Series("numeric width", x, numeric),
        ),
        x_label="pump amplitude (units of Gamma)",
        y_labels=("transparency width (units of Gamma)",),
        titles=("transmission window width",),
    )


def _s6_layout(recipe: FigureRecipe) -> Layout:
    points = []
    for csv_path, manifest_path in zip(recipe.input_csv, recipe.manifests):
        table = read_table(csv_path)
        table.require("f_cj", "f_cj_cond")
        manifest = read_manifest(manifest_path)
        offset = _dig(manifest, "config", "geometry", "k0_l1", path=manifest_path)
        points.append((
            float(offset),
            table.floats("f_cj")[0],
            table.floats("f_cj_cond")[0],
        ))
    points.sort(key=lambda p: p[0])
    x, f_cj, f_cond = (np.array(col, dtype=np.float64) for col in zip(*points))
    return Layout(
        series=(
            Series("gate fidelity", x, f_cj),
            Series("conditional gate fidelity", x, f_cond),
        ),
        x_label="interferometer arm offset k0*l1 (radians)",
        y_labels=("gate fidelity",),
        titles=("arm-length misalignment",),
    )


def _s8_layout(recipe: FigureRecipe) -> Layout:
    table = read_table(recipe.input_csv[0])
    table.require("spacing_pi", "f_cj_cond_regular", "f_cj_cond_random_mean",
                  "f_cj_cond_random_std")
    x = table.floats("spacing_pi")
    series = (
        Series("regular placement", x, table.floats("f_cj_cond_regular")),
        Series("random placement (mean)", x,
               table.floats("f_cj_cond_random_mean"),
               band=table.floats("f_cj_cond_random_std")),
    )
    return Layout(
        series=series,
        x_label="interatomic spacing (units of pi/k0)",
        y_labels=("conditional gate fidelity",),
        titles=("placement sensitivity",),
    )


def _s9_layout(recipe: FigureRecipe) -> Layout:
    n_all, mean_all, std_all, spacing_all = [], [], [], []
    for csv_path in recipe.input_csv:
        table = read_table(csv_path)
        table.require("spacing_pi", "n_atoms", "f_cj_cond_random_mean",
                      "f_cj_cond_random_std")
        n_all.append(table.floats("n_atoms"))
        mean_all.append(table.floats("f_cj_cond_random_mean"))
        std_all.append(table.floats("f_cj_cond_random_std"))
        spacing_all.append(table.strings("spacing_pi"))
    n = np.concatenate(n_all)
    mean = np.concatenate(mean_all)
    std = np.concatenate(std_all)
    spacing = np.concatenate([np.array(s) for s in spacing_all])
    series = []
    for value in sorted(set(spacing), key=float):
        mask = spacing == value
        order = np.argsort(n[mask], kind="stable")
        series.append(Series(
            f"spacing {value} pi/k0",
            n[mask][order], mean[mask][order], band=std[mask][order],
        ))
    return Layout(
        series=tuple(series),
        x_label="atom number",
        y_labels=("conditional gate fidelity",),
        titles=("random placement vs atom number",),
    )


_LAYOUTS = {
    "fig2": _fig2_layout,
    "fig3": _fig3_layout,
    "s3": _s3_layout,
    "s6": _s6_layout,
    "s8": _s8_layout,
    "s9": _s9_layout,
}


def build_layout(recipe: FigureRecipe) -> Layout:
    """Assemble the plotted series for a recipe without touching matplotlib."""
    return _LAYOUTS[recipe.figure](recipe)


def render(recipe: FigureRecipe) -> RenderResult:
    """Draw the figure, write it to recipe.output, and report what was plotted."""
    layout = build_layout(recipe)
    n_panels = max(s.panel for s in layout.series) + 1
    fig = Figure(figsize=(5.2 * n_panels, 4.0))
    FigureCanvasAgg(fig)
    axes = fig.subplots(1, n_panels, squeeze=False)[0]
    # few-point sweeps get visible markers, dense scans plain lines
    dense = all(len(s.x) > 32 for s in layout.series)
    for s in layout.series:
        ax = axes[s.panel]
        line, = ax.plot(s.x, s.y, marker=None if dense else "o", label=s.label)
        if s.band is not None:
            ax.fill_between(s.x, s.y - s.band, s.y + s.band,
                            alpha=0.25, color=line.get_color())
    for panel, ax in enumerate(axes):
        for mark in layout.markers:
            ax.axvline(mark, color="k", linestyle=":", linewidth=1.0)
        ax.set_xscale(recipe.x_scale)
        ax.set_yscale(recipe.y_scale)
        ax.set_xlabel(layout.x_label)
        ax.set_ylabel(layout.y_labels[min(panel, len(layout.y_labels) - 1)])
        ax.set_title(layout.titles[min(panel, len(layout.titles) - 1)])
        ax.grid(alpha=0.3)
        ax.legend()
    fig.tight_layout()
    recipe.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(recipe.output, dpi=150)
    return RenderResult(
        figure=recipe.figure,
        output=recipe.output,
        series=layout.series,
        markers=layout.markers,
        x_scale=recipe.x_scale,
        y_scale=recipe.y_scale,
    )
