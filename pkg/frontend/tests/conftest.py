from pathlib import Path

import pytest

SHIPPED_DATA = Path(__file__).resolve().parents[2] / "data"


def write_lines(path: Path, header: list[str], rows: list[list]) -> Path:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(c) if isinstance(c, float) else str(c) for c in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def spectrum_dir(tmp_path):
    """Minimal fig2-style artifact directory with a manifest marker."""
    write_lines(
        tmp_path / "fig2.csv",
        ["delta", "abs2_r0", "abs2_t0", "abs2_r1", "abs2_t1"],
        [
            [0.0, 0.9, 0.1, 0.8, 0.05],
            [0.1, 0.5, 0.6, 0.7, 0.10],
            [0.2, 0.2, 0.3, 0.6, 0.15],
        ],
    )
    (tmp_path / "fig2_manifest.json").write_text(
        '{"derived": {"delta_res": 0.1}}', encoding="utf-8"
    )
    return tmp_path


@pytest.fixture
def sweep_dir(tmp_path):
    """Minimal fig3-style artifact directory with two curve families."""
    write_lines(
        tmp_path / "fig3.csv",
        ["n_atoms", "scheme", "t_b_mode", "f_cj", "f_cj_cond", "error"],
        [
            [100, "lambda", "one", 0.11, 0.31, ""],
            [1000, "lambda", "one", 0.41, 0.61, ""],
            [100, "dual_v", "match_r0", 0.21, 0.31, ""],
            [1000, "dual_v", "match_r0", 0.51, 0.71, ""],
        ],
    )
    return tmp_path
