"""Figure-layer tests.

The input CSVs are produced by the experiment runner's command line (the
only interface the figure layer consumes); the tests here never import the
simulation package.
"""

import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from figures import (
    EmptyDataError,
    FigureRecipe,
    MissingColumnError,
    read_table,
    reference_dephasing_rate,
    render,
)
from figures.cli import main

RUNNER = shutil.which("sawtooth-channel")

TINY_CONFIGS = {
    "entropy-scan": "dims = 64\nnq_values = 1..6\n",
    "rate-vs-eta": "dims = 64\nnq_values = 4\neta_values = 0.0, 0.3, 1.0\n",
    "classical-autocorr": "particles = 20000\nautocorr_lags = 20\n",
    "forgetfulness": (
        "dims = 64\nidle_uses = 0, 2, 5\nopt_starts = 16\nopt_budget = 400\n"
    ),
    "regular-growth": "dims = 64\nnq_values = 2, 4, 8, 16\n",
    "capacity-transition": "dims = 64\nnq_values = 1..12\nk_values = -1.8, 1.4\n",
}

FIGURE_SOURCES = {
    1: "entropy-scan",
    2: "rate-vs-eta",
    3: "classical-autocorr",
    4: "regular-growth",
    5: "forgetfulness",
    6: "capacity-transition",
}


@pytest.fixture(scope="session")
def scenario_csvs(tmp_path_factory):
    assert RUNNER, "sawtooth-channel CLI not on PATH"
    root = tmp_path_factory.mktemp("csvs")
    paths = {}
    for scenario, body in TINY_CONFIGS.items():
        cfg = root / f"{scenario}.cfg"
        cfg.write_text(body)
        proc = subprocess.run(
            [RUNNER, scenario, "--config", str(cfg), "--out", str(root), "--seeds", "0,1"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        paths[scenario] = root / f"{scenario}.csv"
    return paths


@pytest.mark.parametrize("figure_id", sorted(FIGURE_SOURCES))
def test_renders_every_figure(figure_id, scenario_csvs, tmp_path):
    csv = scenario_csvs[FIGURE_SOURCES[figure_id]]
    out = tmp_path / f"fig{figure_id}.png"
    written = render(FigureRecipe(figure_id, (str(csv),), str(out)))
    assert Path(written).stat().st_size > 0


@pytest.mark.parametrize("suffix", [".png", ".svg"])
def test_rerender_is_byte_identical(suffix, scenario_csvs, tmp_path):
    csv = scenario_csvs["rate-vs-eta"]
    a = tmp_path / f"a{suffix}"
    b = tmp_path / f"b{suffix}"
    render(FigureRecipe(2, (str(csv),), str(a)))
    render(FigureRecipe(2, (str(csv),), str(b)))
    assert a.read_bytes() == b.read_bytes()


def test_missing_column_fails_loudly(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("N,Nq,seed,S_e\n64,1,0,0.5\n")  # figure 1 also needs R
    out = tmp_path / "fig.png"
    with pytest.raises(MissingColumnError, match="R"):
        render(FigureRecipe(1, (str(bad),), str(out)))
    assert not out.exists()


def test_empty_csv_writes_nothing(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("N,Nq,seed,S_e,R\n")
    out = tmp_path / "fig.png"
    with pytest.raises(EmptyDataError):
        render(FigureRecipe(1, (str(empty),), str(out)))
    assert not out.exists()


def test_recipe_validation():
    with pytest.raises(ValueError):
        FigureRecipe(7, ("x.csv",), "out.png")
    with pytest.raises(ValueError):
        FigureRecipe(1, ("a.csv", "b.csv"), "out.png")


def test_read_table_typed_access(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("K,seed,Q\n1.5,0,0.25\n-2,1,1\n")
    table = read_table(path, ("K", "Q"))
    np.testing.assert_allclose(table.floats("Q"), [0.25, 1.0])
    assert table.strings("seed") == ["0", "1"]


def test_reference_rate_formula():
    g = np.array([0.0, 0.5, 1.0])
    r = reference_dephasing_rate(g)
    assert r[0] == 0.0
    assert r[1] == pytest.approx(0.8112781244591328, abs=1e-12)
    assert r[2] == pytest.approx(1.0, abs=1e-12)


class TestCli:
    def test_success(self, scenario_csvs, tmp_path, capsys):
        out = tmp_path / "fig3.png"
        code = main(["3", "--csv", str(scenario_csvs["classical-autocorr"]), "--out", str(out)])
        assert code == 0
        assert out.exists()

    def test_missing_column_exit_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        code = main(["4", "--csv", str(bad), "--out", str(tmp_path / "f.png")])
        assert code == 1
        assert "missing column" in capsys.readouterr().err

    def test_missing_file_exit_one(self, tmp_path, capsys):
        code = main(["1", "--csv", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "f.png")])
        assert code == 1
