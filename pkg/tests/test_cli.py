import json
import re
import subprocess
import sys

import numpy as np
import pytest

from wgqed.cli import ConfigError, main, resolve_config
from wgqed.plotting import heatmap, line_plot, max_pool, render_plot

FAST = ["--dt", "0.1", "--t-max", "6", "--substeps", "2"]


def test_single_scatter_run(tmp_path, capsys):
    out = tmp_path / "single"
    assert main(["--scenario", "single-scatter", "--out-dir", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    for key in ("scenario", "config", "version", "started_utc", "wall_clock_seconds",
                "outputs", "checks", "all_checks_pass"):
        assert key in manifest
    assert set(manifest["outputs"]) >= {"xi_in.csv", "xi_out.csv", "xi_out_analytic.csv",
                                        "populations.csv", "xi_overlay.svg"}
    for name in manifest["outputs"]:
        assert (out / name).exists()
    printed = capsys.readouterr().out
    assert "FAIL" not in printed and printed.count("PASS") == 3
    assert manifest["all_checks_pass"]
    svg = (out / "xi_overlay.svg").read_text()
    assert svg.count('class="series"') == 3
    assert "<!-- provenance:" in svg


def test_csv_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["--scenario", "two-scatter", "--out-dir", str(d), "--format", "csv",
                     *FAST]) == 0
    names = sorted(p.name for p in a.glob("*.csv"))
    assert "xi2_out.csv" in names and "schmidt_out_coefficients.csv" in names
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
    assert not list(a.glob("*.svg"))


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("scenario = feedback  # comment\ndt = 0.25\ngamma = 2\n\n")
    c = resolve_config(["--config", str(cfg), "--gamma", "3"])
    assert c["scenario"] == "feedback"
    assert c["dt"] == 0.25
    assert c["gamma"] == 3.0
    assert c["delay"] == 1.0
    assert c["substeps"] == 8


@pytest.mark.parametrize("argv", [
    [],
    ["--scenario", "feedback", "--dt", "0.3"],
    ["--scenario", "feedback", "--delay", "20"],
    ["--scenario", "single-scatter", "--dt", "-1"],
    ["--scenario", "single-scatter", "--dt", "20"],
    ["--scenario", "convergence", "--n-list", "400,100"],
    ["--scenario", "nonsense"],
])
def test_bad_configuration_exits_2(argv, tmp_path, capsys):
    assert main(argv + ["--out-dir", str(tmp_path)]) == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("scenario = two-scatter\nwidth = 3\n")
    with pytest.raises(ConfigError, match="width"):
        resolve_config(["--config", str(cfg)])
    assert main(["--config", str(tmp_path / "missing.cfg")]) == 2


def test_runtime_failure_exits_1(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["--scenario", "single-scatter", "--out-dir", str(blocker / "x"), *FAST]) == 1


def test_feedback_outputs(tmp_path):
    out = tmp_path / "fb"
    assert main(["--scenario", "feedback", "--out-dir", str(out), "--dt", "0.1",
                 "--t-max", "4", "--substeps", "2"]) == 0
    header = (out / "emitter_population.csv").read_text().splitlines()[0]
    assert header == "t,phi_0,phi_3.14159,tau_inf"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "wgqed", "--version"], capture_output=True,
                       text=True)
    assert r.returncode == 0
    assert re.match(r"wgqed \d+\.\d+", r.stdout)


# plotting


def test_line_plot_rejects_bad_series(tmp_path):
    with pytest.raises(ValueError):
        line_plot(tmp_path / "a.svg", [])
    with pytest.raises(ValueError, match="empty"):
        line_plot(tmp_path / "a.svg", [("x", [], [])])
    with pytest.raises(ValueError, match="non-finite"):
        line_plot(tmp_path / "a.svg", [("x", [0, 1], [0, np.nan])])
    with pytest.raises(ValueError, match="log"):
        line_plot(tmp_path / "a.svg", [("x", [0, 1], [0, 1])], logy=True)
    with pytest.raises(ValueError):
        render_plot([], "pie", tmp_path / "a.svg")


def _cells(svg):
    cells = {}
    for m in re.finditer(r'data-i="(\d+)" data-j="(\d+)"[^>]*fill="(#[0-9a-f]{6})"', svg):
        cells[int(m[1]), int(m[2])] = m[3]
    return cells


def test_symmetric_heatmap_renders_symmetric(tmp_path):
    t = np.linspace(-2, 2, 30)
    m = np.exp(-(t[:, None] ** 2) - t[None, :] ** 2 + 0.5 * t[:, None] * t[None, :])
    svg = heatmap(tmp_path / "h.svg", m, t, t, provenance={"n": 30}).read_text()
    cells = _cells(svg)
    assert len(cells) == 900
    assert all(cells[i, j] == cells[j, i] for i, j in cells)
    assert '"n": 30' in svg


def test_heatmap_pooling(tmp_path):
    m = np.zeros((1000, 1000))
    m[999, 0] = 1
    pooled = max_pool(m, cap=400)
    assert pooled.shape == (334, 334)
    assert pooled[333, 0] == 1
    svg = heatmap(tmp_path / "big.svg", m).read_text()
    assert len(_cells(svg)) == 334 * 334
    with pytest.raises(ValueError):
        heatmap(tmp_path / "bad.svg", np.array([[np.inf]]))
