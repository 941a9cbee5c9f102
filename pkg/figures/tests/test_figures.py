"""Figure regeneration: dotted line from the summary, determinism, errors."""

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

import figures
from figures import FigureError, FigureSpec, build_figure, load_series, render

COLUMNS = (
    "run_id,seed,n,S_n,log_Sn_over_log_n,M_n,hits,E_n,sbc_ratio,"
    "qsbc_residual,trimmed_b8,aaronson_ratio,last_hit_index"
)


def _write_inputs(tmp_path, exponent=2.0, n_orbits=4):
    """Synthetic run outputs shaped like the primary component's files."""
    rows = [COLUMNS]
    ns = [10, 100, 1000, 10000, 100000]
    rng = np.random.default_rng(7)
    for rid in range(n_orbits):
        wobble = rng.normal(0.0, 0.05)
        for n in ns:
            v = exponent + wobble + 0.5 / math.log(n)
            s = float(n) ** v
            rows.append(
                "%d,%d,%d,%.17g,%.17g,%.17g,%d,%.17g,nan,nan,%.17g,nan,%d"
                % (rid, 1234 + rid, n, s, v, s / 2, 1, 1.0, s / 3, 0)
            )
    csv_path = tmp_path / "runs.csv"
    csv_path.write_text("\n".join(rows) + "\n")
    summary = {
        "config": {"system": "doubling", "p": 0.618, "k": 2.0},
        "prediction": {"exponent": exponent, "regime": "GenericBoundedDensity"},
    }
    summary_path = tmp_path / "summary.json"
    summary_path.write_text(json.dumps(summary))
    return str(csv_path), str(summary_path)


def test_dotted_line_comes_from_summary(tmp_path):
    csv_path, summary_path = _write_inputs(tmp_path, exponent=2.0)
    spec = FigureSpec([csv_path], summary_path, str(tmp_path / "out.png"))
    fig = build_figure(spec)
    ax = fig.axes[0]
    dotted = [
        line for line in ax.get_lines()
        if line.get_linestyle() == ":" and np.allclose(line.get_ydata(), 2.0)
    ]
    assert dotted, "no dotted horizontal line at the predicted value"
    assert ax.get_xscale() == "log"
    assert "doubling" in ax.get_title() and "k=2" in ax.get_title()


def test_render_is_byte_identical_on_rerun(tmp_path):
    csv_path, summary_path = _write_inputs(tmp_path)
    a = render(FigureSpec([csv_path], summary_path, str(tmp_path / "a.png")))
    b = render(FigureSpec([csv_path], summary_path, str(tmp_path / "b.png")))
    assert open(a, "rb").read() == open(b, "rb").read()


def test_orbit_mode_draws_every_orbit(tmp_path):
    csv_path, summary_path = _write_inputs(tmp_path, n_orbits=5)
    spec = FigureSpec([csv_path], summary_path, str(tmp_path / "o.png"), mode="orbits")
    fig = build_figure(spec)
    solid = [l for l in fig.axes[0].get_lines() if l.get_linestyle() == "-"]
    assert len(solid) == 5


def test_missing_columns_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("run_id,n\n0,10\n")
    _, summary_path = _write_inputs(tmp_path)
    with pytest.raises(FigureError, match="missing columns"):
        load_series(str(bad))
    rc = figures.main(
        ["--summary", summary_path, "--csv", str(bad), "--out", str(tmp_path)]
    )
    assert rc != 0


def test_empty_csv_error(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text(COLUMNS + "\n")
    _, summary_path = _write_inputs(tmp_path)
    rc = figures.main(
        ["--summary", summary_path, "--csv", str(empty), "--out", str(tmp_path)]
    )
    assert rc != 0


def test_summary_without_prediction_errors(tmp_path):
    csv_path, _ = _write_inputs(tmp_path)
    bare = tmp_path / "bare.json"
    bare.write_text(json.dumps({"config": {}, "prediction": None}))
    rc = figures.main(["--summary", str(bare), "--csv", csv_path, "--out", str(tmp_path)])
    assert rc != 0


def test_cli_writes_named_image(tmp_path):
    csv_path, summary_path = _write_inputs(tmp_path)
    out_dir = tmp_path / "imgs"
    rc = figures.main(
        ["--summary", summary_path, "--csv", csv_path, "--out", str(out_dir)]
    )
    assert rc == 0
    assert (out_dir / "runs.png").exists()


def test_a13_end_to_end_with_primary_cli(tmp_path):
    """A13 smoke: a real doubling k=2 run through the birkhofflab CLI, then
    figures renders it with the dotted line at the summary's 2.0."""
    import shutil

    if shutil.which("birkhofflab") is None:
        pytest.skip("primary component CLI not installed")
    cfg = tmp_path / "a1.cfg"
    cfg.write_text(
        "system = doubling\np = 0.61803398874989485\nk = 2\nn_max = 5000\n"
        "ensemble_size = 4\nmaster_seed = 12345\ncsv = %s\nsummary = %s\n"
        % (tmp_path / "a1.csv", tmp_path / "a1.json")
    )
    subprocess.run(["birkhofflab", "run", "--config", str(cfg)], check=True)

    out_dir = tmp_path / "figs"
    rc = figures.main(
        ["--summary", str(tmp_path / "a1.json"), "--csv", str(tmp_path / "a1.csv"),
         "--out", str(out_dir)]
    )
    assert rc == 0
    first = (out_dir / "a1.png").read_bytes()

    spec = FigureSpec(
        [str(tmp_path / "a1.csv")], str(tmp_path / "a1.json"),
        str(out_dir / "again.png"),
    )
    fig = build_figure(spec)
    dotted = [
        line for line in fig.axes[0].get_lines()
        if line.get_linestyle() == ":" and np.allclose(line.get_ydata(), 2.0)
    ]
    assert dotted, "dotted line at 2.0 missing"
    render(spec)
    rc = figures.main(
        ["--summary", str(tmp_path / "a1.json"), "--csv", str(tmp_path / "a1.csv"),
         "--out", str(out_dir)]
    )
    assert rc == 0
    assert (out_dir / "a1.png").read_bytes() == first
