import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))
from render import SchemaError, load_rows, main, render

SPECTRUM_HEADER = "lambda_over_omega,delta_over_omega,representation,M_or_N,nu,energy,abs_dev_vs_ref"
SWEEP_HEADER = ("lambda_over_omega,delta_over_omega,representation,M_or_N,M_P,L,"
                "gamma_x,gamma_y,gamma_z,observable,value,wall_time_ms")


@pytest.fixture
def spectrum_csv(tmp_path):
    # shape of an energy-vs-coupling export in `both` mode with deviations
    rows = [SPECTRUM_HEADER]
    for lam in (0.0, 1.25, 2.5):
        for nu, energy in enumerate((-1.0 + lam, 1.0 + lam)):
            rows.append(f"{lam},0.5,bare,60,{nu},{energy},NaN")
            rows.append(f"{lam},0.5,cdh,4,{nu},{energy + 1e-3},{1e-3 * (nu + 1)}")
    path = tmp_path / "spectrum.csv"
    path.write_text("\n".join(rows) + "\n")
    return path


@pytest.fixture
def sweep_csv(tmp_path):
    # shape of a phase-diagram sweep export
    rows = [SWEEP_HEADER]
    for lam in (0.0, 0.5, 1.0):
        for delta in (0.1, 0.3, 0.5):
            value = -1.0 + lam * delta
            rows.append(f"{lam},{delta},cdh,3,20,8,0.25,0.25,0,mz,{value},0")
    path = tmp_path / "sweep.csv"
    path.write_text("\n".join(rows) + "\n")
    return path


def test_lines_renders(spectrum_csv, tmp_path):
    out = tmp_path / "lines.png"
    result = render({"kind": "lines", "input": str(spectrum_csv), "output": str(out)})
    assert Path(result) == out and out.stat().st_size > 0


def test_log_error_renders(spectrum_csv, tmp_path):
    out = tmp_path / "err.png"
    render({"kind": "log_error", "input": str(spectrum_csv), "output": str(out),
            "representation": "cdh"})
    assert out.stat().st_size > 0


def test_heatmap_renders(sweep_csv, tmp_path):
    out = tmp_path / "heat.png"
    render({"kind": "heatmap", "input": str(sweep_csv), "output": str(out), "observable": "mz"})
    assert out.stat().st_size > 0


def test_cuts_renders(sweep_csv, tmp_path):
    out = tmp_path / "cuts.png"
    render({"kind": "cuts", "input": str(sweep_csv), "output": str(out), "observable": "mz"})
    assert out.stat().st_size > 0


def test_missing_column_is_named(tmp_path):
    path = tmp_path / "broken.csv"
    path.write_text("lambda_over_omega,delta_over_omega,value\n0,0,1\n")
    with pytest.raises(SchemaError, match="observable"):
        load_rows(str(path), ("lambda_over_omega", "observable", "value"))


def test_heatmap_refuses_schema_violation(spectrum_csv, tmp_path):
    with pytest.raises(SchemaError, match="observable"):
        render({"kind": "heatmap", "input": str(spectrum_csv), "output": str(tmp_path / "x.png")})


def test_header_only_file_is_rejected(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text(SWEEP_HEADER + "\n")
    with pytest.raises(SchemaError, match="no rows"):
        render({"kind": "heatmap", "input": str(path), "output": str(tmp_path / "x.png")})


def test_unknown_kind_rejected(sweep_csv, tmp_path):
    with pytest.raises(SchemaError, match="unknown figure kind"):
        render({"kind": "scatter3d", "input": str(sweep_csv), "output": str(tmp_path / "x.png")})


def test_cli_roundtrip(sweep_csv, tmp_path, capsys):
    spec = {"kind": "heatmap", "input": str(sweep_csv), "output": str(tmp_path / "cli.png"),
            "observable": "mz", "title": "order parameter"}
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    assert main(["--spec", str(spec_path)]) == 0
    assert (tmp_path / "cli.png").stat().st_size > 0


def test_cli_reports_schema_error(spectrum_csv, tmp_path, capsys):
    spec = {"kind": "heatmap", "input": str(spectrum_csv), "output": str(tmp_path / "x.png")}
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    assert main(["--spec", str(spec_path)]) == 1
    assert "missing required column" in capsys.readouterr().err
