#!/usr/bin/env python3
"""
End-to-end tests of the command-line driver: exit codes, CSV/JSON output,
bit-stable reruns and the verification report.
"""

import csv
import io
import json
from argparse import Namespace
from pathlib import Path

import jsonschema
import pytest

from cli.main import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, TRACE_COLUMNS, main
from config.settings import Settings
from core.errors import ParameterDomainError
from core.output import OutputGenerator

SCHEMA_PATH = Path(__file__).parent / "src" / "data" / "output_schema.json"


def read_csv(text):
    """Parse toolkit CSV: '#' lines are metadata, the rest a headed table."""
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            meta[key] = value
        else:
            body.append(line)
    return meta, list(csv.DictReader(io.StringIO("\n".join(body))))


def test_eval_at_reference_state(capsys):
    assert main(["eval", "--m", "1", "--stretches", "1,1,1"]) == EXIT_OK
    meta, rows = read_csv(capsys.readouterr().out)
    assert meta["command"] == "eval"
    assert meta["M"] == "1.0"
    assert len(rows) == 1
    row = rows[0]
    assert float(row["t1"]) == 0.0 and float(row["t2"]) == 0.0 and float(row["t3"]) == 0.0
    assert float(row["energy"]) == pytest.approx(1.5)
    assert row["monotonicity"] == "StronglyMonotone"
    assert row["stable"] == "1"


@pytest.mark.parametrize("M", ["1", "2.5"])
def test_eval_reference_jacobian_determinant(M, capsys):
    """det DT(1, 1, 1) = 12 M."""
    assert main(["eval", "--m", M, "--stretches", "1,1,1", "--format", "json"]) == EXIT_OK
    record = json.loads(capsys.readouterr().out)["data"][0]
    assert record["det_DT"] == pytest.approx(12.0 * float(M), rel=1e-12)


def test_eval_derives_m_from_lame_pair(capsys):
    assert main(["eval", "--mu", "2", "--lambda", "2", "--stretches", "1,1,1"]) == EXIT_OK
    _, rows = read_csv(capsys.readouterr().out)
    assert float(rows[0]["M"]) == pytest.approx(5.0 / 3.0, rel=1e-15)


def test_eval_with_lame_parameters(capsys):
    assert main(["eval", "--mu", "2", "--lambda", "1", "--stretches", "1.2,1.0,0.9"]) == EXIT_OK
    meta, rows = read_csv(capsys.readouterr().out)
    row = rows[0]
    assert float(row["M"]) == pytest.approx(7.0 / 6.0)
    assert float(row["t1_scaled"]) == pytest.approx(2.0 * float(row["t1"]), rel=1e-15)
    assert float(row["energy_scaled"]) == pytest.approx(2.0 * float(row["energy"]), rel=1e-15)
    assert meta["mu"] == "2.0"


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "--m", "0.5", "--stretches", "1,1,1"],
        ["eval", "--m", "1", "--mu", "1", "--lambda", "1", "--stretches", "1,1,1"],
        ["eval", "--mu", "1", "--stretches", "1,1,1"],
        ["eval", "--m", "1", "--stretches=1,-1,1"],
        ["eval", "--m", "1", "--stretches", "1,2"],
        ["eval", "--m", "1", "--tol", "-1", "--stretches", "1,1,1"],
        ["regions", "--m", "1", "--box", "2,1"],
        ["regions", "--m", "1", "--res", "1"],
        ["trace", "--m", "1", "--alpha-min", "2", "--alpha-max", "1"],
        ["bifurcate"],
        ["verify", "--m", "0.6"],
    ],
)
def test_usage_errors_exit_with_two(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert capsys.readouterr().err


def test_bifurcate_json(tmp_path):
    out = tmp_path / "bifurcation.json"
    assert main(["bifurcate", "--m", "1", "--format", "json", "--out", str(out)]) == EXIT_OK
    document = json.loads(out.read_text())
    assert document["meta"]["command"] == "bifurcate"
    record = document["data"][0]
    assert record["alpha_star"] == pytest.approx(3.4062130731, abs=1e-9)
    assert record["alpha_flat"] == pytest.approx(3.0967195759, abs=1e-9)


def test_trace_output_is_bit_stable(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["trace", "--m", "1", "--alpha-min", "2.8", "--alpha-max", "3.6", "--step", "0.2"]
    assert main(argv + ["--out", str(first)]) == EXIT_OK
    assert main(argv + ["--out", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()

    meta, rows = read_csv(first.read_text())
    assert list(rows[0]) == TRACE_COLUMNS
    assert meta["alpha_min"] == "2.8"
    loads = sorted({float(row["alpha"]) for row in rows})
    assert loads == [2.8, 3.0, 3.2, 3.4, 3.6]
    below_onset = [row["branch"] for row in rows if float(row["alpha"]) < 3.0967]
    assert below_onset == ["radial", "radial"]


def test_trace_full_load_range(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["trace", "--m", "1", "--alpha-min", "0", "--alpha-max", "5", "--step", "0.1", "--out", str(out)]) == EXIT_OK
    _, rows = read_csv(out.read_text())
    assert sum(row["branch"] == "radial" for row in rows) == 51
    nonradial = [row for row in rows if row["branch"] != "radial"]
    assert min(float(row["alpha"]) for row in nonradial) == 3.1
    assert all(float(row["residual"]) <= 1e-9 for row in rows)


def test_trace_in_compression_is_radial_only(capsys):
    assert main(["trace", "--m", "1", "--alpha-min", "-2", "--alpha-max", "0", "--step", "0.5"]) == EXIT_OK
    _, rows = read_csv(capsys.readouterr().out)
    assert len(rows) == 5
    assert {row["branch"] for row in rows} == {"radial"}


def test_trace_json_carries_internal_energy(tmp_path):
    out = tmp_path / "trace.json"
    assert main(["trace", "--m", "1", "--alpha-min", "3.2", "--alpha-max", "3.3", "--step", "0.1",
                 "--format", "json", "--out", str(out)]) == EXIT_OK
    records = json.loads(out.read_text())["data"]
    assert {record["branch"] for record in records} == {"radial", "nonradial_a", "nonradial_b"}
    assert all("internal_energy" in record for record in records)


def test_regions_diagonal_crosses_at_lambda_star(capsys):
    assert main(["regions", "--m", "1", "--box", "0.5,3.0", "--res", "11"]) == EXIT_OK
    meta, rows = read_csv(capsys.readouterr().out)
    assert meta["slice"] == "two-equal"
    assert len(rows) == 121
    diagonal = [row for row in rows if row["l1"] == row["l3"]]
    assert len(diagonal) == 11
    for row in diagonal:
        assert row["inside"] == ("1" if float(row["l1"]) < 1.7031065366 else "0")


def test_regions_three_dimensional(capsys):
    assert main(["regions", "--m", "2", "--box3", "0.5,1.5", "--res", "3", "--mode", "JacobianSign"]) == EXIT_OK
    meta, rows = read_csv(capsys.readouterr().out)
    assert meta["slice"] == "3d"
    assert len(rows) == 27
    assert all(row["inside"] == ("1" if float(row["det_DT"]) > 0 else "0") for row in rows)


def test_verify_quick_writes_reports(tmp_path, capsys):
    out = tmp_path / "verify.json"
    html = tmp_path / "verify.html"
    code = main(["verify", "--m", "1", "--quick", "--out", str(out), "--html", str(html)])
    printed = capsys.readouterr().out
    assert code == EXIT_OK
    assert "FAIL" not in printed
    document = json.loads(out.read_text())
    assert document["meta"]["passed"] is True
    assert all(check["passed"] for check in document["data"])
    assert "Verification report" in html.read_text()


def test_output_schema_lists_every_command():
    schema = json.loads(SCHEMA_PATH.read_text())
    assert set(schema["definitions"]) >= {"eval", "bifurcate", "trace", "regions", "verify"}
    assert schema["required"] == ["meta", "data"]


def test_highlight_failures_marks_failed_rows():
    generator = OutputGenerator(Settings())
    checks = [
        {"name": "ok.check", "passed": True, "worst": 0.0, "threshold": 1e-9, "detail": ""},
        {"name": "bad.check", "passed": False, "worst": 2.0, "threshold": 0.0, "detail": "two failures"},
    ]
    html = generator.highlight_failures(generator.generate_html_report(checks, "Verification report"))
    assert html.count('class="failed"') == 1
    assert "<mark>FAIL</mark>" in html


def test_csv_cells():
    generator = OutputGenerator(Settings())
    text = generator.write_csv(
        [{"a": True, "b": 0.1, "c": float("nan")}], ["a", "b", "c"], {"box": [0.5, 3.0]}, path=None
    )
    assert text == "# box=0.5,3.0\na,b,c\n1,0.1,nan\n"


def test_resolve_run_config():
    settings = Settings()
    config = settings.resolve_run_config(Namespace(m=2.0, mu=None, lam=None, tol=None, seed=None, out=None, format=None))
    assert config.M == 2.0
    assert config.tol == settings.classification_tol
    assert config.fmt == "csv" and config.seed == 42
    assert not config.scaled
    with pytest.raises(ParameterDomainError):
        settings.resolve_run_config(Namespace(m=None, mu=1.0, lam=None))


def test_numerical_exit_code_constant():
    assert EXIT_NUMERICAL == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "--m", "1", "--stretches", "1.2,0.9,1.1"],
        ["eval", "--mu", "2", "--lambda", "1", "--stretches", "0.5,2,1"],
        ["bifurcate", "--m", "2"],
        ["bifurcate", "--mu", "3", "--lambda", "1"],
        ["trace", "--m", "1", "--alpha-min", "3", "--alpha-max", "3.4", "--step", "0.2"],
        ["trace", "--mu", "2", "--lambda", "1", "--alpha-min", "3.2", "--alpha-max", "3.25", "--step", "0.1"],
        ["regions", "--m", "1", "--box", "0.5,3.0", "--res", "4"],
        ["regions", "--m", "10", "--box3", "0.8,1.2", "--res", "2", "--mode", "Stability"],
        ["verify", "--m", "1", "--quick"],
    ],
)
def test_json_output_validates_against_schema(argv, tmp_path):
    schema = json.loads(SCHEMA_PATH.read_text())
    out = tmp_path / "out.json"
    assert main(argv + ["--format", "json", "--out", str(out)]) == EXIT_OK
    document = json.loads(out.read_text())
    jsonschema.validate(instance=document, schema=schema)
    assert document["meta"]["command"] == argv[0]


def test_schema_rejects_records_of_another_command(tmp_path):
    schema = json.loads(SCHEMA_PATH.read_text())
    out = tmp_path / "bifurcation.json"
    assert main(["bifurcate", "--m", "1", "--format", "json", "--out", str(out)]) == EXIT_OK
    document = json.loads(out.read_text())
    document["meta"]["command"] = "trace"
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(instance=document, schema=schema)
    document["meta"]["command"] = "bifurcate"
    document["data"][0]["monotonicity"] = "StronglyMonotone"
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(instance=document, schema=schema)


def test_bifurcate_rescales_loads_by_mu(capsys):
    assert main(["bifurcate", "--mu", "2", "--lambda", "1", "--format", "json"]) == EXIT_OK
    record = json.loads(capsys.readouterr().out)["data"][0]
    assert record["M"] == pytest.approx(7.0 / 6.0)
    assert record["mu"] == 2.0
    assert record["alpha_star_scaled"] == pytest.approx(2.0 * record["alpha_star"], rel=1e-15)
    assert record["alpha_flat_scaled"] == pytest.approx(2.0 * record["alpha_flat"], rel=1e-15)


def test_bifurcate_without_mu_has_no_scaled_columns(capsys):
    assert main(["bifurcate", "--m", "1"]) == EXIT_OK
    _, rows = read_csv(capsys.readouterr().out)
    assert "alpha_star_scaled" not in rows[0]


def test_trace_json_rescales_loads_and_energies_by_mu(capsys):
    argv = ["trace", "--mu", "3", "--lambda", "1", "--alpha-min", "3.2", "--alpha-max", "3.25", "--step", "0.1", "--format", "json"]
    assert main(argv) == EXIT_OK
    records = json.loads(capsys.readouterr().out)["data"]
    assert len(records) == 3
    for record in records:
        assert record["alpha_scaled"] == pytest.approx(3.0 * record["alpha"], rel=1e-15)
        assert record["total_energy_scaled"] == pytest.approx(3.0 * record["total_energy"], rel=1e-15)
        assert record["internal_energy_scaled"] == pytest.approx(3.0 * record["internal_energy"], rel=1e-15)


def test_trace_csv_keeps_fixed_columns_with_mu(capsys):
    argv = ["trace", "--mu", "3", "--lambda", "1", "--alpha-min", "3.2", "--alpha-max", "3.25", "--step", "0.1"]
    assert main(argv) == EXIT_OK
    _, rows = read_csv(capsys.readouterr().out)
    assert list(rows[0]) == TRACE_COLUMNS


def test_verbose_displays_settings_on_stderr(capsys):
    assert main(["eval", "--m", "1", "--stretches", "1,1,1", "--verbose"]) == EXIT_OK
    captured = capsys.readouterr()
    assert "--- Current Settings ---" in captured.err
    assert "Newton: tol=1e-10, max_iter=100" in captured.err
    assert "Current Settings" not in captured.out


def test_output_files_create_missing_directories(tmp_path):
    out = tmp_path / "runs" / "m1" / "eval.csv"
    html = tmp_path / "reports" / "verify.html"
    assert main(["eval", "--m", "1", "--stretches", "1,1,1", "--out", str(out)]) == EXIT_OK
    assert out.read_text().startswith("# command=eval\n")
    assert main(["verify", "--m", "1", "--quick", "--html", str(html)]) == EXIT_OK
    assert "<html>" in html.read_text()
