"""Tests for the JSON report, SVG figures and the command-line driver."""

import csv
import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from qc_horizon.cli import SEED_ENV, run_command
from qc_horizon.dataset import design_matrices
from qc_horizon.errors import MissingInputError
from qc_horizon.figures import FIGURE_KINDS, render_figure
from qc_horizon.frontier import fit_multivariate
from qc_horizon.glq import DEFAULT_QEC
from qc_horizon.report import (
    SCHEMA_VERSION,
    build_report,
    forecast_section,
    render_report,
)
from qc_horizon.trends import (
    ForecastConfig,
    bootstrap_forecast,
    bootstrap_trend_fits,
    extract_records,
    fit_loglinear,
)

BAD_ROWS_CSV = """id,date,physical_qubits,gate_error_rate,technology,source
r1,2015-03,9,0.005,superconducting,
r2,not-a-date,5,0.01,superconducting,
r3,2017,50,0.0025,superconducting,
r4,2018,0,0.01,spin,
"""


def figure_inputs(tiny_dataset):
    X, Y = design_matrices(tiny_dataset)
    fit = fit_multivariate(X, Y)
    config = ForecastConfig(resamples=60, seed=1)
    forecast = bootstrap_forecast(tiny_dataset, config)
    qubit_points = [(r.fractional_year, float(r.physical_qubits))
                    for r in tiny_dataset]
    error_points = [(r.fractional_year, r.gate_error_rate)
                    for r in tiny_dataset]
    fit_q = fit_loglinear(extract_records(qubit_points, "max"))
    fit_e = fit_loglinear(extract_records(error_points, "min"))
    return {
        "glq-contour": {},
        "history-qubits": {"dataset": tiny_dataset},
        "history-error": {"dataset": tiny_dataset},
        "history-glq": {"dataset": tiny_dataset},
        "frontier-ellipses": {"fit": fit, "dataset": tiny_dataset},
        "forecast-trajectories": {"forecast": forecast,
                                  "dataset": tiny_dataset},
        "metric-trend-qubits": {"dataset": tiny_dataset, "fit": fit_q},
        "metric-trend-error": {"dataset": tiny_dataset, "fit": fit_e},
        "gaussian-band": {"fit_qubits": fit_q, "fit_error": fit_e,
                          "window": (2010.0, 2050.0)},
    }


class TestFigures:
    def test_every_kind_renders_well_formed_svg(self, tiny_dataset):
        inputs = figure_inputs(tiny_dataset)
        assert set(inputs) == set(FIGURE_KINDS)
        for kind in FIGURE_KINDS:
            text = render_figure(kind, **inputs[kind])
            root = ET.fromstring(text)
            assert root.tag.endswith("svg")

    def test_missing_input_raises(self):
        with pytest.raises(MissingInputError):
            render_figure("frontier-ellipses")
        with pytest.raises(MissingInputError):
            render_figure("history-qubits")

    def test_unknown_kind_raises(self):
        with pytest.raises(MissingInputError):
            render_figure("pie-chart")

    def test_rendering_is_deterministic(self, tiny_dataset):
        inputs = figure_inputs(tiny_dataset)
        for kind in FIGURE_KINDS:
            assert render_figure(kind, **inputs[kind]) \
                == render_figure(kind, **inputs[kind])


class TestReport:
    def test_document_structure(self, tiny_dataset):
        doc = build_report(tiny_dataset, DEFAULT_QEC, {"command": "x"},
                           {"dummy": {}}, warnings=["b", "a"])
        assert doc["schema"] == SCHEMA_VERSION
        assert doc["warnings"] == ["a", "b"]
        assert doc["dataset"]["counts"]["total"] == 6
        text = render_report(doc)
        assert text.endswith("\n")
        assert json.loads(text) == json.loads(render_report(doc))

    def test_censored_quantiles_rendered_as_not_reached(self, tiny_dataset):
        config = ForecastConfig(resamples=60, seed=1, thresholds=(1e9,),
                                horizon_end=2030.0)
        forecast = bootstrap_forecast(tiny_dataset, config)
        section = forecast_section(forecast)
        cell = section["thresholds"]["1e+09"]["crossing_quantiles"]["0.5"]
        assert cell == {"value": "inf", "display": "not reached"}
        # "inf" serializes even under allow_nan=False
        render_report(build_report(tiny_dataset, DEFAULT_QEC, {},
                                   {"forecast": section}))


class TestCliExitCodes:
    def test_usage_error_is_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            run_command(["not-a-command"])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            run_command([])
        assert exc.value.code == 2

    def test_missing_dataset_file_is_exit_1(self, tmp_path, capsys):
        code = run_command(["metrics", "--dataset", str(tmp_path / "nope.csv"),
                            "--out", str(tmp_path / "out")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_invalid_quantiles_is_exit_1(self, tmp_path, capsys):
        code = run_command(["forecast", "--resamples", "50",
                            "--quantiles", "0.9,0.1",
                            "--out", str(tmp_path / "out")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_strict_ingest_fails_on_bad_row(self, tmp_path, capsys):
        data = tmp_path / "data.csv"
        data.write_text(BAD_ROWS_CSV)
        code = run_command(["ingest", "--dataset", str(data), "--strict",
                            "--out", str(tmp_path / "out")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_frontier_refuses_underdetermined_fit(self, tmp_path, capsys):
        data = tmp_path / "data.csv"
        data.write_text(
            "id,date,physical_qubits,gate_error_rate,technology,source\n"
            "r1,2015,9,0.005,superconducting,\n"
            "r2,2017,50,0.0025,superconducting,\n"
        )
        code = run_command(["frontier", "--dataset", str(data), "--min-n", "3",
                            "--out", str(tmp_path / "out")])
        assert code == 1
        assert "insufficient data" in capsys.readouterr().err


class TestCliCommands:
    def _report(self, out_dir):
        return json.loads((Path(out_dir) / "report.v1.json").read_text())

    def test_ingest_writes_normalized_and_rejects(self, tmp_path):
        data = tmp_path / "data.csv"
        data.write_text(BAD_ROWS_CSV)
        out = tmp_path / "out"
        assert run_command(["ingest", "--dataset", str(data),
                            "--out", str(out)]) == 0
        rejects = list(csv.DictReader((out / "rejects.csv").open()))
        assert len(rejects) == 2
        assert {r["row"] for r in rejects} == {"3", "5"}
        normalized = (out / "normalized.csv").read_text()
        assert normalized.count("\n") == 3  # header + two accepted rows
        report = self._report(out)
        assert report["results"]["ingest"] == {"accepted": 2, "rejected": 2}
        assert any("rejected" in w for w in report["warnings"])

    def test_metrics_scores_each_record(self, tmp_path):
        out = tmp_path / "out"
        assert run_command(["metrics", "--tech", "superconducting",
                            "--out", str(out)]) == 0
        rows = list(csv.DictReader((out / "metrics.csv").open()))
        assert all(r["glq_defined"] in ("", "True", "False") for r in rows)
        defined = [r for r in rows if r["glq_defined"] == "True"]
        assert defined and all(float(r["glq"]) > 0 for r in defined)

    def test_frontier_report_and_figure(self, tmp_path):
        out = tmp_path / "out"
        assert run_command(["frontier", "--resamples", "120", "--seed", "5",
                            "--out", str(out)]) == 0
        section = self._report(out)["results"]["frontier"]
        assert section["n"] == 40
        assert section["covariance_bootstrap"]["resamples"] == 120
        ET.parse(out / "frontier-ellipses.svg")

    def test_forecast_outputs(self, tmp_path):
        out = tmp_path / "out"
        assert run_command(["forecast", "--resamples", "60", "--seed", "5",
                            "--tech", "superconducting",
                            "--from", "2007", "--to", "2020",
                            "--threshold", "1", "--threshold", "4100",
                            "--out", str(out)]) == 0
        section = self._report(out)["results"]["forecast"]
        assert set(section["thresholds"]) == {"1", "4100"}
        median = section["thresholds"]["1"]["crossing_quantiles"]["0.5"]
        assert 2020.0 < median["value"] < 2100.0
        for name in ("trajectories-1.svg", "trajectories-4100.svg",
                     "metric-trend-qubits.svg", "metric-trend-error.svg"):
            ET.parse(out / name)

    def test_validate_outputs(self, tmp_path):
        out = tmp_path / "out"
        assert run_command(["validate", "--resamples", "60", "--seed", "5",
                            "--tech", "superconducting",
                            "--from", "2007", "--to", "2020",
                            "--train-ends", "2015,2018",
                            "--targets", "2016,2019",
                            "--out", str(out)]) == 0
        lines = (out / "validation.csv").read_text().splitlines()
        assert lines[0] == "train_window,2019,2016,actual_row"
        assert lines[1].startswith("actual_maximum,")
        body = "\n".join(lines[2:])
        assert "N/A" in body  # 2018 -> 2016 is not applicable
        assert "[green]" in body or "[red]" in body
        section = self._report(out)["results"]["validation"]
        assert len(section["cells"]) == 4

    def test_report_command_emits_everything(self, tmp_path):
        out = tmp_path / "out"
        assert run_command(["report", "--resamples", "120", "--seed", "5",
                            "--out", str(out)]) == 0
        report = self._report(out)
        assert set(report["results"]) == {"frontier", "forecast"}
        for name in ("frontier-ellipses.svg", "glq-contour.svg",
                     "trajectories-1.svg", "trajectories-4100.svg"):
            ET.parse(out / name)

    def test_plot_every_kind(self, tmp_path):
        for kind in FIGURE_KINDS:
            out = tmp_path / kind
            argv = ["plot", "--figure", kind, "--resamples", "50",
                    "--seed", "5", "--out", str(out)]
            if kind == "forecast-trajectories":
                argv += ["--tech", "superconducting"]
            assert run_command(argv) == 0
            ET.parse(out / f"{kind}.svg")

    def test_seed_env_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "17")
        out = tmp_path / "out"
        assert run_command(["forecast", "--resamples", "50",
                            "--out", str(out)]) == 0
        assert self._report(out)["config"]["seed"] == 17
        # explicit flag wins over the environment
        out2 = tmp_path / "out2"
        assert run_command(["forecast", "--resamples", "50", "--seed", "3",
                            "--out", str(out2)]) == 0
        assert self._report(out2)["config"]["seed"] == 3

    def test_custom_qec_parameters_flow_through(self, tmp_path):
        out = tmp_path / "out"
        assert run_command(["metrics", "--p-th", "0.005",
                            "--out", str(out)]) == 0
        report = self._report(out)
        assert report["config"]["p_th"] == 0.005
        # a stricter threshold leaves fewer records with a defined GLQ
        assert report["results"]["metrics"]["counts"]["glq_defined"] < 19
