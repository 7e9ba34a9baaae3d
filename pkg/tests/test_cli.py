import csv
import datetime as dt
import io
import json
import subprocess
import sys

import pytest

from firsir.cli import main
from firsir.evaluation import format_error

from conftest import START


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def base_args(csv_path, *extra):
    return ["--input", csv_path, "--population", "1e7", "--convention", "derived_active",
            "--start-date", "2020-08-01", *extra]


class TestForecast:
    def test_modified_document(self, synthetic_csv, tmp_path):
        out = tmp_path / "r.json"
        code, stdout, _ = run(base_args(synthetic_csv, "--out", out))
        assert code == 0 and stdout == ""
        doc = json.loads(out.read_text())
        assert doc["format"] == "firsir.forecast/1"
        assert doc["config"]["convention"] == "derived_active"
        assert doc["config"]["fir"]["modified"] == {"J": 11, "K": 11, "alpha1": 1e-3, "alpha2": 1e-4, "T": 45, "W": 7}
        [res] = doc["results"]
        assert len(res["rates"]["beta"]) == 44
        assert len(res["forecast"]["I_hat"]) == 7
        assert res["forecast"]["dates"][0] == "2020-09-15"
        assert len(doc["observed"]["I"]) == 52
        assert res["errors"]["err_I_display"] == format_error(res["errors"]["err_I"])

    def test_stdout_when_no_out(self, synthetic_csv):
        code, stdout, _ = run(base_args(synthetic_csv))
        assert code == 0
        assert json.loads(stdout)["results"][0]["method"] == "modified"

    def test_both_methods(self, synthetic_csv):
        code, stdout, _ = run(base_args(synthetic_csv, "--method", "both", "--order-j", "5"))
        doc = json.loads(stdout)
        assert [r["method"] for r in doc["results"]] == ["original", "modified"]
        assert doc["config"]["fir"]["original"]["J"] == 3
        assert doc["config"]["fir"]["original"]["alpha1"] == 0.03
        assert doc["config"]["fir"]["modified"]["J"] == 5

    def test_explicit_parameters(self, synthetic_csv):
        argv = base_args(synthetic_csv, "--method", "original", "--order-j", "4", "--alpha2", "0.5")
        doc = json.loads(run(argv)[1])
        assert doc["results"][0]["fir"] == {"J": 4, "K": 3, "alpha1": 0.03, "alpha2": 0.5, "T": 45, "W": 7}

    def test_plot_table(self, synthetic_csv, tmp_path):
        plot = tmp_path / "p.csv"
        assert run(base_args(synthetic_csv, "--method", "both", "--plot-out", plot))[0] == 0
        rows = list(csv.reader(plot.open()))
        assert rows[0] == ["day", "date", "I", "R", "I_hat_original", "R_hat_original",
                           "I_hat_modified", "R_hat_modified"]
        assert len(rows) == 53
        assert rows[45][4:] == ["", "", "", ""]
        assert all(cell != "" for cell in rows[46][4:])
        assert rows[1][:2] == ["0", "2020-08-01"]

    def test_deterministic_bytes(self, synthetic_csv, tmp_path):
        paths = []
        for k in range(2):
            out, plot = tmp_path / f"r{k}.json", tmp_path / f"p{k}.csv"
            assert run(base_args(synthetic_csv, "--method", "both", "--out", out, "--plot-out", plot))[0] == 0
            paths.append((out.read_bytes(), plot.read_bytes()))
        assert paths[0] == paths[1]

    def test_default_start_date_is_first_day(self, synthetic_csv):
        argv = ["--input", synthetic_csv, "--population", "1e7", "--convention", "derived_active"]
        doc = json.loads(run(argv)[1])
        assert doc["config"]["start_date"] == START.isoformat()


class TestSweep:
    def test_full_grid(self, synthetic_csv, tmp_path):
        out = tmp_path / "s.json"
        code, stdout, _ = run(base_args(synthetic_csv, "--sweep", "--out", out))
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["format"] == "firsir.sweep/1"
        assert len(doc["rows"]) == 72
        assert [r["best"] for r in doc["rows"]].count(True) == 1 and doc["rows"][0]["best"]
        assert stdout.count("\n") == 73
        assert stdout.splitlines()[1].endswith(" *")

    def test_single_cell_matches_forecast(self, synthetic_csv):
        sweep = base_args(synthetic_csv, "--sweep", "--grid-orders", "auto", "--grid-alphas", "1e-3")
        _, stdout, _ = run(sweep)
        sweep_doc = json.loads(stdout[stdout.index("{"):])
        forecast = json.loads(run(base_args(synthetic_csv, "--alpha2", "1e-3"))[1])
        assert sweep_doc["rows"][0]["err_I"] == forecast["results"][0]["errors"]["err_I"]
        assert sweep_doc["rows"][0]["err_R"] == forecast["results"][0]["errors"]["err_R"]


class TestErrors:
    def test_unreadable_input(self, tmp_path):
        out, plot = tmp_path / "r.json", tmp_path / "p.csv"
        code, _, err = run(base_args(tmp_path / "missing.csv", "--out", out, "--plot-out", plot))
        assert code == 1
        assert json.loads(err)["error"]["exit_code"] == 1
        assert not out.exists() and not plot.exists()
        assert list(tmp_path.iterdir()) == []

    def test_usage_error(self):
        code, _, err = run(["--population", "1"])
        assert code == 1
        assert json.loads(err)["error"]["type"] == "UsageError"

    def test_bad_convention(self, synthetic_csv):
        code, _, _ = run(["--input", synthetic_csv, "--population", "1e7", "--convention", "cumulative"])
        assert code == 1

    def test_invalid_order(self, synthetic_csv):
        assert run(base_args(synthetic_csv, "--order-j", "43"))[0] == 1

    def test_numerical_failure(self, tmp_path):
        lines = ["date,confirmed,recovered,deaths"]
        for k in range(52):
            day = START + dt.timedelta(days=k)
            confirmed = 30 if k == 10 else 100 + k
            lines.append(f"{day},{confirmed},{20 if k == 10 else 10},{10 if k == 10 else 0}")
        path = tmp_path / "zero.csv"
        path.write_text("\n".join(lines) + "\n")
        out = tmp_path / "r.json"
        code, _, err = run(["--input", path, "--population", "1e5", "--convention", "derived_active", "--out", out])
        assert code == 2
        assert json.loads(err)["error"]["type"] == "ZeroInfectedError"
        assert not out.exists()

    def test_population_must_be_positive(self, synthetic_csv):
        argv = base_args(synthetic_csv)
        argv[argv.index("--population") + 1] = "0"
        assert run(argv)[0] == 1


def test_module_entry_point(synthetic_csv):
    proc = subprocess.run([sys.executable, "-m", "firsir", *map(str, base_args(synthetic_csv))],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["format"] == "firsir.forecast/1"


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "0.1.0" in capsys.readouterr().out
