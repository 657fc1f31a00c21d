import csv
import json

import numpy as np
import pytest

from ctlasso import Termination, coefficients_at
from ctlasso.cli import main, path_from_json

from conftest import random_design


@pytest.fixture
def data_csv(tmp_path, rng):
    x = rng.standard_normal((30, 3))
    y = 2.0 * x[:, 0] - 1.0 * x[:, 2] + 0.05 * rng.standard_normal(30)
    path = tmp_path / "data.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "b", "c", "resp"])
        for i in range(30):
            w.writerow([*x[i], y[i]])
    return path


@pytest.fixture
def p1_csv(tmp_path, rng):
    x = rng.normal(10.0, 4.0, 50)
    y = 3.0 * x + 1.0 + 0.001 * rng.standard_normal(50)
    path = tmp_path / "line.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y"])
        for xi, yi in zip(x, y):
            w.writerow([xi, yi])
    return path


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


class TestFit:
    def test_near_exact_slope_recovery(self, p1_csv, tmp_path):
        out = tmp_path / "fit.json"
        rc = main([
            "fit", str(p1_csv), "--response", "y", "--lambda", "0",
            "--out", str(out),
        ])
        assert rc == 0
        payload = read_json(out)
        assert payload["coefficients"][0] == pytest.approx(3.0, abs=1e-3)
        assert payload["intercept"] == pytest.approx(1.0, abs=0.05)

    def test_missing_response_exit_2(self, data_csv, capsys):
        rc = main(["fit", str(data_csv), "--response", "nope", "--lambda", "0.1"])
        assert rc == 2
        err = capsys.readouterr().err
        assert err.startswith("error:") and err.count("\n") == 1

    def test_non_numeric_cell_exit_2(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("a,resp\n1.0,2.0\nfoo,3.0\n")
        rc = main(["fit", str(path), "--response", "resp", "--lambda", "0.1"])
        assert rc == 2
        assert "'a'" in capsys.readouterr().err

    def test_lambda_above_max_gives_intercept_only(self, data_csv, tmp_path):
        out = tmp_path / "fit.json"
        rc = main([
            "fit", str(data_csv), "--response", "resp", "--lambda", "1000",
            "--out", str(out),
        ])
        assert rc == 0
        payload = read_json(out)
        assert all(c == 0.0 for c in payload["coefficients"])
        # with all-zero coefficients the intercept is the response mean
        with open(data_csv) as fh:
            rows = list(csv.DictReader(fh))
        ybar = np.mean([float(r["resp"]) for r in rows])
        assert payload["intercept"] == pytest.approx(ybar)

    def test_cv_fit_when_no_lambda(self, data_csv, tmp_path):
        out = tmp_path / "fit.json"
        rc = main(["fit", str(data_csv), "--response", "resp", "--out", str(out)])
        assert rc == 0
        payload = read_json(out)
        assert payload["tuning"]["source"] == "cv"


class TestPath:
    def test_p1_two_rows_csv(self, p1_csv, tmp_path):
        out = tmp_path / "path.csv"
        rc = main([
            "path", str(p1_csv), "--response", "y", "--format", "csv",
            "--out", str(out),
        ])
        assert rc == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0].startswith("#")
        assert lines[1] == "lambda,x"
        assert len(lines) == 4  # header comment + column row + two knots

    def test_json_roundtrip_bit_for_bit(self, data_csv, tmp_path):
        out = tmp_path / "path.json"
        rc = main([
            "path", str(data_csv), "--response", "resp", "--method", "ct-soft",
            "--nu", "0.2", "--out", str(out),
        ])
        assert rc == 0
        reloaded = path_from_json(read_json(out))
        for lam in np.geomspace(reloaded.lambda_max, reloaded.lambda_min, 13):
            a = coefficients_at(reloaded, lam)
            b = coefficients_at(reloaded, lam)
            np.testing.assert_array_equal(a, b)
        assert reloaded.termination in list(Termination)

    def test_csv_17_digit_roundtrip(self, data_csv, tmp_path):
        out = tmp_path / "path.csv"
        main([
            "path", str(data_csv), "--response", "resp", "--format", "csv",
            "--out", str(out),
        ])
        jout = tmp_path / "path.json"
        main(["path", str(data_csv), "--response", "resp", "--out", str(jout)])
        exact = path_from_json(read_json(jout))
        lines = out.read_text().strip().split("\n")[2:]
        for line, bp in zip(lines, exact.breakpoints):
            vals = [float(v) for v in line.split(",")]
            assert vals[0] == bp.lam
            np.testing.assert_array_equal(np.array(vals[1:]), bp.beta)

    def test_eigenvalue_stop_reported(self, tmp_path):
        rng = np.random.default_rng(2)
        pop = np.array([[1.0, 0.85, 0.5], [0.85, 1.0, 0.85], [0.5, 0.85, 1.0]])
        x = rng.standard_normal((400, 3)) @ np.linalg.cholesky(pop).T
        y = x @ np.ones(3) + 0.5 * rng.standard_normal(400)
        path = tmp_path / "tri.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["a", "b", "c", "resp"])
            for i in range(400):
                w.writerow([*x[i], y[i]])
        out = tmp_path / "path.json"
        rc = main([
            "path", str(path), "--response", "resp", "--method", "ct-hard",
            "--nu", "0.6", "--out", str(out),
        ])
        assert rc == 0
        assert read_json(out)["termination"] == "EigenvalueStop"


class TestCv:
    def test_selection_payload(self, data_csv, tmp_path):
        out = tmp_path / "cv.json"
        rc = main([
            "cv", str(data_csv), "--response", "resp", "--method", "ct-soft",
            "--out", str(out),
        ])
        assert rc == 0
        payload = read_json(out)
        assert payload["rule_hat"]["kind"] == "soft"
        assert payload["lambda_hat"] > 0
        assert payload["variant_used"] in {"CvMinus", "CvZero", "CvPlus"}

    def test_seeded_repeat_identical_bytes(self, data_csv, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["cv", str(data_csv), "--response", "resp", "--seed", "4"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestSimulate:
    def test_unknown_preset_exit_2(self, capsys):
        rc = main(["simulate", "--preset", "bogus", "--reps", "1"])
        assert rc == 2

    def test_requires_preset_or_config(self):
        assert main(["simulate", "--reps", "1"]) == 2

    def test_byte_identical_result_bodies(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = [
            "simulate", "--preset", "intro", "--n", "12", "--reps", "2",
            "--methods", "lasso,ust", "--tuning", "best", "--seed", "3",
            "--format", "csv",
        ]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        strip = lambda p: "\n".join(
            ln for ln in p.read_text().split("\n") if not ln.startswith("#")
        )
        assert strip(a) == strip(b)
        assert a.read_bytes() == b.read_bytes()

    def test_config_file_custom_design(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(
            "# custom design\n"
            "p = 12\n"
            "sigma = ar:0.5\n"
            "beta = 2@1-3\n"
            "sigma_noise = 1.0\n"
            "n = 25\n"
            "reps = 2\n"
            "methods = lasso\n"
        )
        out = tmp_path / "res.csv"
        rc = main(["simulate", "--config", str(cfg), "--tuning", "best",
                   "--out", str(out)])
        assert rc == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 3
        assert lines[2].startswith("25,lasso,best-possible,2,")

    def test_multiple_n_plot_ready(self, tmp_path):
        out = tmp_path / "res.csv"
        rc = main([
            "simulate", "--preset", "intro", "--n", "10,15", "--reps", "2",
            "--methods", "ust", "--tuning", "best", "--out", str(out),
        ])
        assert rc == 0
        lines = out.read_text().strip().split("\n")
        assert lines[2].split(",")[0] == "10"
        assert lines[3].split(",")[0] == "15"

    def test_details_json(self, tmp_path):
        out = tmp_path / "res.csv"
        det = tmp_path / "det.json"
        rc = main([
            "simulate", "--preset", "intro", "--n", "12", "--reps", "2",
            "--methods", "lasso", "--tuning", "best",
            "--out", str(out), "--details", str(det),
        ])
        assert rc == 0
        payload = read_json(det)
        assert len(payload["replications"]) == 2
        assert {"g", "rpe", "lambda"} <= set(payload["replications"][0])


class TestDiagnose:
    def test_identity_sigma(self, tmp_path):
        out = tmp_path / "diag.json"
        rc = main([
            "diagnose", "--sigma", "identity", "--p", "10", "--support", "1-3",
            "--out", str(out),
        ])
        assert rc == 0
        payload = read_json(out)
        assert payload["irrep_max"] == 0.0
        assert payload["d_ss"] == 1
        assert payload["d_cs"] == 0

    def test_equicorrelation_value(self, tmp_path):
        out = tmp_path / "diag.json"
        rc = main([
            "diagnose", "--sigma", "constant:0.95", "--p", "100",
            "--support", "1-20", "--out", str(out),
        ])
        assert rc == 0
        assert read_json(out)["irrep_max"] == pytest.approx(0.99738, abs=1e-5)

    def test_ar_support_counts(self, tmp_path):
        out = tmp_path / "diag.json"
        rc = main([
            "diagnose", "--sigma", "ar:0.5", "--p", "30", "--support", "1-10",
            "--out", str(out),
        ])
        assert rc == 0
        assert read_json(out)["d_ss"] == 10

    def test_inconsistent_support_exit_2(self, capsys):
        rc = main(["diagnose", "--sigma", "identity", "--p", "5", "--support", "1-9"])
        assert rc == 2
