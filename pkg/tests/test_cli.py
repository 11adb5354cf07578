"""CLI behaviour: formats, exit codes, determinism, seed handling."""

import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

RUN = [sys.executable, "-m", "gpdthresh.cli"]


def run_cli(*args, env_extra=None):
    env = dict(os.environ)
    env.pop("GPDTHRESH_SEED", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(RUN + list(args), capture_output=True, text=True, env=env)


@pytest.fixture(scope="module")
def case1_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "case1.csv"
    r = run_cli("simulate", "case1", "--seed", "3", "--out", str(path))
    assert r.returncode == 0
    return str(path)


@pytest.fixture(scope="module")
def case0_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "case0.csv"
    r = run_cli("simulate", "case0", "--seed", "5", "--out", str(path))
    assert r.returncode == 0
    return str(path)


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestSimulate:
    def test_case1_row_count(self, case1_file):
        assert len(read_rows(case1_file)) == 1200

    def test_case4_sections(self, tmp_path):
        out = tmp_path / "c4.csv"
        r = run_cli("simulate", "case4", "--seed", "9", "--out", str(out))
        assert r.returncode == 0
        vals = np.array([float(row["value"]) for row in read_rows(out)])
        assert vals.size == 1000
        assert int((vals > 1.0).sum()) == 279

    def test_reproducible_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli("simulate", "case2", "--seed", "11", "--out", str(a))
        run_cli("simulate", "case2", "--seed", "11", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()


class TestSelect:
    def test_case0_picks_lowest_candidate(self, case0_file, tmp_path):
        out = tmp_path / "sel.json"
        r = run_cli("select", case0_file, "--B", "30", "--seed", "1",
                    "--format", "json", "--out", str(out))
        assert r.returncode == 0
        payload = json.loads(out.read_text())
        assert payload["chosen_index"] == 0
        assert payload["chosen_quantile_pct"] == 0.0

    def test_single_raw_candidate_echoed(self, case1_file, tmp_path):
        out = tmp_path / "sel.json"
        r = run_cli("select", case1_file, "--grid", "@1.25", "--B", "15",
                    "--seed", "2", "--format", "json", "--out", str(out))
        assert r.returncode == 0
        assert json.loads(out.read_text())["chosen"] == 1.25

    def test_csv_json_numeric_equality(self, case1_file, tmp_path):
        c, j = tmp_path / "sel.csv", tmp_path / "sel.json"
        common = ["select", case1_file, "--grid", "0(10)90", "--B", "20",
                  "--seed", "4"]
        assert run_cli(*common, "--out", str(c)).returncode == 0
        assert run_cli(*common, "--format", "json", "--out", str(j)).returncode == 0
        crows = read_rows(c)
        jrows = json.loads(j.read_text())["candidates"]
        assert len(crows) == len(jrows)
        for cr, jr in zip(crows, jrows):
            for key in ("threshold", "d_e", "scale", "shape"):
                if jr[key] is None:
                    assert cr[key] == ""
                else:
                    assert cr[key] == repr(jr[key])

    def test_deterministic_across_runs_and_threads(self, case1_file, tmp_path):
        outs = []
        for name, threads in (("r1.csv", "1"), ("r2.csv", "1"), ("r3.csv", "2")):
            out = tmp_path / name
            r = run_cli("select", case1_file, "--grid", "0(10)90", "--B", "20",
                        "--seed", "7", "--threads", threads, "--out", str(out))
            assert r.returncode == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_env_seed_used_when_flag_absent(self, case1_file, tmp_path):
        a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
        run_cli("select", case1_file, "--grid", "0(20)80", "--B", "10",
                "--seed", "21", "--out", str(a))
        run_cli("select", case1_file, "--grid", "0(20)80", "--B", "10",
                "--out", str(b), env_extra={"GPDTHRESH_SEED": "21"})
        run_cli("select", case1_file, "--grid", "0(20)80", "--B", "10",
                "--out", str(c), env_extra={"GPDTHRESH_SEED": "22"})
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes() != c.read_bytes()


class TestErrors:
    def test_missing_file(self):
        assert run_cli("select", "no-such-file.csv").returncode == 2

    def test_malformed_grid(self, case1_file):
        assert run_cli("select", case1_file, "--grid", "junk(x)").returncode == 2

    def test_non_numeric_body(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("value\n1.0\noops\n2.0\n")
        r = run_cli("select", str(bad))
        assert r.returncode == 2
        assert "3" in r.stderr  # line number reported

    def test_all_candidates_skipped(self, case1_file):
        r = run_cli("select", case1_file, "--grid", "@99999")
        assert r.returncode == 4

    def test_fit_threshold_above_max(self, case1_file):
        assert run_cli("fit", case1_file, "--threshold", "1e9").returncode == 4


class TestFitAndHeader:
    def test_header_and_blank_lines_accepted(self, tmp_path):
        f = tmp_path / "data.csv"
        body = "\n".join(str(1.0 + 0.01 * k) for k in range(1, 60))
        f.write_text("flow\n\n" + body + "\n")
        r = run_cli("fit", str(f), "--threshold", "1.0")
        assert r.returncode == 0
        assert "scale" in r.stdout

    def test_fit_values(self, case1_file, tmp_path):
        out = tmp_path / "fit.json"
        r = run_cli("fit", case1_file, "--threshold", "1.0",
                    "--format", "json", "--out", str(out))
        assert r.returncode == 0
        payload = json.loads(out.read_text())[0]
        assert payload["n_excess"] == 1000
        assert payload["scale"] == pytest.approx(0.5, abs=0.1)


class TestRlAndDiag:
    def test_rl_point_only_with_b1_1(self, case1_file, tmp_path):
        out = tmp_path / "rl.csv"
        r = run_cli("rl", case1_file, "--T", "10", "--obs-per-year", "10",
                    "--alg", "1", "--B1", "1", "--B", "10", "--grid", "0(20)80",
                    "--seed", "3", "--out", str(out))
        assert r.returncode == 0
        row = read_rows(out)[0]
        assert row["alg1_lo"] == row["alg1_hi"]

    def test_diag_stability_rows(self, case1_file, tmp_path):
        out = tmp_path / "stab.csv"
        r = run_cli("diag", case1_file, "--kind", "stability", "--grid", "0(20)80",
                    "--B", "25", "--seed", "1", "--out", str(out))
        assert r.returncode == 0
        rows = read_rows(out)
        assert len(rows) == 5
        assert [*rows[0].keys()] == ["threshold", "n_excess", "xi_hat", "ci_lo", "ci_hi"]

    def test_diag_qq_monotone(self, case1_file, tmp_path):
        out = tmp_path / "qq.csv"
        r = run_cli("diag", case1_file, "--kind", "qq", "--threshold", "1.0",
                    "--B", "30", "--seed", "2", "--out", str(out))
        assert r.returncode == 0
        rows = read_rows(out)
        emp = [float(x["empirical_q"]) for x in rows]
        assert emp == sorted(emp)

    def test_rl_probability_targets(self, case1_file, tmp_path):
        out = tmp_path / "rlp.csv"
        r = run_cli("rl", case1_file, "--p", "0.001", "0.0001", "--alg", "1",
                    "--B1", "15", "--B", "10", "--grid", "0(20)80",
                    "--threshold", "1.0", "--seed", "3", "--out", str(out))
        assert r.returncode == 0
        rows = read_rows(out)
        assert [row["kind"] for row in rows] == ["p", "p"]
        assert float(rows[0]["point"]) < float(rows[1]["point"])

    def test_diag_rl_curve(self, case1_file, tmp_path):
        out = tmp_path / "curve.csv"
        r = run_cli("diag", case1_file, "--kind", "rl-curve", "--grid", "0(20)80",
                    "--obs-per-year", "10", "--B", "8", "--B1", "10", "--B2", "3",
                    "--n-points", "4", "--seed", "2", "--out", str(out))
        assert r.returncode == 0
        rows = read_rows(out)
        assert len(rows) == 4
        points = [float(x["point"]) for x in rows]
        assert points == sorted(points)

    def test_study_smoke(self, tmp_path):
        out = tmp_path / "study.csv"
        r = run_cli("study", "case5", "--kind", "threshold", "--reps", "4",
                    "--B", "8", "--grid", "0(10)80", "--seed", "1",
                    "--out", str(out))
        assert r.returncode == 0
        row = read_rows(out)[0]
        assert float(row["rmse"]) ** 2 == pytest.approx(
            float(row["bias"]) ** 2 + float(row["variance"]), rel=1e-9)
        assert "rmse" in r.stdout
