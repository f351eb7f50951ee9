import json
import os
import shutil
import subprocess
import sys

import pytest

from walkgf.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out), err


def test_oracle_first_nonzero_terms(capsys):
    code, data, _ = run_json(capsys, "oracle", "--y", "2", "--b", "1", "--m", "12", "--start", "11", "--target", "right", "--order", "8")
    assert code == 0 and data["complete"]
    assert list(data["coefficients"].values()) == ["1/2", "1/4", "1/16", "1/16", "3/128", "7/256", "3/256", "15/1024"]


def test_oracle_skips_zero_coefficients(capsys):
    _, data, _ = run_json(capsys, "oracle", "--y", "3", "--b", "2", "--m", "14", "--start", "13", "--target", "[1]", "--order", "3")
    assert data["coefficients"] == {"6": "1/64", "9": "17/2048", "12": "229/65536"}


def test_oracle_table(capsys):
    code, out, _ = run(capsys, "oracle", "--y", "2", "--b", "1", "--m", "8", "--start", "7", "--target", "right", "--order", "2", "--table")
    assert code == 0
    assert "z^0  1/2" in out and "z^1  1/4" in out


def test_invalid_spec_exit_code(capsys):
    code, data, err = run_json(capsys, "oracle", "--y", "2", "--b", "3", "--m", "2", "--start", "1")
    assert code == 2 and data["error"]["type"] == "InvalidSpec"
    assert "InvalidSpec" in err


def test_precondition_exit_code(capsys):
    code, data, _ = run_json(capsys, "gf", "two-back", "--y", "4", "--m", "12")
    assert code == 3 and data["error"]["exit_code"] == 3


def test_gf_two_back(capsys):
    code, data, _ = run_json(capsys, "gf", "two-back", "--y", "3", "--m", "18", "--order", "19")
    assert code == 0
    assert data["numerator"] == {"9": "256", "12": "80"}
    assert data["denominator"] == {"0": "65536", "3": "-45056", "6": "4416", "9": "-8"}
    assert data["normalization"] == {"shift": -1, "scale": 1}
    assert data["expansion"]["coefficients"]["14"] == "635/262144"


def test_gf_one_back(capsys):
    _, data, _ = run_json(capsys, "gf", "one-back", "--y", "2", "--m", "8", "--side", "left")
    assert data["denominator"] == {"0": "128", "2": "-80", "4": "6"}


def test_gf_general_with_blocks(capsys):
    code, data, _ = run_json(capsys, "gf", "general", "--y", "4", "--b", "3", "--m", "11", "--show-mu", "--show-strings")
    assert code == 0
    assert data["mu"]["needed_count"] == 2
    assert data["denominator"] == data["mu"]["denominator"]
    assert "strings" in data


def test_gf_general_rejects_common_factor(capsys):
    code, _, _ = run_json(capsys, "gf", "general", "--y", "3", "--b", "3", "--m", "14")
    assert code == 3


@pytest.mark.parametrize(
    "argv, key",
    [
        (["gf", "exact-3f2b", "--kappa", "2"], "denominator"),
        (["gf", "duchon-inner", "--order", "11"], "series"),
        (["gf", "duchon", "--s", "2", "--order", "6"], "series"),
        (["gf", "single-barrier", "--k", "1", "--order", "3"], "series"),
    ],
)
def test_other_pipelines(capsys, argv, key):
    code, data, _ = run_json(capsys, *argv)
    assert code == 0 and key in data


def test_inner_series_values(capsys):
    _, data, _ = run_json(capsys, "gf", "duchon-inner", "--order", "11")
    assert data["series"]["coefficients"] == {"4": "1/8", "10": "7/256"}


def test_roots(capsys):
    _, data, _ = run_json(capsys, "roots", "--v", "3", "--u", "1", "--order", "6")
    assert data["series"]["coefficients"] == {"1": "1/2", "3": "1/16", "5": "3/128"}
    code, data, _ = run_json(capsys, "roots", "--v", "3", "--u", "1", "--kind", "large", "--order", "3")
    assert code == 3


def test_strings(capsys):
    _, data, _ = run_json(capsys, "strings", "--y", "4", "--b", "3", "--mu", "2")
    assert data["partition_count"] == 5 and data["q_binomial_count"] == 5
    assert sum(t["p"] for t in data["terms"]) == 228


def test_verify_single_cell(capsys):
    code, data, _ = run_json(capsys, "verify", "--formula", "two-back", "--y", "3", "--b", "2", "--m", "14")
    assert code == 0
    assert data["summary"] == {"cells": 1, "passed": 1, "failed": 0}
    assert data["reports"][0]["checked_through"] == 30


def test_verify_failure_exit_code(capsys):
    code, data, _ = run_json(capsys, "verify", "--formula", "duchon", "--y", "3", "--b", "2", "--m", "10", "--s", "2")
    assert code == 1 and data["summary"]["failed"] == 1


def test_verify_grid_and_listing(capsys):
    _, data, _ = run_json(capsys, "verify", "--list-grids")
    assert "acceptance" in data["grids"]
    code, data, _ = run_json(capsys, "verify", "--grid", "one_back", "--order", "8", "--jobs", "2")
    assert code == 0 and data["summary"]["failed"] == 0


def test_verify_range_and_options(capsys):
    code, data, _ = run_json(
        capsys, "verify", "--formula", "schur", "--y", "4", "--b", "3", "--m", "11", "--s", "5..7",
        "--option", "target=right", "--order", "12",
    )
    assert code == 0 and data["summary"]["cells"] == 3


@pytest.mark.skipif(shutil.which("walkgf") is None, reason="console script not installed")
def test_console_script_and_jobs_env(tmp_path):
    env = {**os.environ, "WALKGF_JOBS": "2"}
    proc = subprocess.run(
        ["walkgf", "verify", "--grid", "acceptance", "--order", "10"], capture_output=True, text=True, env=env
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["summary"]["passed"] == 24
    bad = subprocess.run(["walkgf", "gf", "two-back", "--y", "4", "--m", "12"], capture_output=True, text=True)
    assert bad.returncode == 3 and bad.stderr.startswith("walkgf:")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "walkgf.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "walkgf" in proc.stdout
