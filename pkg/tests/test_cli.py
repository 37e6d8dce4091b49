import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from ldpc_workbench import cli
from ldpc_workbench.channels import BEC, received_to_csv, transmit
from ldpc_workbench.factor_graph import (encode_systematic, sample_regular, to_parity_check,
                                         triangularize, write_alist)


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def alist(tmp_path):
    path = tmp_path / "code.alist"
    write_alist(to_parity_check(sample_regular(60, 3, 6, 1)), path)
    return path


def test_simulate_csv(capsys):
    code, out, _ = run(["simulate", "--code", "regular:3,6", "--n", "100", "--family", "bec",
                        "--params", "0.3,0.5", "--decoder", "peel", "--trials", "10"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["parameter"]) for r in rows] == [0.3, 0.5]


def test_simulate_config_file_and_jsonl(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"code": "regular:3,6", "n": 100, "family": "bsc",
                                "parameters": [0.02], "decoder": "gal-a", "trials": 10}))
    code, out, _ = run(["simulate", "--config", str(conf), "--format", "jsonl"], capsys)
    assert code == 0 and json.loads(out.splitlines()[0])["decoder"] == "gal-a"


@pytest.mark.parametrize("argv", [
    ["simulate", "--code", "regular:3,6", "--family", "bsc", "--params", "0.1", "--decoder", "peel"],
    ["simulate", "--code", "nonsense", "--params", "0.1"],
    ["simulate", "--params", "2.0"],
    ["decode", "--alist", "/nonexistent/file", "--received", "/nonexistent/r.csv"],
])
def test_configuration_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and err.startswith("error:")


def test_threshold_single(capsys):
    code, out, _ = run(["threshold", "--decoder", "bec", "--code", "regular:3,4", "--family", "bec"], capsys)
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert abs(float(row["threshold"]) - 0.6474) < 1e-4


def test_distributions(capsys):
    code, out, _ = run(["distributions", "tornado", "--N", "10", "--alpha", "0.5"], capsys)
    data = json.loads(out)
    assert code == 0 and data["bec_threshold"] >= 0.5 - 1e-9


def test_encode_then_decode(alist, tmp_path, capsys):
    code, out, _ = run(["encode", "--alist", str(alist), "--seed", "3"], capsys)
    assert code == 0
    cw = np.array([int(r["symbol"]) for r in csv.DictReader(io.StringIO(out))], dtype=np.int8)
    rw = transmit(cw, BEC(0.2), 5)
    rpath = tmp_path / "r.csv"
    rpath.write_text(received_to_csv(rw))
    for dec in ("peel", "ml"):
        code, out, _ = run(["decode", "--alist", str(alist), "--received", str(rpath), "--decoder", dec], capsys)
        assert code == 0 and out.startswith("# status=success")
        got = [int(r["symbol"]) for r in csv.DictReader(io.StringIO(out.split("\n", 1)[1]))]
        assert got == cw.tolist()


def test_ira_command(capsys):
    code, out, _ = run(["ira", "--lam", '{"4": 1}', "--rho", '{"1": 0.3, "2": 0.7}',
                        "--alpha", "0.1,0.5", "--k", "300", "--trials", "2"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2 and rows[0]["satisfied"] == "True"


def test_concentration_command(capsys):
    code, out, _ = run(["concentration", "--samples", "3", "--lengths", "200,400", "--trials", "2"], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 3


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ldpc_workbench.cli", "threshold", "--decoder", "bogus"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
