import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from specflag.cli import (EXIT_BOUNDARY, EXIT_FORMAT, EXIT_NONCOMMUTING, EXIT_OK,
                          parse_tuple_document, tuple_document, main, FormatError)

DIAGONAL = {"k": 2, "n": 2, "matrices": [
    [[[1, 0], [0, 0]], [[0, 0], [2, 0]]],
    [[[3, 0], [0, 0]], [[0, 0], [4, 0]]]]}
NONCOMMUTING = {"k": 2, "n": 2, "matrices": [
    [[[0, 0], [1, 0]], [[0, 0], [0, 0]]],
    [[[0, 0], [0, 0]], [[1, 0], [0, 0]]]]}


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def diag_file(tmp_path):
    p = tmp_path / "diag.json"
    p.write_text(json.dumps(DIAGONAL))
    return p


@pytest.fixture(scope="module")
def seed7(tmp_path_factory):
    d = tmp_path_factory.mktemp("seed7")
    assert run("generate", "--k", 4, "--n", 2, "--seed", 7, "--out", d)[0] == EXIT_OK
    return d / "tuple.json"


def test_check_commuting(diag_file):
    code, out, _ = run("check", "--input", diag_file)
    assert code == EXIT_OK
    assert "residual" in out


def test_check_noncommuting(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(NONCOMMUTING))
    code, _, err = run("check", "--input", p)
    assert code == EXIT_NONCOMMUTING
    assert "pair 1, 2" in err


def test_check_malformed(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"k": 2,\n "n": }')
    code, _, err = run("check", "--input", p)
    assert code == EXIT_FORMAT
    assert "line 2" in err


def test_usage_errors_exit_64(diag_file, tmp_path):
    assert run("frobnicate")[0] == EXIT_FORMAT
    assert run("run", "--task", "dance", "--input", diag_file, "--out", tmp_path)[0] == EXIT_FORMAT
    assert run("run", "--task", "order", "--input", diag_file, "--out", tmp_path,
               "--depth", 0)[0] == EXIT_FORMAT


def test_document_validation():
    with pytest.raises(FormatError):
        parse_tuple_document(json.dumps({"k": 3, "n": 1, "matrices": [[[[1, 0]]]]}))
    with pytest.raises(FormatError):
        parse_tuple_document(json.dumps({"k": 1, "n": 1, "matrices": [[[["nan", 0]]]]}))
    mats, labels = parse_tuple_document(json.dumps(DIAGONAL))
    assert labels is None
    assert np.array_equal(mats[1], np.diag([3, 4]))
    assert tuple_document(mats)["matrices"] == DIAGONAL["matrices"]


def test_measure_task(diag_file, tmp_path):
    code, _, _ = run("run", "--task", "measure", "--input", diag_file, "--out", tmp_path)
    assert code == EXIT_OK
    res = json.loads((tmp_path / "measure.json").read_text())["result"]
    got = {tuple(complex(*z) for z in a): w for a, w in zip(res["atoms"], res["weights"])}
    assert got == {(1, 3): 0.5, (2, 4): 0.5}
    assert res["fractions"] == ["1/2", "1/2"]


def test_boundary_exit(diag_file, tmp_path):
    region = json.dumps({"kind": "rectangle", "factors": [
        {"kind": "disk", "center": [0, 0], "radius": 1}, {"kind": "full"}]})
    code, _, err = run("run", "--task", "project", "--input", diag_file, "--out", tmp_path,
                       "--region", region)
    assert code == EXIT_BOUNDARY
    assert "eigenvalue" in err


@pytest.mark.parametrize("task", ["triangularize", "measure", "project", "order", "calc"])
def test_tasks_succeed(seed7, tmp_path, task):
    code, _, err = run("run", "--task", task, "--input", seed7, "--out", tmp_path)
    assert code == EXIT_OK, err
    doc = json.loads((tmp_path / f"{task}.json").read_text())
    assert doc["task"] == task


def test_scan_shape(seed7, tmp_path):
    code, _, _ = run("run", "--task", "spectrum-scan", "--input", seed7, "--out", tmp_path)
    assert code == EXIT_OK
    with open(tmp_path / "scan.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["w_re", "w_im", "harte_margin", "alpha_margin"]
    assert len(rows) - 1 == 41 * 41
    assert all(float(r[2]) >= 0 and float(r[3]) >= 0 for r in rows[1:])
    svg = (tmp_path / "scan.svg").read_text()
    assert svg.startswith("<svg") or svg.startswith("<?xml")


def test_verify_all_passes(seed7, tmp_path):
    code, out, err = run("run", "--task", "verify-all", "--input", seed7, "--out", tmp_path)
    assert code == EXIT_OK, out + err
    doc = json.loads((tmp_path / "verify.json").read_text())["result"]
    assert doc["passed"]
    assert {r["status"] for r in doc["rows"]} <= {"pass", "skipped"}
    assert "series-calculus" in {r["key"] for r in doc["rows"]}


def test_outputs_do_not_depend_on_threads(seed7, tmp_path):
    blobs = []
    for threads in ("1", "2", "8"):
        out = tmp_path / threads
        env = dict(os.environ, SPECFLAG_THREADS=threads)
        proc = subprocess.run([sys.executable, "-m", "specflag", "run", "--task",
                               "spectrum-scan", "--input", str(seed7), "--out", str(out)],
                              env=env, capture_output=True)
        assert proc.returncode == 0, proc.stderr
        blobs.append(((out / "scan.json").read_bytes(), (out / "scan.csv").read_bytes()))
    assert blobs[0] == blobs[1] == blobs[2]


def test_generate_writes_certifiable_file(tmp_path):
    target = tmp_path / "nested" / "t.json"
    assert run("generate", "--k", 3, "--n", 3, "--seed", 1, "--out", target)[0] == EXIT_OK
    assert run("check", "--input", target)[0] == EXIT_OK
    assert run("generate", "--k", 0, "--n", 1, "--out", target)[0] == EXIT_FORMAT
