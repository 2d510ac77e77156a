import json
import math

import pytest

from widthlab.cli import main

BALL2 = json.dumps({"type": "ball", "center": [0, 0], "radius": 1})
BALL3 = json.dumps({"type": "ball", "center": [0, 0, 0], "radius": 1})
SQUARE = json.dumps({"type": "polytope", "vertices": [[1, 1], [1, -1], [-1, 1], [-1, -1]]})
POWER2 = {"type": "power", "p": 2}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_compute_ball(capsys):
    code, out, _ = run(capsys, "compute", "--K", BALL3, "--i", "1", "--resolution", "16")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(4 * math.pi / 3, rel=1e-12)


def test_compute_from_file_and_csv(tmp_path, capsys):
    path = tmp_path / "square.json"
    path.write_text(SQUARE)
    code, out, _ = run(capsys, "compute", "--body", str(path), "--L", BALL2,
                       "--functional", "A_i_KL", "--resolution", "4096", "--format", "csv")
    assert code == 0
    header, row = out.strip().splitlines()
    assert header == "functional,i,value,evaluations"
    assert float(row.split(",")[2]) == pytest.approx(4.0, abs=1e-6)


@pytest.mark.parametrize("argv, needle", [
    (["compute", "--K", BALL2, "--i", "2"], "index out of range"),
    (["compute", "--K", '{"type": "ball", "center": [0, 0], "radius": 1, "x": 1}'], "unknown"),
    (["compute", "--K", '{"type": "ball",'], "line 1 column"),
    (["compute", "--K", "/nonexistent/body.json"], "cannot read"),
    (["compute", "--K", BALL2, "--L", BALL3, "--functional", "A_i_KL"], "--L"),
    (["compute", "--K", BALL2, "--i", "0", "--i", "1"], "single --i"),
    (["add", "--spec", '{"op": "minkowski"}'], "op"),
])
def test_input_errors_exit_2(capsys, argv, needle):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert needle in err


def test_add_lp_and_orlicz_files_are_identical(tmp_path, capsys):
    ball = json.loads(BALL2)
    big = {"type": "ball", "center": [1, -1], "radius": 2.5}
    lp = {"op": "lp_sum", "p": 2, "K": ball, "L": big}
    orl = {"op": "orlicz_sum", "bodies": [ball, big],
           "phi": {"type": "sum", "parts": [POWER2, POWER2], "coefficients": [1, 1]}}
    outs = []
    for name, spec in (("lp", lp), ("orlicz", orl)):
        out = tmp_path / f"{name}.json"
        code, _, err = run(capsys, "add", "--spec", json.dumps(spec), "--resolution", "256",
                           "--out", str(out))
        assert code == 0 and json.loads(err)["residual_max"] <= 1e-10
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    values = json.loads(outs[0])["values"]
    assert values[0] == pytest.approx(2.5 / math.sqrt(1 + 2.5**2), rel=1e-11)


def test_add_combination_with_zero_beta(capsys):
    spec = {"op": "combination", "phi1": POWER2, "phi2": {"type": "power", "p": 1},
            "K": json.loads(SQUARE), "L": json.loads(BALL2), "alpha": 1.0, "beta": 0.0}
    code, out, _ = run(capsys, "add", "--spec", json.dumps(spec), "--resolution", "16",
                       "--format", "csv")
    assert code == 0
    rows = [line.split(",") for line in out.strip().splitlines()[1:]]
    for u0, u1, value in rows:
        assert float(value) == pytest.approx(abs(float(u0)) + abs(float(u1)), rel=1e-11)


def test_verify_pair(capsys):
    code, out, err = run(capsys, "verify", "--K", SQUARE, "--L", BALL2, "--resolution", "1024")
    assert code == 0
    report = json.loads(out)
    assert report["ok"] and report["failures"] == 0
    assert json.loads(err)["ok"]


def test_verify_reports_failure_with_exit_4(capsys):
    code, _, err = run(capsys, "verify", "--K", SQUARE, "--L", BALL2, "--resolution", "1024",
                       "--tol-ineq", "-1.0")
    assert code == 4
    assert json.loads(err)["failures"] > 0


def test_suite_is_reproducible_and_atomic(tmp_path, capsys):
    out = tmp_path / "suite.json"
    argv = ["suite", "--dim", "3", "--trials", "2", "--seed", "7", "--resolution", "16",
            "--out", str(out)]
    code, _, err = run(capsys, *argv)
    first = out.read_bytes()
    assert code == 0 and json.loads(err)["out"] == str(out)
    code, _, err2 = run(capsys, *argv, "--threads", "2")
    assert code == 0 and out.read_bytes() == first
    assert json.loads(err)["digest"] == json.loads(err2)["digest"]
    assert [p.name for p in tmp_path.iterdir()] == ["suite.json"]


def test_suite_csv(capsys):
    code, out, _ = run(capsys, "suite", "--dim", "3", "--trials", "1", "--resolution", "16",
                       "--format", "csv", "--p", "2", "--i", "0")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("dim,trial,check")
    assert any(",lp_minkowski," in line for line in lines)
