import json

import numpy as np
import pytest

from nestlab.cli.main import main, parse_s_values
from nestlab.cli.serialization import MatrixFile
from nestlab.exceptions import ParseError
from nestlab.tests.conftest import rotation


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_dist_proj_equal(capsys, write_matrix):
    p = write_matrix("p", [[1, 0], [0, 0]])
    code, out = run(capsys, "dist-proj", p, p)
    assert code == 0
    result = json.loads(out)
    assert result["d"] == pytest.approx(0.0, abs=1e-14)
    assert result["halmos"]["d11"] == 1


def test_dist_proj_example(capsys, write_matrix):
    f = rotation(0.8)[:, :1]
    code, out = run(capsys, "dist-proj", write_matrix("p", np.diag([1, 0])), write_matrix("q", f @ f.T))
    assert code == 0
    assert json.loads(out)["d"] == pytest.approx(0.8)


def test_dist_proj_non_hermitian(capsys, write_matrix):
    p = write_matrix("p", [[1, 1], [0, 0]])
    code, out = run(capsys, "dist-proj", p, p)
    assert code == 3
    assert json.loads(out)["error"] == "INVALID_INPUT"


def test_dist_proj_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"rows": 2}')
    code, out = run(capsys, "dist-proj", str(bad), str(bad))
    assert code == 2
    assert json.loads(out)["error"] == "PARSE_ERROR"


def test_nest_commands_on_identical_nests(capsys, write_nest):
    m = write_nest("m", [0, 1, 3], np.eye(3))
    code, out = run(capsys, "dist-nest", m, m)
    assert code == 0
    assert json.loads(out)["distance"] == pytest.approx(0.0, abs=1e-14)

    code, out = run(capsys, "theta", m, m)
    assert code == 0
    assert json.loads(out)["pairing"] == [[0, 0], [1, 1], [2, 2]]

    code, out = run(capsys, "similarity", m, m)
    assert code == 0
    assert json.loads(out)["s_minus_i_norm"] == pytest.approx(0.0, abs=1e-12)

    code, out = run(capsys, "alg", m, m, "--trials", "2")
    assert code == 0
    assert json.loads(out)["lower_bound"] == pytest.approx(0.0, abs=1e-10)


def test_theta_too_far(capsys, write_nest):
    m = write_nest("m", [0, 1, 2], np.eye(2))
    n = write_nest("n", [0, 1, 2], np.eye(2)[:, ::-1])
    code, out = run(capsys, "theta", m, n)
    assert code == 4
    payload = json.loads(out)
    assert payload["error"] == "TOO_FAR"
    assert payload["distance"] == pytest.approx(1.0)


def test_invalid_nest_file(capsys, tmp_path):
    path = tmp_path / "n.json"
    basis = MatrixFile.from_array(np.eye(2)).model_dump()
    path.write_text(json.dumps({"dim": 2, "dims": [0, 2, 1], "basis": basis}))
    code, _ = run(capsys, "dist-nest", str(path), str(path))
    assert code == 3


def test_arveson(capsys, write_matrix, write_nest):
    n = write_nest("n", [0, 1, 2, 3], np.eye(3))
    t = write_matrix("t", np.triu(np.ones((3, 3))))
    code, out = run(capsys, "arveson", t, n, "--nearest")
    assert code == 0
    payload = json.loads(out)
    assert payload["distance"] == pytest.approx(0.0, abs=1e-14)
    assert payload["nearest"]["rows"] == 3


def test_counterexample_json(capsys):
    code, out = run(capsys, "counterexample", "--s", "0.70711")
    assert code == 0
    payload = json.loads(out)
    assert payload["alg_dist_lb"] == pytest.approx(1.0, abs=1e-9)
    assert payload["nest_dist"] == pytest.approx(0.70711, abs=1e-10)


def test_counterexample_sweep_csv(capsys):
    code, out = run(capsys, "counterexample", "--s", "0.75:0.95:0.05")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "s,c,a,nest_dist,alg_dist_lb"
    assert len(lines) == 6
    assert all(float(line.split(",")[-1]) == pytest.approx(1.0, abs=1e-9) for line in lines[1:])


def test_counterexample_out_of_range(capsys):
    code, out = run(capsys, "counterexample", "--s", "0.5")
    assert code == 5
    assert json.loads(out)["error"] == "OUT_OF_RANGE"


def test_counterexample_bad_s(capsys):
    code, _ = run(capsys, "counterexample", "--s", "abc")
    assert code == 2


def test_parse_s_values():
    assert parse_s_values("0.8") == [0.8]
    assert parse_s_values("0.8:0.9:0.05") == pytest.approx([0.8, 0.85, 0.9])
    with pytest.raises(ParseError):
        parse_s_values("0.9:0.8:0.05")


def test_verify_zero_trials(capsys):
    code, out = run(capsys, "verify", "--trials", "0")
    assert code == 0
    assert json.loads(out)["failures"] == []


def test_invalid_tolerance_environment(capsys, monkeypatch):
    monkeypatch.setenv("NESTLAB_TOL", "0.5")
    code, _ = run(capsys, "counterexample", "--s", "0.8")
    assert code == 3
