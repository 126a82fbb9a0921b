import io

import numpy as np
import pytest

from nestlab.cli.serialization import (
    MatrixFile,
    NestFile,
    parse_matrix,
    parse_nest,
    read_matrix,
    read_nest,
    write_csv,
)
from nestlab.exceptions import BadFlagError, ParseError
from nestlab.linalg import spectral_norm
from nestlab.utils.sampling import random_nest


def test_matrix_file_is_bit_exact(rng, tmp_path):
    array = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    path = tmp_path / "a.json"
    path.write_text(MatrixFile.from_array(array).model_dump_json())
    assert np.array_equal(read_matrix(path), array)


def test_nest_file_is_bit_exact(rng, tol):
    nest_file = NestFile.from_nest(random_nest(4, rng, tol), tol)
    text = nest_file.model_dump_json()
    assert NestFile.model_validate_json(text) == nest_file


def test_nest_file_rebuilds_the_nest(rng, tol, tmp_path):
    nest = random_nest(5, rng, tol)
    path = tmp_path / "n.json"
    path.write_text(NestFile.from_nest(nest, tol).model_dump_json())
    rebuilt = read_nest(path, tol)
    assert rebuilt.ranks == nest.ranks
    for a, b in zip(rebuilt.elements, nest.elements):
        assert spectral_norm(a.p - b.p) < 1e-12


@pytest.mark.parametrize(
    "payload",
    [
        {"rows": 2, "cols": 2, "entries": [[1, 0]]},
        {"rows": 1, "cols": 1},
        {"rows": 1, "cols": 1, "entries": [["x", 0]]},
        [1, 2, 3],
    ],
)
def test_malformed_matrix_files(payload):
    with pytest.raises(ParseError):
        parse_matrix(payload)


def test_malformed_nest_file():
    with pytest.raises(ParseError):
        parse_nest({"dim": 2, "dims": [0, 2], "basis": {"rows": 1, "cols": 1, "entries": [[1, 0]]}})


def test_invalid_flag_is_not_a_parse_error(tmp_path):
    path = tmp_path / "n.json"
    path.write_text(
        NestFile(dim=2, dims=[0, 3], basis=MatrixFile.from_array(np.eye(2))).model_dump_json()
    )
    with pytest.raises(BadFlagError):
        read_nest(path)


def test_unreadable_files(tmp_path):
    with pytest.raises(ParseError):
        read_matrix(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        read_matrix(bad)


def test_write_csv():
    stream = io.StringIO()
    write_csv(stream, ["s", "a"], [[0.8, 0.75], [0.9, 0.1]])
    assert stream.getvalue() == "s,a\n0.8,0.75\n0.9,0.1\n"
