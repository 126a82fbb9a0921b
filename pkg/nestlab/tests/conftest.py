import json
import math

import numpy as np
import pytest

from nestlab.cli.serialization import MatrixFile, NestFile
from nestlab.nests import nest_from_flag
from nestlab.schemas.common import Tolerances, default_tolerances


def rotation(s: float) -> np.ndarray:
    """Basis whose first column is ``(c, s)``."""
    c = math.sqrt(1.0 - s * s)
    return np.array([[c, -s], [s, c]])


def example_nests(s: float, tol: Tolerances | None = None):
    """``{0, Ce₁, C²}`` and ``{0, C(c, s), C²}``."""
    return (
        nest_from_flag([0, 1, 2], np.eye(2), tol),
        nest_from_flag([0, 1, 2], rotation(s), tol),
    )


@pytest.fixture
def tol():
    return Tolerances(eq_abs=1e-8, rank_rel=1e-8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(autouse=True)
def _fresh_tolerances(monkeypatch):
    """Isolate tests from NESTLAB_* variables set in the environment."""
    monkeypatch.delenv("NESTLAB_TOL", raising=False)
    monkeypatch.delenv("NESTLAB_RANK_REL", raising=False)
    default_tolerances.cache_clear()
    yield
    default_tolerances.cache_clear()


@pytest.fixture
def write_matrix(tmp_path):
    """Write an array as a MatrixFile and return its path."""

    def _write(name: str, array) -> str:
        path = tmp_path / f"{name}.json"
        path.write_text(MatrixFile.from_array(array).model_dump_json())
        return str(path)

    return _write


@pytest.fixture
def write_nest(tmp_path):
    def _write(name: str, dims, basis) -> str:
        basis = np.asarray(basis, dtype=complex)
        payload = {
            "dim": basis.shape[0],
            "dims": list(dims),
            "basis": MatrixFile.from_array(basis).model_dump(),
        }
        NestFile.model_validate(payload)
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(payload))
        return str(path)

    return _write
