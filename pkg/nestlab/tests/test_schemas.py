import numpy as np
import pytest
from pydantic import ValidationError

from nestlab.nest_algebra import counterexample_family
from nestlab.schemas.algebra import DistanceCertificate, KKEstimate, RankOneWitness
from nestlab.schemas.common import Tolerances, default_tolerances, matrix_to_json, to_complex_matrix
from nestlab.schemas.projection import Projection


def test_projection_from_matrix():
    p = Projection.from_matrix([[1, 0], [0, 0]])
    assert p.rank == 1
    assert p.dim == 2
    assert np.allclose(p.perp, [[0, 0], [0, 1]])
    assert p.complement().rank == 1


def test_zero_and_identity():
    assert Projection.zero(3).rank == 0
    assert Projection.identity(3).rank == 3


def test_non_hermitian_rejected():
    with pytest.raises(ValidationError, match="not Hermitian"):
        Projection.from_matrix([[1, 1], [0, 0]])


def test_non_idempotent_rejected():
    with pytest.raises(ValidationError, match="not idempotent"):
        Projection.from_matrix([[2, 0], [0, 0]])


def test_wrong_rank_rejected():
    with pytest.raises(ValidationError, match="rank"):
        Projection(p=np.eye(2), dim=2, rank=1)


def test_models_are_frozen():
    p = Projection.identity(2)
    with pytest.raises(ValidationError):
        p.rank = 1
    with pytest.raises(ValueError):
        p.p[0, 0] = 0.0


def test_complex_matrix_rejects_nan():
    with pytest.raises(ValueError):
        to_complex_matrix([[np.nan]])


def test_complex_matrix_accepts_matrix_file():
    payload = matrix_to_json(np.array([[1 + 2j, 3.0]]))
    assert payload == {"rows": 1, "cols": 2, "entries": [[1.0, 2.0], [3.0, 0.0]]}
    assert np.array_equal(to_complex_matrix(payload), [[1 + 2j, 3.0]])


def test_json_dump_uses_matrix_file_shape():
    dumped = Projection.identity(1).model_dump(mode="json")
    assert dumped["p"] == {"rows": 1, "cols": 1, "entries": [[1.0, 0.0]]}


def test_tolerances_from_environment(monkeypatch):
    monkeypatch.setenv("NESTLAB_TOL", "1e-9")
    monkeypatch.setenv("NESTLAB_RANK_REL", "1e-10")
    tol = Tolerances()
    assert tol.eq_abs == 1e-9
    assert tol.rank_rel == 1e-10
    default_tolerances.cache_clear()
    assert default_tolerances().eq_abs == 1e-9


def test_tolerances_range(monkeypatch):
    with pytest.raises(ValidationError):
        Tolerances(eq_abs=0.5)
    monkeypatch.setenv("NESTLAB_TOL", "0")
    with pytest.raises(ValidationError):
        Tolerances()


def test_kk_estimate_rejects_negative_bound():
    with pytest.raises(ValidationError):
        KKEstimate(
            lower_bound=-0.1,
            upper_bound=1.0,
            witness=np.eye(2),
            side="m",
            method="ascent",
            trials=1,
            seed=0,
        )


def test_tolerances_ignore_unprefixed_environment(monkeypatch):
    monkeypatch.setenv("EQ_ABS", "1e-3")
    assert Tolerances().eq_abs == 1e-8
    assert Tolerances(eq_abs=1e-6).eq_abs == 1e-6


def _kk_fields(**overrides):
    fields = {
        "lower_bound": 0.5,
        "upper_bound": 1.0,
        "witness": np.eye(2),
        "side": "m",
        "method": "ascent",
        "trials": 1,
        "seed": 0,
    }
    return {**fields, **overrides}


def test_kk_estimate_rejects_bounds_above_one():
    with pytest.raises(ValidationError, match="exceeds 1"):
        KKEstimate(**_kk_fields(lower_bound=1.5))
    with pytest.raises(ValidationError, match="witness norm"):
        KKEstimate(**_kk_fields(witness=2 * np.eye(2)))
    tol = Tolerances(eq_abs=1e-3)
    loose = KKEstimate.model_validate(_kk_fields(lower_bound=1.0005), context={"tol": tol})
    assert loose.lower_bound == 1.0005


def test_rank_one_witness_must_have_unit_norm():
    with pytest.raises(ValidationError, match="unit norm"):
        RankOneWitness(zeta=[2.0, 0.0], eta=[0.0, 1.0], side="n", value=0.5)


def test_certificate_achieved_matches_best_witness():
    witness = RankOneWitness(zeta=[1.0, 0.0], eta=[0.0, 1.0], side="n", value=1.0)
    certificate = DistanceCertificate(case=2, witnesses=[witness], achieved=1.0)
    assert certificate.achieved == 1.0
    with pytest.raises(ValidationError, match="best witness"):
        DistanceCertificate(case=2, witnesses=[witness], achieved=0.5)
    with pytest.raises(ValidationError, match="at least one witness"):
        DistanceCertificate(case=1, witnesses=[], achieved=0.0)


def test_counterexample_instance_invariants():
    instance = counterexample_family(0.8)
    fields = dict(instance)
    with pytest.raises(ValidationError, match="nest_dist"):
        type(instance).model_validate({**fields, "nest_dist": 0.5})
    with pytest.raises(ValidationError, match="norm 1"):
        type(instance).model_validate({**fields, "t": 2 * np.asarray(instance.t)})
    with pytest.raises(ValidationError, match="T\\(m_nest\\)"):
        type(instance).model_validate({**fields, "t": np.asarray(instance.t).T})
