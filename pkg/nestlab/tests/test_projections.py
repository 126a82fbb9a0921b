import math

import numpy as np
import pytest

from nestlab.exceptions import (
    DimensionMismatchError,
    NotOrthogonalError,
    TooFarError,
    UniquenessViolatedError,
)
from nestlab.linalg import spectral_norm
from nestlab.projections import (
    closest_pair_check,
    halmos_decompose,
    nearest_in_chain,
    polar_isometry_gap,
    principal_angles,
    proj_distance,
    proj_distance_components,
    projection_from_basis,
    rank_complement_check,
)
from nestlab.schemas.projection import Projection
from nestlab.utils.sampling import orthogonal_quadruple, random_projection_pair


def line(vector, tol=None) -> Projection:
    return projection_from_basis(np.asarray(vector, dtype=complex).reshape(-1, 1), tol)


def test_equal_projections(tol):
    p = line([1, 1, 0], tol)
    assert proj_distance(p, p) == pytest.approx(0.0, abs=1e-14)


def test_example_lines_at_distance_s(tol):
    p = line([1, 0], tol)
    q = line([0.6, 0.8], tol)
    d = proj_distance_components(p, q)
    assert d.d == pytest.approx(0.8, abs=1e-12)
    assert d.d_pq_perp == pytest.approx(0.8, abs=1e-12)
    assert d.d_pperp_q == pytest.approx(0.8, abs=1e-12)
    assert principal_angles(p, q, tol) == pytest.approx([math.asin(0.8)])


def test_dimension_mismatch(tol):
    with pytest.raises(DimensionMismatchError):
        proj_distance(line([1, 0], tol), line([1, 0, 0], tol))


def test_norm_formula_on_random_pairs(rng, tol):
    for _ in range(100):
        p, q = random_projection_pair(int(rng.integers(2, 17)), rng, tol)
        d = proj_distance_components(p, q)
        assert d.d == pytest.approx(max(d.d_pq_perp, d.d_pperp_q), abs=1e-8)
        if d.d < 1 - 1e-6:
            assert d.d_pq_perp == pytest.approx(d.d_pperp_q, abs=1e-6)


def test_isometry_gap_matches_half_angle_formula(rng, tol):
    checked = 0
    for _ in range(100):
        p, q = random_projection_pair(int(rng.integers(2, 17)), rng, tol)
        if proj_distance(p, q) >= 1 - tol.eq_abs:
            continue
        gap = polar_isometry_gap(p, q, tol)
        assert gap.gap == pytest.approx(gap.predicted, abs=1e-8)
        assert gap.gap < math.sqrt(2)
        checked += 1
    assert checked > 20


def test_isometry_gap_too_far(tol):
    with pytest.raises(TooFarError) as info:
        polar_isometry_gap(line([1, 0], tol), line([0, 1], tol), tol)
    assert info.value.distance == pytest.approx(1.0)


def test_halmos_corner_dimensions(tol):
    p = line([1, 0, 0], tol)
    q = line([0, 1, 0], tol)
    h = halmos_decompose(p, q, tol)
    assert (h.d00, h.d10, h.d01, h.d11, h.generic_dim) == (1, 1, 1, 0, 0)

    same = halmos_decompose(p, p, tol)
    assert (same.d00, same.d11, same.generic_dim) == (2, 1, 0)


def test_halmos_generic_pair(tol):
    p = line([1, 0], tol)
    q = line([0.6, 0.8], tol)
    h = halmos_decompose(p, q, tol)
    assert h.generic_dim == 1
    assert h.c_diag == pytest.approx([0.6])
    assert h.s_diag == pytest.approx([0.8])


def test_halmos_reconstructs_random_pairs(rng, tol):
    for _ in range(50):
        p, q = random_projection_pair(int(rng.integers(2, 11)), rng, tol)
        h = halmos_decompose(p, q, tol)
        p_back, q_back = h.reconstruct()
        w = np.asarray(h.w)
        assert spectral_norm(w.conj().T @ w - np.eye(p.dim)) < 1e-8
        assert spectral_norm(p_back - p.p) < 1e-6
        assert spectral_norm(q_back - q.p) < 1e-6


def test_rank_complement_on_random_quadruples(rng, tol):
    for _ in range(100):
        p1, p2, q1, q2 = orthogonal_quadruple(int(rng.integers(3, 13)), rng, tol)
        report = rank_complement_check(p1, p2, q1, q2, tol)
        assert report.rank_p_complement == report.rank_q_complement
        assert report.index == 0
        assert report.gap < math.sqrt(2)
        assert report.gap <= report.gap_bound + 1e-10


def test_rank_complement_requires_orthogonal_pairs(tol):
    p = line([1, 0], tol)
    with pytest.raises(NotOrthogonalError):
        rank_complement_check(p, p, p, Projection.zero(2), tol)


def test_rank_complement_too_far_carries_ranks(tol):
    zero = Projection.zero(2)
    with pytest.raises(TooFarError) as info:
        rank_complement_check(line([1, 0], tol), zero, line([0, 1], tol), zero, tol)
    assert info.value.ranks == (1, 1)


def test_nearest_in_chain(tol):
    chain = [Projection.zero(2), line([1, 0], tol), Projection.identity(2)]
    assert nearest_in_chain(line([0.8, 0.6], tol), chain, tol) == 1
    assert nearest_in_chain(Projection.identity(2), chain, tol) == 2
    assert nearest_in_chain(line([0, 1], tol), chain, tol) is None


def test_nearest_in_chain_reports_broken_uniqueness(tol):
    p = line([1, 0], tol)
    with pytest.raises(UniquenessViolatedError):
        nearest_in_chain(p, [p, p], tol)


def test_closest_pair_is_at_distance_one(tol):
    q1 = line([1, 0, 0], tol)
    q2 = projection_from_basis(np.eye(3)[:, :2], tol)
    for p in (q1, q2, line([1, 1, 0], tol), line([0, 0, 1], tol)):
        assert closest_pair_check(p, q1, q2) == pytest.approx(1.0, abs=1e-12)
