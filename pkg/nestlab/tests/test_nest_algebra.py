import numpy as np
import pytest
from scipy.optimize import minimize

from nestlab.exceptions import DimensionMismatchError, NotDistanceOneError
from nestlab.linalg import spectral_norm
from nestlab.nest_algebra import (
    algebra_element,
    arveson_distance,
    contains,
    distance_one_certificate,
    kk_distance_estimate,
    nearest_element,
    rank_one_lower_bound,
)
from nestlab.nests import nest_from_flag
from nestlab.tests.conftest import example_nests
from nestlab.utils.sampling import distance_one_pair, maximal_nest, random_complex_matrix, random_nest


def test_arveson_distance_of_upper_triangular(tol):
    n = nest_from_flag([0, 1, 2, 3], np.eye(3), tol)
    t = np.triu(np.arange(1, 10).reshape(3, 3))
    result = arveson_distance(t, n)
    assert result.distance == pytest.approx(0.0, abs=1e-14)
    assert contains(t, n, tol).member


def test_arveson_distance_picks_the_worst_corner(tol):
    n = nest_from_flag([0, 1, 2], np.eye(2), tol)
    result = arveson_distance([[0, 0], [3, 0]], n)
    assert result.distance == pytest.approx(3.0)
    assert result.index == 1
    assert not contains([[0, 0], [3, 0]], n, tol).member


def test_operator_shape_checked(tol):
    n = nest_from_flag([0, 1, 2], np.eye(2), tol)
    with pytest.raises(DimensionMismatchError):
        arveson_distance(np.eye(3), n)


def test_algebra_element_residual(tol):
    n = nest_from_flag([0, 1, 2], np.eye(2), tol)
    element = algebra_element([[1, 2], [0, 3]], n)
    assert element.residual == pytest.approx(0.0, abs=1e-14)


def test_nearest_element_attains_the_distance(rng, tol):
    for _ in range(50):
        n = random_nest(int(rng.integers(2, 7)), rng, tol)
        t = random_complex_matrix((n.dim, n.dim), rng)
        a = nearest_element(t, n, tol)
        assert contains(a, n, tol).member
        assert spectral_norm(t - a) == pytest.approx(arveson_distance(t, n).distance, abs=1e-6)


def test_nearest_element_full_flag(rng, tol):
    n = nest_from_flag([0, 1, 2, 3, 4], np.eye(4), tol)
    t = random_complex_matrix((4, 4), rng)
    a = nearest_element(t, n, tol)
    assert np.allclose(np.tril(a, -1), 0.0, atol=1e-12)
    assert spectral_norm(t - a) == pytest.approx(arveson_distance(t, n).distance, abs=1e-6)


def _block_upper_indices(n):
    ranks = n.ranks
    mask = np.zeros((n.dim, n.dim), dtype=bool)
    for lo, hi in zip(ranks, ranks[1:]):
        mask[lo:hi, lo:] = True
    return np.nonzero(mask)


@pytest.mark.parametrize("dim", [2, 3, 4])
@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("maximal", [True, False])
def test_nearest_element_is_never_beaten_by_an_optimizer(dim, seed, maximal, tol):
    rng = np.random.default_rng([dim, seed])
    n = maximal_nest(dim, rng, tol) if maximal else random_nest(dim, rng, tol)
    basis = n.adapted_basis(tol)
    t = random_complex_matrix((dim, dim), rng)
    rows, cols = _block_upper_indices(n)

    def objective(x):
        a = np.zeros((dim, dim), dtype=complex)
        a[rows, cols] = x[: rows.size] + 1j * x[rows.size :]
        return spectral_norm(t - basis @ a @ basis.conj().T)

    local = basis.conj().T @ t @ basis
    start = np.concatenate([local[rows, cols].real, local[rows, cols].imag])
    result = minimize(objective, start, method="Nelder-Mead", options={"maxiter": 6000})
    ours = spectral_norm(t - nearest_element(t, n, tol))
    assert result.fun >= arveson_distance(t, n).distance - 1e-9
    assert ours <= result.fun + 1e-9


def test_rank_one_bound_on_example(tol):
    m, n = example_nests(0.8, tol)
    bound = rank_one_lower_bound(m, n, tol)
    assert bound.bound == pytest.approx(0.8, abs=1e-12)
    home = n if bound.side == "n" else m
    assert contains(bound.operator, home, tol).member
    assert np.linalg.norm(bound.zeta) == pytest.approx(1.0)
    assert np.linalg.norm(bound.eta) == pytest.approx(1.0)


def test_kk_estimate_beats_rank_one_on_example(tol):
    m, n = example_nests(0.8, tol)
    estimate = kk_distance_estimate(m, n, trials=2, seed=0, tol=tol)
    assert estimate.lower_bound >= 1 - 1e-9
    assert estimate.upper_bound == 1.0
    assert rank_one_lower_bound(m, n, tol).bound < estimate.lower_bound - 0.1


def test_kk_estimate_identical_nests(tol):
    m = nest_from_flag([0, 1, 3], np.eye(3), tol)
    estimate = kk_distance_estimate(m, m, trials=2, seed=0, tol=tol)
    assert estimate.lower_bound < 1e-10
    assert estimate.upper_bound == 0.0


def test_kk_estimate_is_deterministic(rng, tol):
    m, n = random_nest(4, rng, tol), random_nest(4, rng, tol)
    first = kk_distance_estimate(m, n, trials=3, seed=5, tol=tol, max_iter=50)
    second = kk_distance_estimate(m, n, trials=3, seed=5, tol=tol, max_iter=50)
    assert first.lower_bound == second.lower_bound
    assert np.array_equal(first.witness, second.witness)


def test_kk_estimate_dominates_rank_one(rng, tol):
    for _ in range(10):
        dim = int(rng.integers(2, 6))
        m, n = random_nest(dim, rng, tol), random_nest(dim, rng, tol)
        estimate = kk_distance_estimate(m, n, trials=2, seed=1, tol=tol, max_iter=50)
        assert estimate.lower_bound >= rank_one_lower_bound(m, n, tol).bound - 1e-10
        assert estimate.lower_bound <= 1 + 1e-10
        assert spectral_norm(estimate.witness) <= 1 + 1e-12
        home = m if estimate.side == "m" else n
        assert contains(estimate.witness, home, tol).member


def test_distance_one_orthogonal_lines(tol):
    m = nest_from_flag([0, 1, 3], np.eye(3), tol)
    n = nest_from_flag([0, 1, 3], np.eye(3)[:, [1, 0, 2]], tol)
    certificate = distance_one_certificate(m, n, tol)
    assert certificate.case == 2
    assert certificate.delta == pytest.approx(1.0)
    assert certificate.achieved >= 1 - 1e-8
    best = certificate.witnesses[0]
    home = m if best.side == "m" else n
    assert contains(best.operator, home, tol).member
    assert spectral_norm(best.operator) == pytest.approx(1.0)


def test_distance_one_against_trivial_nest(tol):
    m = nest_from_flag([0, 1, 2], np.eye(2), tol)
    trivial = nest_from_flag([0, 2], np.eye(2), tol)
    certificate = distance_one_certificate(m, trivial, tol)
    assert certificate.achieved >= 1 - 1e-8


def test_distance_one_random_pairs(rng, tol):
    for _ in range(30):
        m, n = distance_one_pair(int(rng.integers(2, 9)), rng, tol)
        certificate = distance_one_certificate(m, n, tol)
        assert certificate.achieved >= 1 - 1e-8
        values = [w.value for w in certificate.witnesses]
        assert values == sorted(values, reverse=True)


def test_distance_one_requires_distance_one(tol):
    m, n = example_nests(0.8, tol)
    with pytest.raises(NotDistanceOneError):
        distance_one_certificate(m, n, tol)


def test_distance_one_tries_nearby_pairs_in_both_directions(tol):
    m = nest_from_flag([0, 1, 2, 3], np.eye(3), tol)
    n = nest_from_flag([0, 1, 3], np.eye(3), tol)
    certificate = distance_one_certificate(m, n, tol)
    assert certificate.achieved >= 1 - 1e-8
    assert {w.side for w in certificate.witnesses} == {"m", "n"}
    for witness in certificate.witnesses:
        home = m if witness.side == "m" else n
        assert contains(witness.operator, home, tol).member
    reverse = distance_one_certificate(n, m, tol)
    assert reverse.achieved == pytest.approx(certificate.achieved)
    assert sorted(w.value for w in reverse.witnesses) == pytest.approx(
        sorted(w.value for w in certificate.witnesses)
    )
