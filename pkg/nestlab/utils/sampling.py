"""Seeded random generators for projections, nests and operators.

Every generator takes a ``numpy.random.Generator`` so callers control
reproducibility; the verify runner spawns one per trial from its seed.
"""

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

from nestlab.linalg import adjoint, projector, spectral_norm
from nestlab.nests import nest_from_flag
from nestlab.schemas.common import Tolerances, resolve
from nestlab.schemas.nest import Nest
from nestlab.schemas.projection import Projection


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary (``dim >= 2``)."""
    return unitary_group.rvs(dim, random_state=rng)


def random_complex_matrix(shape: tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random Hermitian matrix of unit norm."""
    a = random_complex_matrix((dim, dim), rng)
    h = a + adjoint(a)
    return h / spectral_norm(h)


def near_identity_unitary(dim: int, angle: float, rng: np.random.Generator) -> np.ndarray:
    """``exp(i·angle·H)`` for a random unit-norm Hermitian ``H``; ``‖V − I‖ <= angle``."""
    return scipy.linalg.expm(1j * angle * random_hermitian(dim, rng))


def random_projection(
    dim: int, rank: int, rng: np.random.Generator, tol: Tolerances | None = None
) -> Projection:
    u = random_unitary(dim, rng)
    return Projection.from_matrix(projector(u[:, :rank]), tol)


def random_projection_pair(
    dim: int, rng: np.random.Generator, tol: Tolerances | None = None
) -> tuple[Projection, Projection]:
    """A pair of projections on ``C^dim``.

    Half of the pairs are a projection and a small unitary rotation of it (so
    ``‖P − Q‖ < 1``), the rest are independent with independent ranks.
    """
    tol = resolve(tol)
    rank = int(rng.integers(0, dim + 1))
    p = random_projection(dim, rank, rng, tol)
    if rng.random() < 0.5:
        v = near_identity_unitary(dim, float(rng.uniform(0.0, 0.45)), rng)
        return p, Projection.from_matrix(v @ p.p @ adjoint(v), tol)
    return p, random_projection(dim, int(rng.integers(0, dim + 1)), rng, tol)


def orthogonal_quadruple(
    dim: int, rng: np.random.Generator, tol: Tolerances | None = None
) -> tuple[Projection, Projection, Projection, Projection]:
    """``P1 ⟂ P2`` and ``Q_i = V P_i V*`` for one near-identity unitary ``V``.

    ``‖P_i − Q_i‖ <= 2‖V − I‖ < 0.9``, and ``Q1 ⟂ Q2``.
    """
    tol = resolve(tol)
    u = random_unitary(dim, rng)
    r1 = int(rng.integers(0, dim + 1))
    r2 = int(rng.integers(0, dim - r1 + 1))
    p1 = projector(u[:, :r1])
    p2 = projector(u[:, r1 : r1 + r2])
    v = near_identity_unitary(dim, float(rng.uniform(0.0, 0.45)), rng)
    return tuple(
        Projection.from_matrix(m, tol)
        for m in (p1, p2, v @ p1 @ adjoint(v), v @ p2 @ adjoint(v))
    )


def random_flag_dims(dim: int, rng: np.random.Generator) -> list[int]:
    """``[0, ..., dim]`` with a random subset of the intermediate dimensions."""
    inner = [k for k in range(1, dim) if rng.random() < 0.5]
    return [0, *inner, dim]


def random_nest(dim: int, rng: np.random.Generator, tol: Tolerances | None = None) -> Nest:
    return nest_from_flag(random_flag_dims(dim, rng), random_unitary(dim, rng), tol)


def maximal_nest(dim: int, rng: np.random.Generator, tol: Tolerances | None = None) -> Nest:
    return nest_from_flag(list(range(dim + 1)), random_unitary(dim, rng), tol)


def distance_one_pair(
    dim: int, rng: np.random.Generator, tol: Tolerances | None = None
) -> tuple[Nest, Nest]:
    """Two nests on ``C^dim`` at distance exactly 1.

    Either ``{0, Cu, C^dim}`` and ``{0, Cv, C^dim}`` for orthogonal unit
    vectors ``u, v``, or two random nests one of which has an element whose
    rank the other nest never takes (projections of different rank are at
    distance 1).
    """
    tol = resolve(tol)
    u = random_unitary(dim, rng)
    if rng.random() < 0.5:
        swapped = u[:, [1, 0, *range(2, dim)]]
        return nest_from_flag([0, 1, dim], u, tol), nest_from_flag([0, 1, dim], swapped, tol)
    k = int(rng.integers(1, dim))
    inner = [j for j in range(1, dim) if j != k and rng.random() < 0.5]
    m = nest_from_flag([0, k, dim], u, tol)
    n = nest_from_flag([0, *inner, dim], random_unitary(dim, rng), tol)
    if rng.random() < 0.5:
        return n, m
    return m, n
