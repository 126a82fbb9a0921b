"""Finite nests: construction, distance, order isomorphisms and similarities.

Every supremum and infimum over a nest is an exact max/min over the finite
list of elements.
"""

import itertools
import logging
import warnings
from collections.abc import Sequence

import numpy as np
import scipy.linalg

from nestlab.exceptions import (
    BadFlagError,
    DimensionMismatchError,
    NoSuccessorError,
    NotInvertibleError,
    OutOfRangeError,
    SimilarityBoundWarning,
    SimilarityFallbackWarning,
    TooFarError,
)
from nestlab.linalg import (
    adjoint,
    as_complex_matrix,
    orthonormalize,
    polar_partial_isometry,
    projector,
    range_basis,
    rank_tol,
    singular_values,
    spectral_norm,
)
from nestlab.projections import nearest_in_chain, proj_distance
from nestlab.schemas.common import Tolerances, resolve
from nestlab.schemas.nest import Atom, Nest, OrderIsomorphism, Similarity
from nestlab.schemas.projection import Projection

logger = logging.getLogger(__name__)


def nest_from_flag(dims: Sequence[int], basis, tol: Tolerances | None = None) -> Nest:
    """Nest whose ``k``-th element is spanned by the first ``dims[k]`` basis columns.

    Raises:
        BadFlagError: If *dims* does not increase strictly from 0 to the
            ambient dimension, or the basis is not square.
        RankDeficientError: If the basis columns are dependent.
    """
    tol = resolve(tol)
    dims = [int(d) for d in dims]
    basis = as_complex_matrix(basis, "basis")
    dim = basis.shape[0]
    if basis.shape[1] != dim:
        raise BadFlagError(dims, f"basis must be {dim}x{dim}, got {basis.shape}")
    if not dims or dims[0] != 0 or dims[-1] != dim:
        raise BadFlagError(dims, f"dims must start at 0 and end at {dim}")
    if any(b <= a for a, b in zip(dims, dims[1:])):
        raise BadFlagError(dims, "dims must be strictly increasing")
    q = orthonormalize(basis, tol)
    elements = [Projection.from_matrix(projector(q[:, :k]), tol) for k in dims]
    return Nest.model_validate({"dim": dim, "elements": elements}, context={"tol": tol})


def atoms(n: Nest, tol: Tolerances | None = None) -> list[Atom]:
    """One atom per consecutive pair of elements; their ranks sum to ``dim``."""
    out = []
    for i, a in enumerate(n.atom_projections()):
        projection = Projection.from_matrix(a, tol)
        out.append(Atom(index=i, projection=projection, rank=projection.rank))
    return out


def successor(n: Nest, k: int) -> Projection:
    """``N₊`` for the element at index *k*; for a finite nest this is the next one.

    Raises:
        NoSuccessorError: If *k* is the top element.
        IndexError: If *k* is not an index of the nest.
    """
    if not 0 <= k < n.size:
        raise IndexError(f"nest has no element {k}")
    if k == n.size - 1:
        raise NoSuccessorError(k)
    return n.elements[k + 1]


def nest_distance_matrix(m: Nest, n: Nest) -> np.ndarray:
    """Table ``D[i, j] = ‖P_{M_i} − P_{N_j}‖``."""
    if m.dim != n.dim:
        raise DimensionMismatchError(m.dim, n.dim)
    return np.array([[proj_distance(a, b) for b in n.elements] for a in m.elements])


def nest_distance(m: Nest, n: Nest) -> float:
    """Hausdorff distance between the two sets of nest projections."""
    table = nest_distance_matrix(m, n)
    return float(max(table.min(axis=1).max(), table.min(axis=0).max()))


def recover_order_iso(m: Nest, n: Nest, tol: Tolerances | None = None) -> OrderIsomorphism:
    """The unique order isomorphism ``θ`` with ``‖θ − id‖ = d(M, N)``.

    Each ``M`` is paired with the only element of ``N`` closer than 1.  The
    result also records the paired atom ranks, which agree.

    Raises:
        TooFarError: If ``d(M, N) >= 1 - eq_abs``.
        UniquenessViolatedError: If the tolerances admit two partners.
    """
    tol = resolve(tol)
    distance = nest_distance(m, n)
    threshold = 1.0 - tol.eq_abs
    if distance >= threshold:
        raise TooFarError(distance, threshold, label="d(M, N)")
    pairing = []
    for i, element in enumerate(m.elements):
        j = nearest_in_chain(element, n.elements, tol)
        if j is None:
            raise TooFarError(distance, threshold, label=f"distance from M_{i} to N")
        pairing.append((i, j))
    gamma = max(proj_distance(m.elements[i], n.elements[j]) for i, j in pairing)
    atom_ranks = [
        (m.ranks[i2] - m.ranks[i1], n.ranks[j2] - n.ranks[j1])
        for (i1, j1), (i2, j2) in zip(pairing, pairing[1:])
    ]
    logger.debug("order isomorphism: gamma=%.3e pairing=%s", gamma, pairing)
    return OrderIsomorphism(
        source=m, target=n, pairing=pairing, gamma=gamma, atom_ranks=atom_ranks
    )


def preserves_dimension(iso: OrderIsomorphism, tol: Tolerances | None = None) -> bool:
    """Check ``rank(P_{M2} − P_{M1}) = rank(P_{θ(M2)} − P_{θ(M1)})`` for all ``M1 < M2``."""
    tol = resolve(tol)
    elements = iso.source.elements
    for i1, i2 in itertools.combinations(range(len(elements)), 2):
        source = rank_tol(elements[i2].p - elements[i1].p, tol)
        target = rank_tol(iso.mapped(i2).p - iso.mapped(i1).p, tol)
        if source != target:
            return False
    return True


def _atom_pairs(iso: OrderIsomorphism, tol: Tolerances) -> list[tuple[np.ndarray, np.ndarray]]:
    """Orthonormal bases of each source atom and its paired target atom."""
    pairs = []
    for i in range(iso.source.size - 1):
        dp = iso.source.elements[i + 1].p - iso.source.elements[i].p
        dq = iso.mapped(i + 1).p - iso.mapped(i).p
        pairs.append((range_basis(dp, tol), range_basis(dq, tol)))
    return pairs


def _atom_product(pairs, dim: int, tol: Tolerances) -> np.ndarray:
    """``S = Σ ΔQ_k ΔP_k``, invertible when every compression is."""
    s = np.zeros((dim, dim), dtype=complex)
    for k, (bp, bq) in enumerate(pairs):
        overlap = adjoint(bq) @ bp
        sigma = singular_values(overlap)
        if sigma.size == 0 or sigma[-1] <= tol.rank_rel:
            raise NotInvertibleError(f"atom {k}: ΔQΔP is singular on ΔP")
        s += bq @ overlap @ adjoint(bp)
    return s


def _atom_unitary(pairs, dim: int) -> np.ndarray:
    """Unitary mapping each source atom onto its target atom, aligned by Procrustes."""
    w = np.zeros((dim, dim), dtype=complex)
    for bp, bq in pairs:
        omega, _ = scipy.linalg.polar(adjoint(bq) @ bp)
        w += bq @ omega @ adjoint(bp)
    return w


def _similarity(s: np.ndarray, gamma: float, construction: str, fallback: bool = False) -> Similarity:
    return Similarity(
        s=s,
        s_minus_i_norm=spectral_norm(s - np.eye(s.shape[0])),
        condition=float(np.linalg.cond(s, 2)),
        gamma=gamma,
        construction=construction,
        fallback=fallback,
    )


def build_similarity(iso: OrderIsomorphism, tol: Tolerances | None = None) -> Similarity:
    """Invertible ``S`` with ``S M = θ(M)`` for every element of the source nest.

    For ``γ < 1/2`` the candidates are ``Σ ΔQ_k ΔP_k`` and its unitary polar
    factor, and the one closer to ``I`` is returned (bound ``‖S − I‖ <= 2γ``).
    Otherwise a unitary carrying atom bases onto atom bases is returned
    (``‖S − I‖ <= 2``).  A singular atom product falls back to the unitary
    with a :class:`SimilarityFallbackWarning`.
    """
    tol = resolve(tol)
    dim = iso.source.dim
    pairs = _atom_pairs(iso, tol)
    if iso.gamma >= 0.5:
        return _similarity(_atom_unitary(pairs, dim), iso.gamma, "atom_unitary")
    try:
        product = _atom_product(pairs, dim, tol)
    except NotInvertibleError as exc:
        warnings.warn(
            f"{exc}; using the unitary construction", SimilarityFallbackWarning, stacklevel=2
        )
        return _similarity(_atom_unitary(pairs, dim), iso.gamma, "atom_unitary", fallback=True)
    unitary, _ = polar_partial_isometry(product, tol)
    candidates = [
        _similarity(product, iso.gamma, "atom_product"),
        _similarity(unitary, iso.gamma, "atom_unitary"),
    ]
    best = min(candidates, key=lambda c: c.s_minus_i_norm)
    logger.debug(
        "similarity: gamma=%.3e product=%.3e unitary=%.3e chose %s",
        iso.gamma, candidates[0].s_minus_i_norm, candidates[1].s_minus_i_norm, best.construction,
    )
    if best.s_minus_i_norm > 2 * iso.gamma + tol.eq_abs:
        warnings.warn(
            f"‖S − I‖ = {best.s_minus_i_norm:.6g} exceeds 2γ = {2 * iso.gamma:.6g}",
            SimilarityBoundWarning,
            stacklevel=2,
        )
    return best


def intertwining_defects(
    similarity: Similarity, iso: OrderIsomorphism, tol: Tolerances | None = None
) -> list[float]:
    """``‖P_{θ(M_k)} − proj(S · basis(M_k))‖`` for every source element."""
    tol = resolve(tol)
    defects = []
    for i, element in enumerate(iso.source.elements):
        image = similarity.s @ range_basis(element.p, tol)
        mapped = projector(orthonormalize(image, tol))
        defects.append(spectral_norm(iso.mapped(i).p - mapped))
    return defects


def random_perturbed_nest(
    n: Nest, strength: float, seed: int, tol: Tolerances | None = None
) -> Nest:
    """``G·N`` for ``G = I + strength·R`` with ``R`` random of unit norm.

    Deterministic in *seed*; the result has the same atom ranks as *n*.

    Raises:
        OutOfRangeError: If *strength* is outside ``[0, 1)``.
    """
    tol = resolve(tol)
    if not 0.0 <= strength < 1.0:
        raise OutOfRangeError("strength", strength, 0.0, 1.0)
    rng = np.random.default_rng(seed)
    r = rng.standard_normal((n.dim, n.dim)) + 1j * rng.standard_normal((n.dim, n.dim))
    g = np.eye(n.dim) + strength * r / spectral_norm(r)
    return nest_from_flag(n.ranks, g @ n.adapted_basis(tol), tol)
