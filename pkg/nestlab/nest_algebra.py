"""Nest algebras: membership, the Arveson distance formula, nearest elements,
distance estimates between two nest algebras, the distance-one certificate and
the ``C²`` family of close nests with far-apart algebras.

``T(N)`` is the algebra of operators leaving every element of ``N`` invariant;
in a basis adapted to ``N`` it is the block upper-triangular matrices.
"""

import logging
import math
from typing import NamedTuple

import numpy as np
import scipy.linalg

from nestlab.exceptions import (
    DimensionMismatchError,
    NotDistanceOneError,
    OutOfRangeError,
)
from nestlab.linalg import (
    adjoint,
    as_complex_matrix,
    orthogonal_complement,
    range_basis,
    spectral_norm,
    top_singular_pair,
)
from nestlab.nests import nest_distance, nest_distance_matrix, nest_from_flag, successor
from nestlab.schemas.algebra import (
    AlgebraElement,
    CounterexampleInstance,
    DistanceCertificate,
    KKEstimate,
    RankOneWitness,
)
from nestlab.schemas.common import Tolerances, resolve
from nestlab.schemas.nest import Nest

logger = logging.getLogger(__name__)

# singular values this close to the completion norm count as attaining it
_PARROTT_CUTOFF = 64 * np.finfo(float).eps

INV_SQRT2 = 1.0 / math.sqrt(2.0)


class Membership(NamedTuple):
    member: bool
    residual: float


class ArvesonDistance(NamedTuple):
    distance: float
    index: int


class RankOneBound(NamedTuple):
    """Best lower bound ``‖P_M⊥ P_{N₊}‖ ‖P_M P_N⊥‖`` over all pairs.

    ``side`` names the nest whose algebra contains ``ζη*``; ``m_index`` and
    ``n_index`` index the pair in nests ``m`` and ``n`` respectively.
    """

    bound: float
    zeta: np.ndarray
    eta: np.ndarray
    m_index: int
    n_index: int
    side: str

    @property
    def operator(self) -> np.ndarray:
        return np.outer(self.zeta, np.conj(self.eta))


def _operator(t, n: Nest) -> np.ndarray:
    t = as_complex_matrix(t, "operator")
    if t.shape != (n.dim, n.dim):
        raise DimensionMismatchError(t.shape, (n.dim, n.dim), what="operator shape")
    return t


def _check_nests(m: Nest, n: Nest) -> None:
    if m.dim != n.dim:
        raise DimensionMismatchError(m.dim, n.dim)


def corner_norms(t, n: Nest) -> list[float]:
    """``‖P_k⊥ T P_k‖`` for every element of the nest."""
    t = _operator(t, n)
    return [spectral_norm(e.perp @ t @ e.p) for e in n.elements]


def arveson_distance(t, n: Nest) -> ArvesonDistance:
    """Distance from *t* to ``T(n)``: the largest corner ``‖P⊥ T P‖``."""
    norms = corner_norms(t, n)
    index = int(np.argmax(norms))
    return ArvesonDistance(float(norms[index]), index)


def contains(t, n: Nest, tol: Tolerances | None = None) -> Membership:
    """Whether *t* leaves every element of *n* invariant, with the residual."""
    tol = resolve(tol)
    residual = arveson_distance(t, n).distance
    return Membership(residual < tol.eq_abs, residual)


def algebra_element(t, n: Nest) -> AlgebraElement:
    return AlgebraElement(t=_operator(t, n), nest=n, residual=arveson_distance(t, n).distance)


def _block_slices(n: Nest) -> list[slice]:
    ranks = n.ranks
    return [slice(lo, hi) for lo, hi in zip(ranks, ranks[1:])]


def _upper_mask(n: Nest) -> np.ndarray:
    blocks = _block_slices(n)
    mask = np.zeros((n.dim, n.dim), dtype=bool)
    for i, rows in enumerate(blocks):
        for cols in blocks[i:]:
            mask[rows, cols] = True
    return mask


def _parrott_block(b: np.ndarray, a: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Top-right block ``X`` minimising ``‖[[B, X], [A, C]]‖``.

    The minimum is ``μ = max(‖[B; A]‖, ‖[A, C]‖)``, attained by
    ``X = −B (μ² − A*A)⁺ A* C``.
    """
    if a.size == 0:
        return np.zeros((b.shape[0], c.shape[1]), dtype=complex)
    mu = max(spectral_norm(np.vstack([b, a])), spectral_norm(np.hstack([a, c])))
    if mu == 0.0:
        return np.zeros((b.shape[0], c.shape[1]), dtype=complex)
    u, sigma, vh = scipy.linalg.svd(a, full_matrices=False)
    gaps = (mu - sigma) * (mu + sigma)
    keep = (mu - sigma) > _PARROTT_CUTOFF * mu
    weights = np.zeros_like(sigma)
    weights[keep] = sigma[keep] / gaps[keep]
    return -(b @ adjoint(vh)) @ np.diag(weights) @ (adjoint(u) @ c)


def nearest_element(t, n: Nest, tol: Tolerances | None = None) -> np.ndarray:
    """An element ``A`` of ``T(n)`` with ``‖T − A‖`` equal to the Arveson distance.

    Works in a basis adapted to *n*.  The strictly lower blocks of ``T − A``
    are fixed; the remaining blocks are completed one at a time, diagonal by
    diagonal, so that each step is a one-block Parrott completion whose norm
    equals the larger of two already completed corners.
    """
    tol = resolve(tol)
    t = _operator(t, n)
    basis = n.adapted_basis(tol)
    local = adjoint(basis) @ t @ basis
    blocks = _block_slices(n)
    size = len(blocks)
    mask = _upper_mask(n)
    x = np.where(mask, 0.0, local)

    for offset in range(size):
        for i in range(size - offset):
            j = i + offset
            rows, cols = blocks[i], blocks[j]
            below = slice(blocks[i].stop, n.dim)
            left = slice(0, blocks[j].start)
            x[rows, cols] = _parrott_block(x[rows, left], x[below, left], x[below, cols])

    nearest = basis @ (local - x) @ adjoint(basis)
    return nearest


def _unit_vector_in(a: np.ndarray, subspace: np.ndarray, tol: Tolerances) -> np.ndarray:
    """Unit vector of ``ran(subspace)`` maximising ``‖a v‖`` (``a = X · subspace``)."""
    if spectral_norm(a) > tol.eq_abs:
        _, _, v = top_singular_pair(a)
        v = subspace @ v
        return v / np.linalg.norm(v)
    return range_basis(subspace, tol)[:, 0]


def _rank_one_witness(
    m_elem, n_lower, n_upper, measured: Nest, side: str, tol: Tolerances
) -> RankOneWitness:
    """``ζ ∈ N_upper`` maximising ``‖P_M⊥ ζ‖``, ``η ⟂ N_lower`` maximising ``‖P_M η‖``."""
    zeta = _unit_vector_in(m_elem.perp @ n_upper.p, n_upper.p, tol)
    eta = _unit_vector_in(m_elem.p @ n_lower.perp, n_lower.perp, tol)
    value = arveson_distance(np.outer(zeta, np.conj(eta)), measured).distance
    return RankOneWitness.model_validate(
        {"zeta": zeta, "eta": eta, "side": side, "value": value}, context={"tol": tol}
    )


def rank_one_lower_bound(m: Nest, n: Nest, tol: Tolerances | None = None) -> RankOneBound:
    """Largest ``‖P_M⊥ P_{N₊}‖ ‖P_M P_N⊥‖`` over all pairs, in both directions.

    ``ζη*`` with ``ζ ∈ N₊`` and ``η ⟂ N`` is a norm-one element of ``T(N)``
    whose distance to ``T(M)`` is at least this product.
    """
    tol = resolve(tol)
    _check_nests(m, n)
    best = None
    for side, witness_nest, measured in (("n", n, m), ("m", m, n)):
        for i, element in enumerate(measured.elements):
            for j in range(witness_nest.size - 1):
                lower, upper = witness_nest.elements[j], witness_nest.elements[j + 1]
                value = spectral_norm(element.perp @ upper.p) * spectral_norm(element.p @ lower.perp)
                if best is None or value > best[0]:
                    best = (value, side, i, j)

    value, side, i, j = best
    witness_nest, measured = (n, m) if side == "n" else (m, n)
    element = measured.elements[i]
    lower, upper = witness_nest.elements[j], witness_nest.elements[j + 1]
    zeta = _unit_vector_in(element.perp @ upper.p, upper.p, tol)
    eta = _unit_vector_in(element.p @ lower.perp, lower.perp, tol)
    m_index, n_index = (i, j) if side == "n" else (j, i)
    return RankOneBound(value, zeta, eta, m_index, n_index, side)


def example_witness_value(s: float, a: float) -> float:
    """``d(T_a, T(N)) = 2acs + (1 − a²)s²`` for the ``C²`` family; peaks at ``a = c/s``."""
    c = math.sqrt(max(0.0, 1.0 - s * s))
    return 2.0 * a * c * s + (1.0 - a * a) * s * s


def closed_form_witness(
    source: Nest, target: Nest, tol: Tolerances | None = None
) -> tuple[np.ndarray, float] | None:
    """Optimal two-by-two witness in ``T(source)`` against ``T(target)``.

    Both nests must be maximal nests on ``C²``.  After a unitary change of
    basis the source line is ``Ce₁`` and the target line ``C(c, s)`` with
    ``c, s >= 0``; the witness ``[[a, 1 − a²], [0, −a]]`` uses
    ``a = min(1, c/s)``.  Returns ``None`` for other nests.
    """
    tol = resolve(tol)
    if source.dim != 2 or source.ranks != [0, 1, 2] or target.ranks != [0, 1, 2]:
        return None
    u = range_basis(source.elements[1].p, tol)[:, 0]
    v = range_basis(target.elements[1].p, tol)[:, 0]
    u_perp = orthogonal_complement(u.reshape(-1, 1), tol)[:, 0]
    overlap = np.vdot(u, v)
    if abs(overlap) > 0.0:
        v = v * np.conj(overlap) / abs(overlap)
    beta = np.vdot(u_perp, v)
    if abs(beta) <= tol.eq_abs:
        return None
    u_perp = u_perp * beta / abs(beta)
    c = float(abs(np.vdot(u, v)))
    s = float(abs(beta))
    a = min(1.0, c / s)
    basis = np.column_stack([u, u_perp])
    t = basis @ np.array([[a, 1.0 - a * a], [0.0, -a]]) @ adjoint(basis)
    return t, arveson_distance(t, target).distance


def _unit_ball(t: np.ndarray) -> np.ndarray:
    return t / max(1.0, spectral_norm(t))


def _ascend(
    source: Nest, measured: Nest, rng: np.random.Generator, max_iter: int, tol: Tolerances
) -> tuple[float, np.ndarray]:
    """Projected ascent of ``d(T, T(measured))`` over the unit ball of ``T(source)``."""
    basis = source.adapted_basis(tol)
    mask = _upper_mask(source)
    shape = (source.dim, source.dim)
    coords = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * mask
    t = _unit_ball(basis @ coords @ adjoint(basis))
    value, index = arveson_distance(t, measured)
    step = 0.5
    for _ in range(max_iter):
        if step < 1e-12 or value == 0.0:
            break
        element = measured.elements[index]
        _, left, right = top_singular_pair(element.perp @ t @ element.p)
        gradient = np.outer(element.perp @ left, np.conj(element.p @ right))
        direction = basis @ ((adjoint(basis) @ gradient @ basis) * mask) @ adjoint(basis)
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            break
        candidate = _unit_ball(t + step * direction / norm)
        candidate_value, candidate_index = arveson_distance(candidate, measured)
        if candidate_value > value:
            improvement = candidate_value - value
            t, value, index = candidate, candidate_value, candidate_index
            if improvement <= 1e-10 * value:
                break
        else:
            step /= 2.0
    return value, t


def kk_distance_estimate(
    m: Nest,
    n: Nest,
    trials: int = 8,
    seed: int = 0,
    tol: Tolerances | None = None,
    max_iter: int = 200,
) -> KKEstimate:
    """Certified lower bound for the Kadison–Kastler distance of ``T(m)`` and ``T(n)``.

    The bound is the best of three feasible witnesses: the rank-one bound,
    multi-start projected ascent in each unit ball, and for maximal nests on
    ``C²`` the closed-form two-by-two witness.  Every reported value is the
    exact distance of a norm-one algebra element to the other algebra, so it
    is a lower bound; the true distance is never claimed.
    """
    tol = resolve(tol)
    _check_nests(m, n)
    nests = {"m": (m, n), "n": (n, m)}

    rank_one = rank_one_lower_bound(m, n, tol)
    witness = rank_one.operator
    measured = nests[rank_one.side][1]
    best = (arveson_distance(witness, measured).distance, witness, rank_one.side, "rank_one")

    children = np.random.SeedSequence(seed).spawn(2 * trials)
    for offset, side in enumerate(("m", "n")):
        source, other = nests[side]
        results = [
            _ascend(source, other, np.random.default_rng(children[2 * k + offset]), max_iter, tol)
            for k in range(trials)
        ]
        for value, t in results:
            if value > best[0]:
                best = (value, t, side, "ascent")

    for side in ("m", "n"):
        source, other = nests[side]
        closed = closed_form_witness(source, other, tol)
        if closed is not None and closed[1] > best[0]:
            best = (closed[1], closed[0], side, "closed_form")

    gamma = nest_distance(m, n)
    upper = min(1.0, 2.0 * gamma) if gamma < 0.5 else 1.0
    value, witness, side, method = best
    logger.debug("kk estimate: lower=%.12g upper=%.6g via %s on %s", value, upper, method, side)
    return KKEstimate.model_validate(
        {
            "lower_bound": value,
            "upper_bound": upper,
            "witness": witness,
            "side": side,
            "method": method,
            "trials": trials,
            "seed": seed,
        },
        context={"tol": tol},
    )


def _distance_one_element(
    label: str, index: int, outer: Nest, inner: Nest, inner_label: str, tol: Tolerances
) -> DistanceCertificate:
    """Certificate for an element ``M`` of *outer* at distance 1 from all of *inner*."""
    element = outer.elements[index]
    lower = [spectral_norm(element.perp @ e.p) for e in inner.elements]
    upper = [spectral_norm(element.p @ e.perp) for e in inner.elements]
    mins = [min(a, b) for a, b in zip(lower, upper)]
    delta = max(mins)
    if delta >= 1.0 - tol.eq_abs:
        n0 = int(np.argmax(mins))
        chosen = inner.elements[n0]
        witness = _rank_one_witness(element, chosen, chosen, outer, inner_label, tol)
    else:
        n0 = max(j for j, value in enumerate(lower) if value <= delta + tol.eq_abs)
        witness = _rank_one_witness(
            element, inner.elements[n0], successor(inner, n0), outer, inner_label, tol
        )
    logger.debug("distance-one case 2: %s_%d delta=%.6g N0=%d", label, index, delta, n0)
    return DistanceCertificate.model_validate(
        {
            "case": 2,
            "side": label,
            "m_index": index,
            "delta": delta,
            "n0_index": n0,
            "witnesses": [witness],
            "achieved": witness.value,
        },
        context={"tol": tol},
    )


def _nearby_pairs_certificate(
    label: str, outer: Nest, inner: Nest, inner_label: str, table: np.ndarray, tol: Tolerances
) -> DistanceCertificate | None:
    """Certificate from the closest-to-1 pair ``‖P_M − P_N‖ = t < 1``, worth ``t²``.

    ``M`` ranges over *outer* and ``N`` over the interior of *inner*, with
    ``table[i, j] = ‖P_{M_i} − P_{N_j}‖``.  The witness lies in ``T(inner)``.
    """
    interior = table[:, 1:-1]
    nearby = interior < 1.0 - tol.eq_abs
    if not nearby.any():
        return None
    i, j = np.unravel_index(np.argmax(np.where(nearby, interior, -1.0)), interior.shape)
    chosen = inner.elements[j + 1]
    witness = _rank_one_witness(outer.elements[i], chosen, chosen, outer, inner_label, tol)
    return DistanceCertificate.model_validate(
        {
            "case": 1,
            "side": label,
            "m_index": int(i),
            "witnesses": [witness],
            "achieved": witness.value,
        },
        context={"tol": tol},
    )


def distance_one_certificate(m: Nest, n: Nest, tol: Tolerances | None = None) -> DistanceCertificate:
    """Witnesses that ``d(T(m), T(n)) = 1`` for nests at distance 1.

    Follows the two cases of the argument.  If some element ``M`` is at
    distance 1 from every element of the other nest, compute
    ``δ = max_N min{‖P_M⊥ P_N‖, ‖P_M P_N⊥‖}``; when ``δ = 1`` the pair attaining
    it gives the witness, otherwise ``N₀``, the largest element with
    ``‖P_M⊥ P_N‖ <= δ``, and its successor do.  Nearby pairs give the case-1
    witness.  Both nests are tried in both roles; witnesses are returned best
    first and the certificate fields describe the best one.

    Raises:
        NotDistanceOneError: If ``d(m, n) < 1 - eq_abs``.
    """
    tol = resolve(tol)
    _check_nests(m, n)
    table = nest_distance_matrix(m, n)
    distance = float(max(table.min(axis=1).max(), table.min(axis=0).max()))
    if distance < 1.0 - tol.eq_abs:
        raise NotDistanceOneError(distance)

    certificates = []
    roles = (("m", m, n, "n", table), ("n", n, m, "m", table.T))
    for label, outer, inner, inner_label, rows in roles:
        for i in np.flatnonzero(rows.min(axis=1) >= 1.0 - tol.eq_abs):
            certificates.append(_distance_one_element(label, int(i), outer, inner, inner_label, tol))
        nearby = _nearby_pairs_certificate(label, outer, inner, inner_label, rows, tol)
        if nearby is not None:
            certificates.append(nearby)

    best = max(certificates, key=lambda c: c.achieved)
    witnesses = sorted(
        (w for c in certificates for w in c.witnesses), key=lambda w: w.value, reverse=True
    )
    return DistanceCertificate.model_validate(
        {**dict(best), "witnesses": witnesses, "achieved": witnesses[0].value},
        context={"tol": tol},
    )



def counterexample_family(
    s: float, tol: Tolerances | None = None, a: float | None = None
) -> CounterexampleInstance:
    """Nests on ``C²`` at distance ``s < 1`` whose algebras are at distance 1.

    ``M = {0, Ce₁, C²}``, ``N = {0, C(c, s), C²}`` with ``c = sqrt(1 − s²)`` and
    the witness ``T = [[a, 1 − a²], [0, −a]] ∈ T(M)``.  ``T`` has norm 1 (the
    symmetrised matrix has characteristic polynomial ``(λ − 1)(λ + a²)``) and
    with ``a = c/s`` its distance to ``T(N)`` is ``c² + s² = 1``.  Passing *a*
    evaluates another member of the witness family.

    Raises:
        OutOfRangeError: If *s* is outside ``[1/√2, 1)`` or *a* outside ``[0, 1]``.
    """
    tol = resolve(tol)
    if not (INV_SQRT2 - tol.eq_abs <= s < 1.0):
        raise OutOfRangeError("s", s, INV_SQRT2, 1.0)
    c = math.sqrt(1.0 - s * s)
    if a is None:
        a = min(1.0, c / s)
    elif not 0.0 <= a <= 1.0:
        raise OutOfRangeError("a", a, 0.0, 1.0)
    m_nest = nest_from_flag([0, 1, 2], np.eye(2), tol)
    n_nest = nest_from_flag([0, 1, 2], np.array([[c, -s], [s, c]]), tol)
    t = np.array([[a, 1.0 - a * a], [0.0, -a]], dtype=complex)
    instance = CounterexampleInstance.model_validate(
        {
            "s": s,
            "c": c,
            "a": a,
            "m_nest": m_nest,
            "n_nest": n_nest,
            "t": t,
            "t_norm": spectral_norm(t),
            "nest_dist": nest_distance(m_nest, n_nest),
            "closed_form": example_witness_value(s, a),
            "alg_dist_lb": arveson_distance(t, n_nest).distance,
        },
        context={"tol": tol},
    )
    logger.debug(
        "counterexample s=%.6g: ‖T‖=%.15g d(M,N)=%.15g d(T,T(N))=%.15g",
        s, instance.t_norm, instance.nest_dist, instance.alg_dist_lb,
    )
    return instance
