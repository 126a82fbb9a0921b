"""Geometry of two subspaces.

Distances between projections, the canonical two-projection form, the gap
between a projection and the partial isometry of ``QP``, complement ranks of
orthogonal pairs, and uniqueness of the closest element in a chain.
"""

import logging
import math
from collections.abc import Sequence
from typing import NamedTuple

import numpy as np
import scipy.linalg

from nestlab.exceptions import (
    DimensionMismatchError,
    NotOrthogonalError,
    TooFarError,
    UniquenessViolatedError,
)
from nestlab.linalg import (
    adjoint,
    orthogonal_complement,
    orthonormalize,
    polar_partial_isometry,
    projector,
    range_basis,
    rank_tol,
    spectral_norm,
)
from nestlab.schemas.common import Tolerances, resolve
from nestlab.schemas.projection import HalmosDecomposition, Projection, RankCheckReport

logger = logging.getLogger(__name__)


class ProjectionDistance(NamedTuple):
    d_pq_perp: float
    d_pperp_q: float
    d: float


class IsometryGap(NamedTuple):
    gap: float
    predicted: float


def check_same_dim(*projections: Projection) -> int:
    dims = {p.dim for p in projections}
    if len(dims) != 1:
        first, *rest = sorted(dims)
        raise DimensionMismatchError(first, rest[0])
    return dims.pop()


def projection_from_basis(vectors, tol: Tolerances | None = None) -> Projection:
    """Orthogonal projection onto the column span of *vectors*.

    Raises:
        RankDeficientError: If the columns are linearly dependent.
    """
    tol = resolve(tol)
    q = orthonormalize(vectors, tol)
    return Projection.from_matrix(projector(q), tol)


def proj_distance(p: Projection, q: Projection) -> float:
    check_same_dim(p, q)
    return spectral_norm(p.p - q.p)


def proj_distance_components(p: Projection, q: Projection) -> ProjectionDistance:
    """Return ``(‖P Q⊥‖, ‖P⊥ Q‖, ‖P − Q‖)``.

    ``P − Q = P Q⊥ − P⊥ Q`` with orthogonal domains and ranges, so the last
    entry is the maximum of the first two; below distance 1 they coincide.
    """
    check_same_dim(p, q)
    return ProjectionDistance(
        d_pq_perp=spectral_norm(p.p @ q.perp),
        d_pperp_q=spectral_norm(p.perp @ q.p),
        d=spectral_norm(p.p - q.p),
    )


def _full_svd(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows, cols = a.shape
    if rows == 0 or cols == 0:
        return np.eye(rows, dtype=complex), np.zeros(0), np.eye(cols, dtype=complex)
    return scipy.linalg.svd(a, full_matrices=True)


def halmos_decompose(
    p: Projection, q: Projection, tol: Tolerances | None = None
) -> HalmosDecomposition:
    """Canonical decomposition of the pair ``(P, Q)``.

    Principal vectors come from the SVD of ``Bp* Bq`` for orthonormal range
    bases.  A principal vector ``x`` of ``ran P`` is put in ``H11`` when
    ``‖Q⊥x‖ <= rank_rel``, in ``H10`` when its cosine is at most ``rank_rel``,
    and in the generic part otherwise.  Sines are measured directly rather
    than as ``sqrt(1 - c²)`` to keep small angles accurate.
    """
    tol = resolve(tol)
    n = check_same_dim(p, q)
    bp = range_basis(p.p, tol)
    bq = range_basis(q.p, tol)
    y, sigma, zh = _full_svd(adjoint(bp) @ bq)
    x_all = bp @ y
    w_all = bq @ adjoint(zh)
    n_pairs = sigma.size

    h10, h01, h11, generic_x, generic_e = [], [], [], [], []
    cosines, sines = [], []
    for i in range(x_all.shape[1]):
        x = x_all[:, i]
        cosine = float(sigma[i]) if i < n_pairs else 0.0
        sine = float(np.linalg.norm(x - q.p @ x))
        if sine <= tol.rank_rel:
            h11.append(x)
        elif cosine <= tol.rank_rel:
            h10.append(x)
            if i < n_pairs:
                h01.append(w_all[:, i])
        else:
            w = w_all[:, i]
            residual = w - p.p @ w
            s = float(np.linalg.norm(residual))
            generic_x.append(x)
            generic_e.append(residual / s)
            cosines.append(cosine)
            sines.append(s)
    # columns of Z with no partner in ran P lie in ker P ∩ ran Q
    for j in range(n_pairs, w_all.shape[1]):
        h01.append(w_all[:, j])

    groups = [h10, h01, h11, generic_x, generic_e]
    spanned = [np.column_stack(g) if g else np.zeros((n, 0), complex) for g in groups]
    collected = np.hstack(spanned)
    h00 = orthogonal_complement(collected, tol)
    w = np.hstack([h00, *spanned])
    logger.debug(
        "halmos: d00=%d d10=%d d01=%d d11=%d generic=%d",
        h00.shape[1], len(h10), len(h01), len(h11), len(generic_x),
    )
    return HalmosDecomposition.model_validate(
        {
            "w": w,
            "d00": h00.shape[1],
            "d10": len(h10),
            "d01": len(h01),
            "d11": len(h11),
            "angles": [math.atan2(s, c) for c, s in zip(cosines, sines, strict=True)],
            "c_diag": cosines,
            "s_diag": sines,
        },
        context={"tol": tol},
    )


def principal_angles(p: Projection, q: Projection, tol: Tolerances | None = None) -> list[float]:
    """Angles of the generic part of ``(P, Q)``, in increasing order."""
    return sorted(halmos_decompose(p, q, tol).angles)


def polar_isometry_gap(
    p: Projection, q: Projection, tol: Tolerances | None = None
) -> IsometryGap:
    """Distance from ``P`` to the partial isometry ``U`` of ``QP``.

    With ``‖P − Q‖ = sin θ`` the gap is ``2 sin(θ/2)``, strictly below ``√2``.

    Raises:
        TooFarError: If ``‖P − Q‖ >= 1 - eq_abs``.
    """
    tol = resolve(tol)
    distance = proj_distance(p, q)
    threshold = 1.0 - tol.eq_abs
    if distance >= threshold:
        raise TooFarError(distance, threshold, label="‖P − Q‖")
    u, _ = polar_partial_isometry(q.p @ p.p, tol)
    gap = spectral_norm(u - p.p)
    predicted = 2.0 * math.sin(math.asin(min(distance, 1.0)) / 2.0)
    return IsometryGap(gap, predicted)


def rank_complement_check(
    p1: Projection,
    p2: Projection,
    q1: Projection,
    q2: Projection,
    tol: Tolerances | None = None,
) -> RankCheckReport:
    """Compare ``rank (P1+P2)^⊥`` with ``rank (Q1+Q2)^⊥``.

    Builds ``U = U1 + U2`` from the polar decompositions of ``Q_i P_i``.  Each
    ``U_i`` lies within ``2 sin(θ_i/2)`` of ``P_i``, so ``U`` is within ``√2`` of
    ``P1 + P2`` and its index, computed here by rank counting, vanishes.

    Raises:
        NotOrthogonalError: If ``P1 P2`` or ``Q1 Q2`` is not zero.
        TooFarError: If ``‖P_i − Q_i‖ >= 1 - eq_abs``; the error carries the
            complement ranks, which are then unconstrained.
    """
    tol = resolve(tol)
    n = check_same_dim(p1, p2, q1, q2)
    for label, a, b in (("P1, P2", p1, p2), ("Q1, Q2", q1, q2)):
        overlap = spectral_norm(a.p @ b.p)
        if overlap >= tol.eq_abs:
            raise NotOrthogonalError(label, overlap)

    p_sum = p1.p + p2.p
    q_sum = q1.p + q2.p
    rank_p = rank_tol(p_sum, tol)
    rank_q = rank_tol(q_sum, tol)
    threshold = 1.0 - tol.eq_abs
    for label, a, b in (("‖P1 − Q1‖", p1, q1), ("‖P2 − Q2‖", p2, q2)):
        distance = proj_distance(a, b)
        if distance >= threshold:
            raise TooFarError(distance, threshold, label=label, ranks=(n - rank_p, n - rank_q))

    u1, _ = polar_partial_isometry(q1.p @ p1.p, tol)
    u2, _ = polar_partial_isometry(q2.p @ p2.p, tol)
    u = u1 + u2
    gap1 = spectral_norm(u1 - p1.p)
    gap2 = spectral_norm(u2 - p2.p)
    rank_u = rank_tol(u, tol)
    nullity = rank_p - rank_u
    codimension = rank_q - rank_u
    return RankCheckReport(
        rank_p_complement=n - rank_p,
        rank_q_complement=n - rank_q,
        u=u,
        gap=spectral_norm(u - p_sum),
        gap_bound=math.hypot(gap1, gap2),
        index=nullity - codimension,
    )


def nearest_in_chain(
    p: Projection, chain: Sequence[Projection], tol: Tolerances | None = None
) -> int | None:
    """Index of the unique chain element within distance ``1 - eq_abs`` of *p*.

    Among two comparable projections at most one can be closer than 1 to any
    given projection, so finding two candidates means the tolerances broke
    down.

    Raises:
        UniquenessViolatedError: If more than one element qualifies.
    """
    tol = resolve(tol)
    threshold = 1.0 - tol.eq_abs
    distances = [proj_distance(p, element) for element in chain]
    candidates = [i for i, d in enumerate(distances) if d < threshold]
    if len(candidates) > 1:
        raise UniquenessViolatedError(candidates, [distances[i] for i in candidates])
    return candidates[0] if candidates else None


def closest_pair_check(p: Projection, q1: Projection, q2: Projection) -> float:
    """``max(‖P − Q1‖, ‖P − Q2‖)`` for ``Q1 < Q2``; this is always 1."""
    return max(proj_distance(p, q1), proj_distance(p, q2))
