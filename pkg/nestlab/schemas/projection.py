"""Pydantic schemas for orthogonal projections and pairs of projections.

* :class:`Projection`: a validated Hermitian idempotent matrix.
* :class:`HalmosDecomposition`: the canonical block form of a pair of
  projections: four corner subspaces plus a generic part parameterised by
  principal angles.
* :class:`RankCheckReport`: the outcome of comparing the complement ranks of
  two orthogonal pairs of projections.
"""

import numpy as np
from pydantic import ValidationInfo, model_validator

from nestlab.linalg import adjoint, rank_tol, spectral_norm
from nestlab.schemas.common import (
    ComplexMatrix,
    NestlabModel,
    Tolerances,
    context_tol,
    resolve,
)


class Projection(NestlabModel):
    """An orthogonal projection on ``C^dim``.

    Prefer :meth:`from_matrix`, which fills in ``dim`` and ``rank``::

        p = Projection.from_matrix([[1, 0], [0, 0]])
        p.rank   # 1
        p.perp   # ndarray for I - P

    Attributes:
        p: The square projection matrix.
        dim: Ambient dimension.
        rank: Numerical rank of ``p``.
    """

    p: ComplexMatrix
    dim: int
    rank: int

    @model_validator(mode="after")
    def check_projection(self, info: ValidationInfo):
        """Validate the shape, self-adjointness, idempotence and rank.

        Raises:
            ValueError: If any invariant fails at the ``eq_abs`` slack.
        """
        tol = context_tol(info)
        if self.p.shape != (self.dim, self.dim):
            raise ValueError(f"expected a {self.dim}x{self.dim} matrix, got {self.p.shape}")
        asym = spectral_norm(self.p - adjoint(self.p))
        if asym >= tol.eq_abs:
            raise ValueError(f"matrix is not Hermitian (‖P−P*‖ = {asym:.3e})")
        idem = spectral_norm(self.p @ self.p - self.p)
        if idem >= tol.eq_abs:
            raise ValueError(f"matrix is not idempotent (‖P²−P‖ = {idem:.3e})")
        actual = rank_tol(self.p, tol)
        if actual != self.rank:
            raise ValueError(f"rank {self.rank} does not match numerical rank {actual}")
        return self

    @classmethod
    def from_matrix(cls, p, tol: Tolerances | None = None) -> "Projection":
        matrix = np.asarray(p, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"projection must be square, got shape {matrix.shape}")
        rank = rank_tol(matrix, resolve(tol))
        return cls.model_validate(
            {"p": matrix, "dim": matrix.shape[0], "rank": rank},
            context={"tol": tol},
        )

    @classmethod
    def zero(cls, dim: int) -> "Projection":
        return cls(p=np.zeros((dim, dim)), dim=dim, rank=0)

    @classmethod
    def identity(cls, dim: int) -> "Projection":
        return cls(p=np.eye(dim), dim=dim, rank=dim)

    @property
    def perp(self) -> np.ndarray:
        """The complementary projection ``I - P`` as a matrix."""
        return np.eye(self.dim) - self.p

    def complement(self) -> "Projection":
        return Projection(p=self.perp, dim=self.dim, rank=self.dim - self.rank)


class HalmosDecomposition(NestlabModel):
    """Canonical form of a pair of projections ``(P, Q)``.

    With ``w`` unitary, ``w* P w`` and ``w* Q w`` are block diagonal over
    ``H00 ⊕ H10 ⊕ H01 ⊕ H11 ⊕ H2 ⊕ H2``.  The columns of ``w`` come in that
    order; on the doubled generic part ``P`` is ``[[I, 0], [0, 0]]`` and ``Q``
    is ``[[C², CS], [CS, S²]]`` with ``C = diag(c_diag)``, ``S = diag(s_diag)``.

    Attributes:
        w: Unitary change of basis.
        d00: ``dim(ker P ∩ ker Q)``.
        d10: ``dim(ran P ∩ ker Q)``.
        d01: ``dim(ker P ∩ ran Q)``.
        d11: ``dim(ran P ∩ ran Q)``.
        angles: Principal angles of the generic part, each in ``(0, π/2)``.
        c_diag: Cosines of ``angles``.
        s_diag: Sines of ``angles``.
    """

    w: ComplexMatrix
    d00: int
    d10: int
    d01: int
    d11: int
    angles: list[float]
    c_diag: list[float]
    s_diag: list[float]

    @model_validator(mode="after")
    def check_dimensions(self, info: ValidationInfo):
        tol = context_tol(info)
        n = self.w.shape[0]
        total = self.d00 + self.d10 + self.d01 + self.d11 + 2 * len(self.angles)
        if total != n or self.w.shape != (n, n):
            raise ValueError(f"block dimensions add up to {total}, ambient dimension is {n}")
        if not len(self.angles) == len(self.c_diag) == len(self.s_diag):
            raise ValueError("angles, c_diag and s_diag must have equal length")
        c = np.asarray(self.c_diag)
        s = np.asarray(self.s_diag)
        if c.size and np.max(np.abs(c**2 + s**2 - 1.0)) >= tol.eq_abs:
            raise ValueError("c² + s² = 1 fails on the generic part")
        return self

    @property
    def generic_dim(self) -> int:
        return len(self.angles)

    def blocks(self) -> tuple[np.ndarray, np.ndarray]:
        """Return the block forms of ``P`` and ``Q`` in the ``w`` basis."""
        k = self.generic_dim
        corner_p = [0.0] * self.d00 + [1.0] * self.d10 + [0.0] * self.d01 + [1.0] * self.d11
        corner_q = [0.0] * self.d00 + [0.0] * self.d10 + [1.0] * self.d01 + [1.0] * self.d11
        c = np.diag(self.c_diag)
        s = np.diag(self.s_diag)
        generic_p = np.block([[np.eye(k), np.zeros((k, k))], [np.zeros((k, k)), np.zeros((k, k))]])
        generic_q = np.block([[c @ c, c @ s], [c @ s, s @ s]])
        return (
            _direct_sum(np.diag(corner_p), generic_p),
            _direct_sum(np.diag(corner_q), generic_q),
        )

    def reconstruct(self) -> tuple[np.ndarray, np.ndarray]:
        """Conjugate the block forms back: ``(w Pb w*, w Qb w*)``."""
        block_p, block_q = self.blocks()
        w = np.asarray(self.w)
        return w @ block_p @ adjoint(w), w @ block_q @ adjoint(w)


def _direct_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=complex)
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0] :, a.shape[1] :] = b
    return out


class RankCheckReport(NestlabModel):
    """Complement-rank comparison for two orthogonal pairs of projections.

    Attributes:
        rank_p_complement: ``rank (P1 + P2)^⊥``.
        rank_q_complement: ``rank (Q1 + Q2)^⊥``.
        u: ``U = U1 + U2``, the sum of the polar partial isometries of
            ``Q_i P_i``.
        gap: ``‖U − (P1 + P2)‖``.
        gap_bound: ``sqrt(‖U1 − P1‖² + ‖U2 − P2‖²)``, the estimate that
            keeps ``gap`` below ``√2``.
        index: Nullity of ``U`` on ``(P1+P2)H`` minus the codimension of its
            range in ``(Q1+Q2)H``.
    """

    rank_p_complement: int
    rank_q_complement: int
    u: ComplexMatrix
    gap: float
    gap_bound: float
    index: int
