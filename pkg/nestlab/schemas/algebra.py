"""Pydantic schemas for nest-algebra computations.

* :class:`AlgebraElement`: an operator together with its membership residual.
* :class:`RankOneWitness`: a unit-norm rank-one operator ``ζη*`` in one of the
  two algebras, with its distance to the other.
* :class:`KKEstimate`: a certified lower bound for the distance between two
  nest algebras.
* :class:`DistanceCertificate`: witnesses that two nests at distance 1 have
  nest algebras at distance 1.
* :class:`CounterexampleInstance`: one member of the ``C²`` family of close
  nests whose algebras are at distance 1.
"""

import math
from typing import Literal

import numpy as np
from pydantic import ValidationInfo, model_validator

from nestlab.linalg import spectral_norm
from nestlab.schemas.common import ComplexMatrix, ComplexVector, NestlabModel, context_tol
from nestlab.schemas.nest import Nest

Side = Literal["m", "n"]


class AlgebraElement(NestlabModel):
    """An operator and its residual ``max_k ‖P_k⊥ T P_k‖`` against a nest.

    Attributes:
        t: The operator.
        nest: The nest defining the algebra.
        residual: Zero (up to ``eq_abs``) exactly when ``t`` is in ``T(nest)``.
    """

    t: ComplexMatrix
    nest: Nest
    residual: float


class RankOneWitness(NestlabModel):
    """Unit vectors ``ζ`` and ``η`` defining the operator ``ζη*``.

    Attributes:
        zeta: Unit vector in ``N₊``.
        eta: Unit vector orthogonal to ``N``.
        side: Nest (``"m"`` or ``"n"``) whose algebra contains ``ζη*``.
        value: Distance from ``ζη*`` to the other algebra.
    """

    zeta: ComplexVector
    eta: ComplexVector
    side: Side
    value: float

    @model_validator(mode="after")
    def check_unit_norm(self, info: ValidationInfo):
        tol = context_tol(info)
        norm = float(np.linalg.norm(self.zeta) * np.linalg.norm(self.eta))
        if abs(norm - 1.0) >= tol.eq_abs:
            raise ValueError(f"witness must have unit norm, got {norm:.6g}")
        if not -tol.eq_abs < self.value <= 1.0 + tol.eq_abs:
            raise ValueError(f"witness value {self.value:.6g} outside [0, 1]")
        return self

    @property
    def operator(self) -> np.ndarray:
        return np.outer(self.zeta, np.conj(self.eta))


class KKEstimate(NestlabModel):
    """Certified bounds for the distance between ``T(M)`` and ``T(N)``.

    Attributes:
        lower_bound: Distance from ``witness`` to the other algebra.
        upper_bound: ``min(1, 2γ)`` when the nests are within ``γ < 1/2``,
            otherwise 1.
        witness: Element of the unit ball of one algebra.
        side: Nest whose algebra contains the witness.
        method: Stage that produced the witness: ``"rank_one"``,
            ``"ascent"`` or ``"closed_form"``.
        trials: Number of ascent starts.
        seed: Seed of the ascent.
    """

    lower_bound: float
    upper_bound: float
    witness: ComplexMatrix
    side: Side
    method: Literal["rank_one", "ascent", "closed_form"]
    trials: int
    seed: int

    @model_validator(mode="after")
    def check_bounds(self, info: ValidationInfo):
        """Reject bounds outside ``[0, 1]`` and witnesses outside the unit ball.

        Raises:
            ValueError: If an invariant fails at the ``eq_abs`` slack.
        """
        tol = context_tol(info)
        if self.lower_bound < 0.0:
            raise ValueError("lower_bound must be non-negative")
        if self.lower_bound > 1.0 + tol.eq_abs:
            raise ValueError(f"lower_bound {self.lower_bound:.6g} exceeds 1")
        if not 0.0 <= self.upper_bound <= 1.0:
            raise ValueError(f"upper_bound {self.upper_bound:.6g} outside [0, 1]")
        norm = spectral_norm(self.witness)
        if norm > 1.0 + tol.eq_abs:
            raise ValueError(f"witness norm {norm:.6g} exceeds 1")
        return self


class DistanceCertificate(NestlabModel):
    """Rank-one witnesses that ``d(T(M), T(N)) = 1`` when ``d(M, N) = 1``.

    Attributes:
        case: 1 when nearby pairs approach distance 1, 2 when one element is
            at distance 1 from the whole other nest.
        side: Nest holding the element ``M``: at distance 1 from the other
            nest in case 2, the nearby element in case 1.
        m_index: Index of ``M`` in that nest.
        delta: ``max_N min{‖P_M⊥ P_N‖, ‖P_M P_N⊥‖}`` (case 2).
        n0_index: Index of ``N₀``, the largest ``N`` with ``‖P_M⊥ P_N‖ <= δ``.
        witnesses: Witnesses, best first.
        achieved: Largest witness value.
    """

    case: Literal[1, 2]
    side: Side | None = None
    m_index: int | None = None
    delta: float | None = None
    n0_index: int | None = None
    witnesses: list[RankOneWitness]
    achieved: float

    @model_validator(mode="after")
    def check_achieved(self, info: ValidationInfo):
        tol = context_tol(info)
        if not self.witnesses:
            raise ValueError("a certificate needs at least one witness")
        best = max(w.value for w in self.witnesses)
        if abs(self.achieved - best) >= tol.eq_abs:
            raise ValueError(f"achieved {self.achieved:.6g} differs from the best witness {best:.6g}")
        if self.achieved > 1.0 + tol.eq_abs:
            raise ValueError(f"achieved {self.achieved:.6g} exceeds 1")
        return self


class CounterexampleInstance(NestlabModel):
    """Close nests on ``C²`` whose nest algebras are at distance 1.

    ``M = {0, Ce₁, C²}``, ``N = {0, C(c, s), C²}`` and
    ``T = [[a, 1 − a²], [0, −a]]`` with ``a = c/s``.

    Attributes:
        s: Sine of the angle between the two lines, in ``[1/√2, 1)``.
        c: ``sqrt(1 − s²)``.
        a: Witness parameter.
        m_nest: The standard nest.
        n_nest: The rotated nest.
        t: The witness, a norm-one element of ``T(m_nest)``.
        t_norm: ``‖t‖``.
        nest_dist: ``d(M, N)``, equal to ``s``.
        closed_form: ``2acs + (1 − a²)s²``.
        alg_dist_lb: Distance from ``t`` to ``T(n_nest)``, equal to 1.
    """

    s: float
    c: float
    a: float
    m_nest: Nest
    n_nest: Nest
    t: ComplexMatrix
    t_norm: float
    nest_dist: float
    closed_form: float
    alg_dist_lb: float

    @model_validator(mode="after")
    def check_instance(self, info: ValidationInfo):
        """Check the witness and the two distances against ``s`` and ``a``.

        ``alg_dist_lb`` must match ``closed_form`` for every ``a``, and equal 1
        for the default ``a = min(1, c/s)``.

        Raises:
            ValueError: If an invariant fails at the ``eq_abs`` slack.
        """
        tol = context_tol(info)
        if not (1.0 / math.sqrt(2.0) - tol.eq_abs <= self.s < 1.0):
            raise ValueError(f"s = {self.s!r} outside [1/√2, 1)")
        if abs(self.c - math.sqrt(1.0 - self.s**2)) >= tol.eq_abs:
            raise ValueError("c must equal sqrt(1 − s²)")
        if abs(spectral_norm(self.t) - 1.0) >= tol.eq_abs or abs(self.t_norm - 1.0) >= tol.eq_abs:
            raise ValueError("the witness must have norm 1")
        residual = max(spectral_norm(e.perp @ self.t @ e.p) for e in self.m_nest.elements)
        if residual >= tol.eq_abs:
            raise ValueError(f"the witness is not in T(m_nest) (residual {residual:.3e})")
        if abs(self.nest_dist - self.s) >= tol.eq_abs:
            raise ValueError(f"nest_dist {self.nest_dist:.12g} differs from s = {self.s:.12g}")
        if abs(self.alg_dist_lb - self.closed_form) >= tol.eq_abs:
            raise ValueError("alg_dist_lb disagrees with the closed form")
        if self.a == min(1.0, self.c / self.s) and abs(self.alg_dist_lb - 1.0) >= tol.eq_abs:
            raise ValueError(f"alg_dist_lb {self.alg_dist_lb:.12g} differs from 1")
        return self
