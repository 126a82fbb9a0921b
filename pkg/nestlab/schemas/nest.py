"""Pydantic schemas for finite nests and maps between them.

* :class:`Nest`: a strictly increasing flag of projections from ``0`` to ``I``.
* :class:`Atom`: the difference of consecutive nest elements.
* :class:`OrderIsomorphism`: a pairing of two nests by proximity.
* :class:`Similarity`: an invertible operator implementing an order
  isomorphism.
"""

from typing import Literal

import numpy as np
from pydantic import ValidationInfo, model_validator

from nestlab.linalg import range_basis, spectral_norm
from nestlab.schemas.common import ComplexMatrix, NestlabModel, Tolerances, context_tol
from nestlab.schemas.projection import Projection


class Atom(NestlabModel):
    """``elements[index + 1] - elements[index]`` of a nest.

    Attributes:
        index: Position of the lower element in the nest.
        projection: The atom as a projection.
        rank: Its rank (at least 1).
    """

    index: int
    projection: Projection
    rank: int

    @model_validator(mode="after")
    def check_rank(self):
        if self.rank < 1 or self.rank != self.projection.rank:
            raise ValueError(f"atom {self.index} has invalid rank {self.rank}")
        return self


class Nest(NestlabModel):
    """A finite nest on ``C^dim``.

    ``elements[0]`` is the zero projection, ``elements[-1]`` the identity, and
    each element is strictly contained in the next.

    Attributes:
        dim: Ambient dimension.
        elements: The nest projections in increasing order.
    """

    dim: int
    elements: list[Projection]

    @model_validator(mode="after")
    def check_chain(self, info: ValidationInfo):
        """Validate endpoints and strict increase.

        Raises:
            ValueError: If the flag does not start at 0, end at ``I`` or
                increase strictly.
        """
        tol = context_tol(info)
        if len(self.elements) < 2:
            raise ValueError("a nest needs at least the elements 0 and I")
        if any(e.dim != self.dim for e in self.elements):
            raise ValueError("all nest elements must act on the same space")
        if self.elements[0].rank != 0 or self.elements[-1].rank != self.dim:
            raise ValueError("a nest must start at 0 and end at the identity")
        for i, (lower, upper) in enumerate(zip(self.elements, self.elements[1:])):
            if upper.rank <= lower.rank:
                raise ValueError(f"elements {i} and {i + 1} are not strictly increasing")
            if spectral_norm(lower.p @ upper.p - lower.p) >= tol.eq_abs:
                raise ValueError(f"element {i} is not contained in element {i + 1}")
        return self

    @property
    def ranks(self) -> list[int]:
        return [e.rank for e in self.elements]

    @property
    def size(self) -> int:
        return len(self.elements)

    def atom_projections(self) -> list[np.ndarray]:
        return [upper.p - lower.p for lower, upper in zip(self.elements, self.elements[1:])]

    def adapted_basis(self, tol: Tolerances | None = None) -> np.ndarray:
        """Unitary whose leading ``rank(elements[k])`` columns span ``elements[k]``."""
        return np.hstack([range_basis(a, tol) for a in self.atom_projections()])


class OrderIsomorphism(NestlabModel):
    """Order isomorphism ``θ`` between two nests, paired by proximity.

    Attributes:
        source: The nest ``M``.
        target: The nest ``N``.
        pairing: ``(i, j)`` pairs meaning ``θ(M_i) = N_j``.
        gamma: ``max ‖P_{M_i} − P_{θ(M_i)}‖``.
        atom_ranks: ``(rank of source atom, rank of paired target atom)``.
    """

    source: Nest
    target: Nest
    pairing: list[tuple[int, int]]
    gamma: float
    atom_ranks: list[tuple[int, int]]

    @model_validator(mode="after")
    def check_isomorphism(self):
        sources = [i for i, _ in self.pairing]
        targets = [j for _, j in self.pairing]
        if sources != list(range(self.source.size)) or targets != list(range(self.target.size)):
            raise ValueError(f"pairing {self.pairing} is not an order-preserving bijection")
        if not self.gamma < 1.0:
            raise ValueError(f"gamma = {self.gamma} must be below 1")
        if any(a != b for a, b in self.atom_ranks):
            raise ValueError(f"atom ranks {self.atom_ranks} are not preserved")
        return self

    def mapped(self, i: int) -> Projection:
        return self.target.elements[dict(self.pairing)[i]]


class Similarity(NestlabModel):
    """Invertible ``S`` with ``S M_k = θ(M_k)`` for every element.

    Attributes:
        s: The operator.
        s_minus_i_norm: ``‖S − I‖``.
        condition: ``‖S‖ ‖S⁻¹‖``.
        gamma: ``‖θ − id‖`` of the implemented isomorphism.
        construction: ``"atom_product"`` for ``Σ ΔQ ΔP``,
            ``"atom_unitary"`` for a unitary mapping atoms onto atoms.
        fallback: True when the atom-product construction was singular.
    """

    s: ComplexMatrix
    s_minus_i_norm: float
    condition: float
    gamma: float
    construction: Literal["atom_product", "atom_unitary"]
    fallback: bool = False
