"""Shared primitive types and base models used across all nestlab schemas.

This module defines:

* :data:`ComplexMatrix` and :data:`ComplexVector`: annotated numpy array types
  that coerce any array-like (or a MatrixFile-shaped dict) into a read-only
  ``complex128`` array and reject NaN/Inf entries.  When a model is dumped in
  JSON mode the arrays are emitted in the MatrixFile shape
  ``{"rows", "cols", "entries": [[re, im], ...]}``.
* :class:`Tolerances`: the numerical tolerances, configurable through the
  environment (``NESTLAB_TOL`` overrides ``eq_abs``).
* :class:`NestlabModel`: frozen base model every domain type inherits.
"""

from functools import lru_cache
from typing import Annotated, Any

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    ValidationInfo,
    field_validator,
)
from pydantic_settings import BaseSettings, SettingsConfigDict


def _from_matrix_file(value: dict) -> np.ndarray:
    rows = int(value["rows"])
    cols = int(value["cols"])
    entries = value["entries"]
    if len(entries) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got {len(entries)}")
    flat = np.array([complex(re, im) for re, im in entries], dtype=np.complex128)
    return flat.reshape(rows, cols)


def to_complex_matrix(value: Any) -> np.ndarray:
    """Coerce *value* into a read-only 2-D ``complex128`` array.

    Raises:
        ValueError: If the value is not two-dimensional or has non-finite
            entries.
    """
    if isinstance(value, dict):
        array = _from_matrix_file(value)
    else:
        array = np.array(value, dtype=np.complex128)
    if array.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError("matrix entries must be finite")
    array.setflags(write=False)
    return array


def to_complex_vector(value: Any) -> np.ndarray:
    array = np.array(value, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(array)):
        raise ValueError("vector entries must be finite")
    array.setflags(write=False)
    return array


def matrix_to_json(value: np.ndarray) -> dict:
    """Serialise an array in the MatrixFile shape (vectors become columns)."""
    array = np.asarray(value, dtype=np.complex128)
    if array.ndim == 1:
        array = array.reshape(-1, 1)
    return {
        "rows": int(array.shape[0]),
        "cols": int(array.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in array.ravel()],
    }


ComplexMatrix = Annotated[
    np.ndarray,
    PlainValidator(to_complex_matrix),
    PlainSerializer(matrix_to_json, when_used="json"),
]

ComplexVector = Annotated[
    np.ndarray,
    PlainValidator(to_complex_vector),
    PlainSerializer(matrix_to_json, when_used="json"),
]


class NestlabModel(BaseModel):
    """Frozen base model for every nestlab domain type.

    Arrays held in fields are made read-only by the :data:`ComplexMatrix`
    validator, so instances are effectively immutable.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class Tolerances(BaseSettings):
    """Numerical tolerances shared by every operation.

    Values are read from the environment when the model is instantiated
    without arguments::

        NESTLAB_TOL=1e-9 nestlab dist-nest m.json n.json

    Attributes:
        rank_rel: Relative singular-value cutoff; singular values at or below
            ``rank_rel * sigma_max`` count as zero.  Env: ``NESTLAB_RANK_REL``.
        eq_abs: Absolute slack for equality comparisons and strict
            inequalities such as ``distance < 1 - eq_abs``.  Env:
            ``NESTLAB_TOL``.
    """

    model_config = SettingsConfigDict(
        env_prefix="NESTLAB_", frozen=True, populate_by_name=True
    )

    rank_rel: float = 1e-8
    eq_abs: float = Field(default=1e-8, validation_alias="NESTLAB_TOL")

    @field_validator("rank_rel", "eq_abs")
    @classmethod
    def check_range(cls, value: float) -> float:
        if not 0.0 < value < 1e-2:
            raise ValueError(f"tolerance must lie in (0, 1e-2), got {value!r}")
        return value


@lru_cache(maxsize=1)
def default_tolerances() -> Tolerances:
    """Return the process-wide tolerances read from the environment.

    Call ``default_tolerances.cache_clear()`` after changing ``NESTLAB_TOL``.
    """
    return Tolerances()


def resolve(tol: Tolerances | None) -> Tolerances:
    return default_tolerances() if tol is None else tol


def context_tol(info: ValidationInfo | None) -> Tolerances:
    """Tolerances passed as ``context={"tol": ...}`` to ``model_validate``."""
    context = info.context if info is not None else None
    return resolve((context or {}).get("tol"))
