"""JSON file formats for matrices and nests, and CSV output for sweeps.

A MatrixFile is ``{"rows", "cols", "entries": [[re, im], ...]}`` in row-major
order.  A NestFile is ``{"dim", "dims", "basis": MatrixFile}``; nests are
stored as a flag so a parsed file is valid by construction.
"""

import csv
import json
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, TextIO

import numpy as np
from pydantic import BaseModel, ValidationError, model_validator

from nestlab.exceptions import ParseError
from nestlab.nests import nest_from_flag
from nestlab.schemas.common import Tolerances
from nestlab.schemas.nest import Nest


class MatrixFile(BaseModel):
    rows: int
    cols: int
    entries: list[tuple[float, float]]

    @model_validator(mode="after")
    def check_entries(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("rows and cols must be non-negative")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"expected rows*cols = {self.rows * self.cols} entries, got {len(self.entries)}"
            )
        if not all(math.isfinite(re) and math.isfinite(im) for re, im in self.entries):
            raise ValueError("entries must be finite")
        return self

    @classmethod
    def from_array(cls, array) -> "MatrixFile":
        array = np.asarray(array, dtype=np.complex128)
        if array.ndim == 1:
            array = array.reshape(-1, 1)
        return cls(
            rows=array.shape[0],
            cols=array.shape[1],
            entries=[(float(z.real), float(z.imag)) for z in array.ravel()],
        )

    def to_array(self) -> np.ndarray:
        flat = np.array([complex(re, im) for re, im in self.entries], dtype=np.complex128)
        return flat.reshape(self.rows, self.cols)


class NestFile(BaseModel):
    dim: int
    dims: list[int]
    basis: MatrixFile

    @model_validator(mode="after")
    def check_shape(self):
        if (self.basis.rows, self.basis.cols) != (self.dim, self.dim):
            raise ValueError(f"basis must be {self.dim}x{self.dim}")
        return self

    @classmethod
    def from_nest(cls, nest: Nest, tol: Tolerances | None = None) -> "NestFile":
        return cls(
            dim=nest.dim,
            dims=nest.ranks,
            basis=MatrixFile.from_array(nest.adapted_basis(tol)),
        )

    def to_nest(self, tol: Tolerances | None = None) -> Nest:
        return nest_from_flag(self.dims, self.basis.to_array(), tol)


def _load_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(str(path), exc.strerror or str(exc)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), f"invalid JSON: {exc}") from exc


def parse_matrix(data: Any, source: str = "<matrix>") -> MatrixFile:
    try:
        return MatrixFile.model_validate(data)
    except ValidationError as exc:
        raise ParseError(source, f"not a MatrixFile: {exc.errors()[0]['msg']}") from exc


def parse_nest(data: Any, source: str = "<nest>") -> NestFile:
    try:
        return NestFile.model_validate(data)
    except ValidationError as exc:
        raise ParseError(source, f"not a NestFile: {exc.errors()[0]['msg']}") from exc


def read_matrix(path: str | Path) -> np.ndarray:
    """Load a MatrixFile as an array.

    Raises:
        ParseError: If the file is unreadable, not JSON or not a MatrixFile.
    """
    return parse_matrix(_load_json(path), str(path)).to_array()


def read_nest(path: str | Path, tol: Tolerances | None = None) -> Nest:
    """Load a NestFile and build the nest.

    Raises:
        ParseError: If the file is not a well-formed NestFile.
        InvalidInputError: If the flag is invalid (bad dims, dependent basis).
    """
    return parse_nest(_load_json(path), str(path)).to_nest(tol)


def dump_json(model: BaseModel | dict) -> str:
    if isinstance(model, BaseModel):
        return model.model_dump_json(indent=2)
    return json.dumps(model, indent=2)


def write_csv(stream: TextIO, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
