"""Dense complex linear-algebra kernel.

Every norm in the package is the operator (spectral) norm.  Functions accept
any array-like, validate it with :func:`as_complex_matrix` and never mutate
their inputs.
"""

from typing import NamedTuple

import numpy as np
import scipy.linalg

from nestlab.exceptions import NonFiniteError, RankDeficientError
from nestlab.schemas.common import Tolerances, resolve


class PolarFactors(NamedTuple):
    u: np.ndarray
    h: np.ndarray


def as_complex_matrix(a, what: str = "matrix") -> np.ndarray:
    """Return *a* as a 2-D ``complex128`` array, raising on NaN/Inf.

    One-dimensional input is treated as a single column.
    """
    array = np.asarray(a, dtype=np.complex128)
    if array.ndim == 1:
        array = array.reshape(-1, 1)
    if array.ndim != 2:
        raise ValueError(f"{what} must be two-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise NonFiniteError(what)
    return array


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def singular_values(a) -> np.ndarray:
    array = as_complex_matrix(a)
    if array.size == 0:
        return np.zeros(0)
    return scipy.linalg.svdvals(array)


def spectral_norm(a) -> float:
    """Largest singular value of *a* (0 for an empty matrix)."""
    sigma = singular_values(a)
    return float(sigma[0]) if sigma.size else 0.0


def rank_tol(a, tol: Tolerances | None = None) -> int:
    """Count singular values strictly above ``rank_rel * sigma_max``."""
    tol = resolve(tol)
    sigma = singular_values(a)
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    return int(np.count_nonzero(sigma > tol.rank_rel * sigma[0]))


def polar_partial_isometry(a, tol: Tolerances | None = None) -> PolarFactors:
    """Polar decomposition ``a = u @ h`` with ``u`` a partial isometry.

    ``u`` is assembled from the singular triples above the rank cutoff, so its
    initial space is the range of ``a*`` and its final space the range of ``a``;
    ``h = (a* a)^{1/2}``.
    """
    tol = resolve(tol)
    array = as_complex_matrix(a)
    rows, cols = array.shape
    if array.size == 0:
        return PolarFactors(np.zeros((rows, cols), complex), np.zeros((cols, cols), complex))
    w, sigma, vh = scipy.linalg.svd(array, full_matrices=False)
    h = (adjoint(vh) * sigma) @ vh
    if sigma[0] == 0.0:
        return PolarFactors(np.zeros_like(array), h)
    keep = sigma > tol.rank_rel * sigma[0]
    u = w[:, keep] @ vh[keep, :]
    return PolarFactors(u, h)


def range_basis(a, tol: Tolerances | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) of the range of *a*."""
    tol = resolve(tol)
    array = as_complex_matrix(a)
    rank = rank_tol(array, tol)
    if rank == 0:
        return np.zeros((array.shape[0], 0), complex)
    w, _, _ = scipy.linalg.svd(array, full_matrices=False)
    return w[:, :rank]


def orthonormalize(cols, tol: Tolerances | None = None) -> np.ndarray:
    """Orthonormalise the columns of *cols*, preserving every leading span.

    Householder QR keeps ``span(q[:, :k]) == span(cols[:, :k])`` for each
    ``k``, which the nest constructors rely on.

    Raises:
        RankDeficientError: If the columns are dependent at ``rank_rel``.
    """
    tol = resolve(tol)
    array = as_complex_matrix(cols, "basis")
    n_cols = array.shape[1]
    if n_cols == 0:
        return np.zeros((array.shape[0], 0), complex)
    rank = rank_tol(array, tol)
    if rank < n_cols:
        raise RankDeficientError(rank, n_cols)
    q, r = scipy.linalg.qr(array, mode="economic")
    # unit positive diagonal in r, so q is the Gram-Schmidt basis
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def orthogonal_complement(basis, tol: Tolerances | None = None) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``span(basis)``."""
    tol = resolve(tol)
    array = as_complex_matrix(basis)
    n = array.shape[0]
    if array.shape[1] == 0:
        return np.eye(n, dtype=complex)
    return scipy.linalg.null_space(adjoint(array), rcond=tol.rank_rel)


def projector(basis) -> np.ndarray:
    """Orthogonal projection ``B B*`` onto the span of orthonormal columns ``B``."""
    array = as_complex_matrix(basis)
    return array @ adjoint(array)


def top_singular_pair(a) -> tuple[float, np.ndarray, np.ndarray]:
    """Return ``(sigma_max, u, v)`` with ``a v = sigma_max u`` for unit ``u, v``."""
    array = as_complex_matrix(a)
    w, sigma, vh = scipy.linalg.svd(array)
    return float(sigma[0]), w[:, 0], np.conj(vh[0, :])
