"""Dense linear-algebra services: validated matrices, tolerant rank, powers, inverse."""

import numpy as np

from .errors import DimensionMismatchError, NonSquareError, SingularMatrixError

#: Relative singular-value cutoff separating signal from round-off.
DEFAULT_RANK_TOL = 1e-9


def as_matrix(a, name="matrix"):
    """Validate and return a as a 2-D float64 array with finite entries."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionMismatchError(f"{name} must be 2-D and nonempty, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionMismatchError(f"{name} contains non-finite entries")
    return m


def as_vector(v, length=None, name="vector"):
    """Validate and return v as a 1-D float64 array, optionally of fixed length."""
    x = np.asarray(v, dtype=np.float64).reshape(-1)
    if length is not None and x.shape[0] != length:
        raise DimensionMismatchError(f"{name} must have length {length}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise DimensionMismatchError(f"{name} contains non-finite entries")
    return x


def rank_with_tol(m, tol=DEFAULT_RANK_TOL):
    """Number of singular values strictly above tol times the largest one."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    m = as_matrix(m)
    sv = np.linalg.svd(m, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol * sv[0]))


def mat_pow(m, k):
    """m**k for integer k >= 0; m**0 is the identity."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise NonSquareError(f"matrix power needs a square matrix, got {m.shape}")
    if k < 0:
        raise ValueError("exponent must be nonnegative")
    return np.linalg.matrix_power(m, int(k))


def invert(m, tol=DEFAULT_RANK_TOL):
    """Inverse via factorized solve; raises SingularMatrixError below full rank."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise NonSquareError(f"inverse needs a square matrix, got {m.shape}")
    if rank_with_tol(m, tol) < m.shape[0]:
        raise SingularMatrixError(
            f"matrix of size {m.shape[0]} is numerically singular at tol {tol:g}"
        )
    return np.linalg.solve(m, np.eye(m.shape[0]))
