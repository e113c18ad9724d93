"""Hot sequential kernels: state recursion and the input-response regressor.

Both loops are inherently sequential in time, so numpy cannot vectorize
them away.  Each kernel has a numba ``@njit`` build and a pure-numpy twin;
set ``CYCSID_DISABLE_NUMBA=1`` to force the numpy path.  ``benchmarks/
bench_kernels.py`` compares the two.
"""

import os

import numpy as np

_DISABLE = os.environ.get("CYCSID_DISABLE_NUMBA", "").strip() not in ("", "0", "false")

try:
    if _DISABLE:
        raise ImportError("numba disabled by CYCSID_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def _trajectory_numpy(A, B, C, D, u, x0):
    N = u.shape[0]
    n = A.shape[0]
    l = C.shape[0]
    x = np.empty((N, n))
    y = np.empty((N, l))
    xk = x0.copy()
    for k in range(N):
        x[k] = xk
        y[k] = C @ xk + D @ u[k]
        xk = A @ xk + B @ u[k]
    return x, y


def _io_regressor_numpy(A, C, u):
    N, m = u.shape
    l, n = C.shape
    Phi = np.zeros((N * l, n + n * m + l * m))
    Ak = np.eye(n)
    Z = np.zeros((n, n * m))
    for k in range(N):
        r = k * l
        Phi[r:r + l, :n] = C @ Ak
        Phi[r:r + l, n:n + n * m] = C @ Z
        for j in range(m):
            for i in range(l):
                Phi[r + i, n + n * m + j * l + i] = u[k, j]
        Z = A @ Z
        for j in range(m):
            for i in range(n):
                Z[i, j * n + i] += u[k, j]
        Ak = A @ Ak
    return Phi


if HAS_NUMBA:
    _trajectory_jit = njit(cache=True)(_trajectory_numpy)
    _io_regressor_jit = njit(cache=True)(_io_regressor_numpy)
else:
    _trajectory_jit = _trajectory_numpy
    _io_regressor_jit = _io_regressor_numpy


def trajectory(A, B, C, D, u, x0):
    """Run x(k+1) = A x(k) + B u(k), y(k) = C x(k) + D u(k).

    Returns (x, y) with x[k] the state at step k and y the unmasked output.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    D = np.ascontiguousarray(D, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    return _trajectory_jit(A, B, C, D, u, x0)


def io_regressor(A, C, u):
    """Regressor for the joint (x0, vec B, vec D) least squares.

    Row block k is [C A^k, C Z(k), u(k)^T (x) I_l] where Z obeys
    Z(k+1) = A Z(k) + u(k)^T (x) I_n, Z(0) = 0; vecs are column-major.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    return _io_regressor_jit(A, C, u)
