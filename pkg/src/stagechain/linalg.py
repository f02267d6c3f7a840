"""Small dense complex solves."""
from __future__ import annotations

import numpy as np

from .errors import SingularSystem


def gauss_solve(M, b, pivot_tol: float = 1e-12) -> np.ndarray:
    """Solve ``M x = b`` by Gaussian elimination with partial pivoting.

    Raises :class:`SingularSystem` when a pivot falls below ``pivot_tol`` in magnitude.
    """
    A = np.array(M, dtype=complex)
    x = np.array(b, dtype=complex).reshape(-1)
    n = A.shape[0]
    if A.shape != (n, n) or x.shape != (n,):
        raise ValueError("gauss_solve needs a square matrix and a matching right-hand side")
    for k in range(n):
        piv = k + int(np.argmax(np.abs(A[k:, k])))
        if abs(A[piv, k]) < pivot_tol:
            raise SingularSystem(f"pivot {abs(A[piv, k]):.3e} below {pivot_tol:g} in column {k}")
        if piv != k:
            A[[k, piv]] = A[[piv, k]]
            x[[k, piv]] = x[[piv, k]]
        for i in range(k + 1, n):
            m = A[i, k] / A[k, k]
            A[i, k:] -= m * A[k, k:]
            x[i] -= m * x[k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - A[k, k + 1:] @ x[k + 1:]) / A[k, k]
    return x
