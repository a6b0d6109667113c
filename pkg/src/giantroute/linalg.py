"""Gaussian elimination with partial pivoting for small dense complex systems."""
import numpy as np

from .errors import SingularPointError


def solve_dense(a, b, rtol=1e-13):
    """
    Solve ``a @ x = b`` by row-pivoted Gaussian elimination and back substitution.

    Intended for the handful-of-unknowns systems of the scattering oracle;
    inputs are copied, not modified.

    Raises
    ------
    SingularPointError
        If a pivot falls below ``rtol`` times the largest entry of ``a``.
    """
    a = np.array(a, dtype=complex)
    b = np.array(b, dtype=complex)
    n = len(b)
    if a.shape != (n, n):
        raise ValueError(f"matrix shape {a.shape} does not match rhs length {n}")
    scale = np.abs(a).max()
    if scale == 0:
        raise SingularPointError("zero matrix")
    tol = rtol * scale

    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) <= tol:
            raise SingularPointError(f"matrix is singular (pivot {abs(a[p, k]):.3g} in column {k})")
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        lam = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(lam, a[k, k:])
        b[k + 1:] -= lam * b[k]

    x = np.zeros(n, dtype=complex)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x
