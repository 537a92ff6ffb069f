"""Pure-numpy implementation of the hot projection kernels.

Fallback twin of the compiled module ``_kernels_cy``; both expose the
same three functions over the same buffer layout and must agree to
floating-point noise (see tests/test_backends.py).

Buffer layout: a basis of k vectors in R^d is held as a thin-QR
factorization A = Q R of the column matrix.  ``qt`` is a (capacity, d)
array whose first k rows are the orthonormal q_i; ``rmat`` is a
(capacity, capacity) array whose leading k x k block is upper
triangular with positive diagonal.  Column j of A satisfies
a_j = sum_i rmat[i, j] * qt[i].

Orthogonalization is modified Gram-Schmidt with one re-orthogonalization
pass ("twice is enough"), so Q stays orthonormal to machine precision
even for nearly dependent inserts near the acceptance tolerance.
"""

import numpy as np

__all__ = ["try_append", "project", "residual_norm"]


def _orthogonalize(qt, k, v):
    """Two-pass MGS of v against the first k rows of qt.

    Returns (y, w): coordinates y = Q^T v (k,) and the residual
    w = v - Q y (d,).
    """
    q = qt[:k]
    y = q @ v
    w = v - y @ q
    dy = q @ w
    w = w - dy @ q
    y = y + dy
    return y, w


def try_append(qt, rmat, k, v, tol):
    """Append v to the factorization iff it is independent of the basis.

    Acceptance rule: the orthogonal residual exceeds tol * ||v||.  Zero
    vectors and appends beyond capacity are rejected.  Returns the new
    basis size (k + 1 on acceptance, k otherwise).
    """
    vnorm = float(np.linalg.norm(v))
    if vnorm == 0.0 or k >= qt.shape[0]:
        return k
    if k == 0:
        qt[0] = v / vnorm
        rmat[0, 0] = vnorm
        return 1
    y, w = _orthogonalize(qt, k, v)
    rnorm = float(np.linalg.norm(w))
    if rnorm <= tol * vnorm:
        return k
    qt[k] = w / rnorm
    rmat[:k, k] = y
    rmat[k, k] = rnorm
    return k + 1


def project(qt, rmat, k, g):
    """Least-squares projection of g onto the basis span.

    Returns (coeffs, echo, residual_norm) where echo = A @ coeffs is the
    closest vector to g in the span and coeffs solve R x = Q^T g, i.e.
    the normal equations (A^T A) x = A^T g.
    """
    g = np.asarray(g, dtype=np.float64)
    if k == 0:
        return (
            np.zeros(0),
            np.zeros_like(g),
            float(np.linalg.norm(g)),
        )
    y, w = _orthogonalize(qt, k, g)
    echo = g - w
    rnorm = float(np.linalg.norm(w))
    # rmat's leading block is upper triangular; LAPACK's general solve
    # gives the same back-substitution result to rounding.
    coeffs = np.linalg.solve(rmat[:k, :k], y)
    return coeffs, echo, rnorm


def residual_norm(qt, k, g):
    """Norm of the component of g orthogonal to the basis span."""
    if k == 0:
        return float(np.linalg.norm(g))
    _, w = _orthogonalize(qt, k, g)
    return float(np.linalg.norm(w))
