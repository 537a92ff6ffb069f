"""Gradient geometry: overheard-gradient bases and least-squares echoes.

A worker that overhears raw gradients keeps them as the columns of a
basis (all pairwise linearly independent up to a tolerance).  Its "echo
gradient" is the least-squares projection of its own local gradient
onto the span of those columns; when the projection is close enough
(deviation ratio r), the worker can transmit just the coefficients
instead of the full d-dimensional vector.

Gradients are plain length-d float64 numpy arrays throughout.  The
normal-equations solution ((A^T A)^-1 A^T g) is computed through an
incrementally maintained thin-QR factorization of the column matrix,
which is numerically stable when stored gradients are nearly parallel;
the result is mathematically identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend

__all__ = [
    "TAU_IND",
    "TAU_ZERO",
    "SingularGramError",
    "DegenerateEchoError",
    "GradientBasis",
    "Projection",
    "as_vector",
    "mp_project",
    "is_independent",
    "echo_check",
    "norm_ratio",
    "in_ball",
]

# Relative tolerance declaring a gradient linearly dependent on a basis.
TAU_IND = 1e-8
# Relative floor below which an echo gradient is treated as zero; the
# norm ratio ||g|| / ||g*|| is undefined there and the sender must fall
# back to a raw broadcast.
TAU_ZERO = 1e-12


class SingularGramError(np.linalg.LinAlgError):
    """The basis factorization is numerically singular.

    Signals a violated basis invariant (an internal bug), not a
    protocol event: bases built through `GradientBasis.append` reject
    dependent columns and cannot reach this state.
    """


class DegenerateEchoError(ArithmeticError):
    """Echo gradient is (numerically) zero; no norm ratio exists."""


def as_vector(entries, dim=None):
    """Validate and convert one gradient to a contiguous float64 array.

    Rejects non-finite entries, wrong dimensionality and empty vectors.
    Intended for API boundaries (config files, message payloads built
    from user input); internal hot paths pass arrays through untouched.
    """
    v = np.ascontiguousarray(entries, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if dim is not None and v.size != dim:
        raise ValueError(f"expected dimension {dim}, got {v.size}")
    if not np.isfinite(v).all():
        raise ValueError("gradient entries must be finite")
    return v


@dataclass(frozen=True, eq=False)
class Projection:
    """Least-squares projection of a gradient onto a basis span.

    coefficients solve the normal equations (A^T A) x = A^T g;
    echo_gradient = A @ coefficients; residual_norm = ||g - A x||.
    """

    coefficients: np.ndarray
    echo_gradient: np.ndarray
    residual_norm: float


class GradientBasis:
    """Ordered, linearly independent overheard gradients with cached QR.

    Columns are stored in arrival order together with the sending
    worker's ID (strictly ascending, as TDMA slots deliver them).  The
    column count can never exceed the dimension; protocol usage further
    caps it at n - 1.
    """

    def __init__(self, dim, capacity=None, tol=TAU_IND, kernels=None):
        dim = int(dim)
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        cap = dim if capacity is None else min(int(capacity), dim)
        if cap < 1:
            raise ValueError("capacity must be >= 1")
        self.dim = dim
        self.tol = float(tol)
        self._kernels = kernels if kernels is not None else backend.kernels
        self._qt = np.zeros((cap, dim))
        self._rmat = np.zeros((cap, cap))
        self._cols = np.zeros((cap, dim))
        self._ids: list[int] = []
        self._owner_ids: tuple[int, ...] = ()
        self._k = 0
        # Running min/max of the R diagonal, for the O(1) singularity guard.
        self._diag_min = np.inf
        self._diag_max = 0.0

    @classmethod
    def from_columns(cls, columns, owner_ids=None, **kwargs):
        """Build a basis from explicit columns; dependent columns raise."""
        columns = [as_vector(c) for c in columns]
        if not columns:
            raise ValueError("need at least one column")
        if owner_ids is None:
            owner_ids = range(1, len(columns) + 1)
        basis = cls(columns[0].size, **kwargs)
        for col, owner in zip(columns, owner_ids, strict=True):
            if not basis.append(col, owner):
                raise ValueError(
                    f"column from worker {owner} is linearly dependent on "
                    f"the preceding columns (tol={basis.tol:g})"
                )
        return basis

    def __len__(self):
        return self._k

    @property
    def owner_ids(self):
        return self._owner_ids

    @property
    def columns(self):
        """Stored raw gradients, in arrival order (k, d)."""
        return self._cols[: self._k]

    @property
    def column_matrix(self):
        """The (d, k) matrix A whose columns are the stored gradients."""
        return self._cols[: self._k].T

    def append(self, g, owner_id):
        """Store g iff it is linearly independent of the current columns.

        Returns True when stored.  Zero vectors are dependent by
        convention.  Owner IDs must arrive strictly ascending.
        """
        owner_id = int(owner_id)
        if self._ids and owner_id <= self._ids[-1]:
            raise ValueError("owner IDs must be strictly ascending")
        g = np.ascontiguousarray(g, dtype=np.float64)
        new_k = self._kernels.try_append(self._qt, self._rmat, self._k, g, self.tol)
        if new_k == self._k:
            return False
        self._cols[self._k] = g
        self._ids.append(owner_id)
        self._owner_ids = tuple(self._ids)
        rkk = float(self._rmat[self._k, self._k])
        self._diag_min = min(self._diag_min, rkk)
        self._diag_max = max(self._diag_max, rkk)
        self._k = new_k
        return True

    def _check_factor(self):
        if self._diag_min <= TAU_IND * self._diag_max:
            raise SingularGramError(
                "basis factorization is numerically singular; the pairwise "
                "independence invariant was violated"
            )


def mp_project(basis, g):
    """Project g onto the basis span (Moore-Penrose least squares).

    The coefficients returned are exactly the normal-equations solution
    for the stored column matrix.  Raises SingularGramError for a basis
    whose columns violate the independence invariant.
    """
    if len(basis) == 0:
        raise ValueError("cannot project onto an empty basis")
    g = np.ascontiguousarray(g, dtype=np.float64)
    if g.size != basis.dim:
        raise ValueError(f"expected dimension {basis.dim}, got {g.size}")
    basis._check_factor()
    coeffs, echo, rnorm = basis._kernels.project(basis._qt, basis._rmat, basis._k, g)
    return Projection(coeffs, echo, rnorm)


def is_independent(basis, g, tol=TAU_IND):
    """True iff g lies outside the basis span by more than tol * ||g||.

    Empty bases make every nonzero vector independent; the zero vector
    is dependent on anything.
    """
    g = np.ascontiguousarray(g, dtype=np.float64)
    gnorm = np.linalg.norm(g)
    if gnorm == 0.0:
        return False
    if len(basis) == 0:
        return True
    rnorm = basis._kernels.residual_norm(basis._qt, basis._k, g)
    return rnorm > tol * gnorm


def echo_check(projection, g, r):
    """Send-check: may g be replaced by its echo at deviation ratio r?

    Passes iff the projection residual is within r * ||g|| and the echo
    gradient is not degenerate (its norm must exceed TAU_ZERO * ||g||,
    since the norm ratio is undefined for a zero echo).
    """
    if r <= 0:
        raise ValueError("deviation ratio r must be positive")
    gnorm = np.linalg.norm(g)
    if projection.residual_norm > r * gnorm:
        return False
    return np.linalg.norm(projection.echo_gradient) > TAU_ZERO * gnorm


def norm_ratio(g, echo_gradient):
    """Magnitude ratio k = ||g|| / ||echo||, the scalar sent in an echo."""
    gnorm = np.linalg.norm(g)
    enorm = np.linalg.norm(echo_gradient)
    if enorm <= TAU_ZERO * gnorm or enorm == 0.0:
        raise DegenerateEchoError(
            "echo gradient is numerically zero; fall back to raw broadcast"
        )
    return float(gnorm / enorm)


def in_ball(g, true_grad, r):
    """Membership in the ball of radius r/(2+r)*||true_grad|| around it.

    Any two gradients inside this ball mutually satisfy the echo
    send-check, which is what drives the echo-count lower bound.
    """
    if r <= 0:
        raise ValueError("deviation ratio r must be positive")
    g = np.asarray(g, dtype=np.float64)
    true_grad = np.asarray(true_grad, dtype=np.float64)
    radius = (r / (2.0 + r)) * np.linalg.norm(true_grad)
    return bool(np.linalg.norm(g - true_grad) <= radius)
