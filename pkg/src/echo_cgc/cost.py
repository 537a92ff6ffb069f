"""Synthetic strongly convex costs and the stochastic gradient oracle.

Stands in for the shared dataset: the cost is a rotated quadratic whose
Hessian spectrum is pinned inside [mu, L] with both endpoints present,
so the smoothness and strong-convexity constants are tight by
construction.  Worker data batches are replaced by multiplicative
isotropic Gaussian noise whose relative second moment equals sigma^2
exactly, making the variance bound sharp for testing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NoiseModel",
    "QuadraticCost",
    "true_gradient",
    "sample_gradient",
    "sample_gradients",
]

SPECTRUM_MODES = ("isotropic", "two_point", "linear")

# Number of Householder reflections composing the random change of
# basis.  Kept small so Hessian application stays O(d) even for very
# high-dimensional runs.
_N_REFLECTIONS = 3


@dataclass(frozen=True)
class NoiseModel:
    """Relative standard-deviation bound sigma of the gradient oracle."""

    sigma: float = 0.0

    def __post_init__(self):
        if not (self.sigma >= 0.0 and np.isfinite(self.sigma)):
            raise ValueError("sigma must be finite and >= 0")


class QuadraticCost:
    """Quadratic cost Q(w) = 0.5 (w - w*)^T H (w - w*).

    H = R^T D R with D = diag(hessian_spectrum) and R a fixed random
    orthogonal map (a product of seeded Householder reflections;
    ``rotation_seed=None`` means no rotation).  Eigenvalues of H are
    exactly the spectrum, so Q is min(spectrum)-strongly convex and
    max(spectrum)-Lipschitz-smooth.
    """

    def __init__(self, optimum, hessian_spectrum, rotation_seed=None):
        self._optimum = np.ascontiguousarray(optimum, dtype=np.float64)
        if self._optimum.ndim != 1 or self._optimum.size < 1:
            raise ValueError("optimum must be a 1-d vector")
        spectrum = np.ascontiguousarray(hessian_spectrum, dtype=np.float64)
        if spectrum.shape != self._optimum.shape:
            raise ValueError("spectrum length must match the dimension")
        if not (np.isfinite(spectrum).all() and (spectrum > 0).all()):
            raise ValueError("spectrum entries must be finite and positive")
        self._spectrum = spectrum
        if rotation_seed is None:
            self._reflectors = None
        else:
            rng = np.random.default_rng(rotation_seed)
            refl = rng.standard_normal((_N_REFLECTIONS, self.dim))
            refl /= np.linalg.norm(refl, axis=1, keepdims=True)
            self._reflectors = refl

    @classmethod
    def from_spectrum_mode(cls, dim, mu, L, mode, rotation_seed=None, optimum=None):
        """Construct with a named spectrum shape covering [mu, L].

        isotropic: all eigenvalues equal (requires mu == L);
        two_point: half mu, half L; linear: evenly spaced.
        Both endpoints appear exactly, keeping the constants tight.
        """
        if not (0 < mu <= L):
            raise ValueError("need 0 < mu <= L")
        if mode not in SPECTRUM_MODES:
            raise ValueError(f"unknown spectrum mode {mode!r}")
        if mode == "isotropic":
            if mu != L:
                raise ValueError("isotropic spectrum requires mu == L")
            spectrum = np.full(dim, mu)
        elif mode == "two_point":
            if dim < 2 and mu != L:
                raise ValueError("two_point spectrum needs d >= 2 when mu < L")
            spectrum = np.full(dim, mu)
            spectrum[dim // 2 :] = L
        else:
            if dim < 2 and mu != L:
                raise ValueError("linear spectrum needs d >= 2 when mu < L")
            spectrum = np.linspace(mu, L, dim)
        if optimum is None:
            optimum = np.zeros(dim)
        return cls(optimum, spectrum, rotation_seed=rotation_seed)

    @property
    def dim(self):
        return self._optimum.size

    @property
    def optimum(self):
        return self._optimum

    @property
    def hessian_spectrum(self):
        return self._spectrum

    @property
    def mu(self):
        """Strong-convexity constant (smallest eigenvalue)."""
        return float(self._spectrum.min())

    @property
    def lipschitz(self):
        """Gradient Lipschitz constant (largest eigenvalue)."""
        return float(self._spectrum.max())

    def _rotate(self, v):
        if self._reflectors is None:
            return v
        for u in self._reflectors:
            v = v - (2.0 * (u @ v)) * u
        return v

    def _rotate_back(self, v):
        if self._reflectors is None:
            return v
        for u in self._reflectors[::-1]:
            v = v - (2.0 * (u @ v)) * u
        return v

    def hessian_matvec(self, v):
        return self._rotate_back(self._rotate(np.asarray(v, dtype=np.float64)) * self._spectrum)

    def gradient(self, w):
        """Exact gradient H (w - w*)."""
        w = np.asarray(w, dtype=np.float64)
        return self.hessian_matvec(w - self._optimum)

    def value(self, w):
        w = np.asarray(w, dtype=np.float64)
        delta = w - self._optimum
        return 0.5 * float(delta @ self.hessian_matvec(delta))


def true_gradient(cost, w):
    """Deterministic gradient of the cost at parameter w."""
    return cost.gradient(w)


def sample_gradients(cost, noise, w, count, rng):
    """Draw `count` independent stochastic gradients at w, one per row.

    Model: g = grad + sigma * ||grad|| * z with z spherical Gaussian
    scaled by 1/sqrt(d), so E g = grad and E||g - grad||^2 equals
    sigma^2 ||grad||^2 exactly.
    """
    grad = cost.gradient(w)
    if noise.sigma == 0.0:
        return np.repeat(grad[None, :], count, axis=0)
    gnorm = np.linalg.norm(grad)
    if gnorm == 0.0:
        return np.zeros((count, cost.dim))
    z = rng.standard_normal((count, cost.dim))
    return grad + (noise.sigma * gnorm / np.sqrt(cost.dim)) * z


def sample_gradient(cost, noise, w, rng):
    """Single stochastic gradient draw at w."""
    return sample_gradients(cost, noise, w, 1, rng)[0]
