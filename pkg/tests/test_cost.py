import numpy as np
import pytest

from echo_cgc.cost import (
    NoiseModel,
    QuadraticCost,
    sample_gradient,
    sample_gradients,
    true_gradient,
)


class TestTrueGradient:
    def test_vanishes_at_optimum(self):
        cost = QuadraticCost(np.array([1.0, -2.0]), np.array([0.5, 3.0]), rotation_seed=1)
        np.testing.assert_allclose(true_gradient(cost, cost.optimum), np.zeros(2), atol=1e-15)

    def test_identity_spectrum(self):
        cost = QuadraticCost(np.zeros(2), np.ones(2))
        np.testing.assert_array_equal(true_gradient(cost, np.array([2.0, -3.0])), [2.0, -3.0])

    def test_diagonal_spectrum(self):
        cost = QuadraticCost(np.zeros(2), np.array([1.0, 4.0]))
        np.testing.assert_array_equal(true_gradient(cost, np.array([1.0, 1.0])), [1.0, 4.0])

    def test_rotated_hessian_spectrum(self):
        # The rotation is orthogonal, so H's eigenvalues are exactly the
        # configured spectrum (checked against numpy's eigensolver).
        d = 8
        spectrum = np.linspace(0.5, 2.0, d)
        cost = QuadraticCost(np.zeros(d), spectrum, rotation_seed=42)
        H = np.column_stack([cost.hessian_matvec(e) for e in np.eye(d)])
        np.testing.assert_allclose(H, H.T, atol=1e-12)
        np.testing.assert_allclose(np.linalg.eigvalsh(H), spectrum, rtol=1e-12)

    def test_value_consistent_with_gradient(self):
        rng = np.random.default_rng(5)
        cost = QuadraticCost(rng.standard_normal(4), np.array([0.5, 1.0, 1.5, 2.0]), rotation_seed=9)
        w = rng.standard_normal(4)
        # Q(w) = 0.5 <w - w*, grad(w)>
        assert cost.value(w) == pytest.approx(0.5 * (w - cost.optimum) @ cost.gradient(w))
        assert cost.value(cost.optimum) == pytest.approx(0.0, abs=1e-30)


class TestSpectrumModes:
    def test_endpoints_present(self):
        for mode in ("two_point", "linear"):
            cost = QuadraticCost.from_spectrum_mode(6, 0.5, 2.0, mode, rotation_seed=0)
            assert cost.mu == 0.5
            assert cost.lipschitz == 2.0

    def test_isotropic_requires_equal_constants(self):
        with pytest.raises(ValueError):
            QuadraticCost.from_spectrum_mode(4, 0.5, 1.0, "isotropic")
        cost = QuadraticCost.from_spectrum_mode(4, 1.0, 1.0, "isotropic")
        np.testing.assert_array_equal(cost.hessian_spectrum, np.ones(4))

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            QuadraticCost.from_spectrum_mode(4, 0.5, 1.0, "cubic")

    def test_invalid_spectrum(self):
        with pytest.raises(ValueError):
            QuadraticCost(np.zeros(2), np.array([1.0, -1.0]))
        with pytest.raises(ValueError):
            QuadraticCost(np.zeros(2), np.array([1.0]))


class TestNoiseModel:
    def test_validation(self):
        NoiseModel(0.0)
        with pytest.raises(ValueError):
            NoiseModel(-0.1)
        with pytest.raises(ValueError):
            NoiseModel(float("nan"))


class TestSampleGradient:
    def test_noiseless_is_exact(self, rng):
        cost = QuadraticCost(np.zeros(3), np.array([1.0, 2.0, 3.0]), rotation_seed=7)
        w = np.array([1.0, -1.0, 2.0])
        np.testing.assert_array_equal(
            sample_gradient(cost, NoiseModel(0.0), w, rng), cost.gradient(w)
        )

    def test_zero_at_optimum(self, rng):
        cost = QuadraticCost(np.ones(3), np.ones(3))
        np.testing.assert_array_equal(
            sample_gradient(cost, NoiseModel(0.5), cost.optimum, rng), np.zeros(3)
        )

    def test_unbiased_componentwise(self):
        # Monte-Carlo oracle: the empirical mean must sit within three
        # standard errors of the exact gradient in every coordinate.
        rng = np.random.default_rng(123)
        d, n, sigma = 5, 100_000, 0.1
        cost = QuadraticCost(np.zeros(d), np.linspace(1, 2, d), rotation_seed=3)
        w = np.array([1.0, -0.5, 2.0, 0.3, -1.2])
        grad = cost.gradient(w)
        samples = sample_gradients(cost, NoiseModel(sigma), w, n, rng)
        se = sigma * np.linalg.norm(grad) / np.sqrt(d) / np.sqrt(n)
        np.testing.assert_allclose(samples.mean(axis=0), grad, atol=3 * se)

    def test_relative_variance_calibration(self):
        # E ||g - grad||^2 = sigma^2 ||grad||^2 holds with equality.
        rng = np.random.default_rng(42)
        d, n, sigma = 8, 100_000, 0.25
        cost = QuadraticCost(np.zeros(d), np.linspace(0.5, 1.5, d), rotation_seed=11)
        w = rng.standard_normal(d)
        grad = cost.gradient(w)
        samples = sample_gradients(cost, NoiseModel(sigma), w, n, rng)
        mean_sq_dev = np.mean(np.sum((samples - grad) ** 2, axis=1))
        target = sigma**2 * float(grad @ grad)
        assert abs(mean_sq_dev - target) <= 0.05 * target

    def test_mean_norm_bound(self):
        # E ||g|| <= (1 + sigma) ||grad||, with Monte-Carlo slack.
        rng = np.random.default_rng(7)
        d, n, sigma = 6, 100_000, 0.3
        cost = QuadraticCost(np.zeros(d), np.ones(d))
        w = rng.standard_normal(d)
        gnorm = np.linalg.norm(cost.gradient(w))
        samples = sample_gradients(cost, NoiseModel(sigma), w, n, rng)
        norms = np.linalg.norm(samples, axis=1)
        assert norms.mean() <= (1 + sigma) * gnorm + 3 * norms.std() / np.sqrt(n)


class TestAssumptionProperties:
    def test_lipschitz_and_strong_convexity(self, rng):
        d = 10
        mu, L = 0.5, 2.5
        cost = QuadraticCost.from_spectrum_mode(d, mu, L, "linear", rotation_seed=17)
        for _ in range(1000):
            w, wp = rng.standard_normal(d), rng.standard_normal(d)
            dg = cost.gradient(w) - cost.gradient(wp)
            dw = w - wp
            assert np.linalg.norm(dg) <= L * np.linalg.norm(dw) * (1 + 1e-12)
            assert dg @ dw >= mu * float(dw @ dw) * (1 - 1e-12)
