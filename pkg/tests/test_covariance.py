import numpy as np
import pytest

from gpbnet.covariance import (
    Hyperparameters,
    build_covariance_matrix,
    cholesky_with_jitter,
    eval_covariance,
)
from gpbnet.errors import SchemaError


def theta(t0, t1, t2, t3, lams=()):
    if lams:
        return Hyperparameters(theta0=t0, theta1=t1, theta2=t2, theta3=t3, lengthscales=lams)
    return Hyperparameters(theta0=t0, theta1=t1, theta3=t3)


class TestEvalCovariance:
    def test_zero_distance_pure_amplitude(self):
        th = theta(1, 0, 0, 0, (1,))
        assert eval_covariance([0.5], [0.5], th, same_sample=True) == pytest.approx(1.0)

    def test_offset_plus_amplitude_at_origin(self):
        th = theta(1, 1, 1, 0, (1,))
        assert eval_covariance([0], [0], th, same_sample=False) == pytest.approx(2.0)

    def test_hand_evaluated_mixed_terms(self):
        th = theta(2, 0.5, 0.25, 0.7, (2,))
        expected = 2 * np.exp(-0.5) + 0.5 + 0.25 * 3
        assert eval_covariance([1], [3], th, same_sample=False) == pytest.approx(expected)

    def test_noise_only_on_same_sample(self):
        th = theta(1, 0, 0, 0.7, (1,))
        same = eval_covariance([2.0], [2.0], th, same_sample=True)
        other = eval_covariance([2.0], [2.0], th, same_sample=False)
        assert same - other == pytest.approx(0.7)

    def test_dimension_mismatch_rejected(self):
        th = theta(1, 0, 0, 0.5, (1.0, 2.0))
        with pytest.raises(SchemaError):
            eval_covariance([1.0], [1.0, 2.0], th, same_sample=False)

    def test_zero_parent_case(self):
        th = theta(1.5, 0.5, None, 0.25)
        assert eval_covariance([], [], th, same_sample=False) == pytest.approx(2.0)
        assert eval_covariance([], [], th, same_sample=True) == pytest.approx(2.25)


class TestBuildCovarianceMatrix:
    def test_single_point_diagonal(self):
        th = theta(1, 0, 0, 0.5, (1,))
        cov = build_covariance_matrix(np.array([[3.7]]), th)
        assert cov == pytest.approx(np.array([[1.5]]))

    def test_duplicate_inputs_noise_only_on_diagonal(self):
        th = theta(1, 0, 0, 0.5, (1,))
        cov = build_covariance_matrix(np.zeros((2, 1)), th)
        assert cov == pytest.approx(np.array([[1.5, 1.0], [1.0, 1.5]]))

    def test_matches_pairwise_brute_force(self):
        rng = np.random.default_rng(3)
        inputs = rng.normal(size=(7, 2))
        th = theta(1.2, 0.3, 0.4, 0.6, (0.8, 1.5))
        cov = build_covariance_matrix(inputs, th)
        brute = np.empty((7, 7))
        for i in range(7):
            for j in range(7):
                brute[i, j] = eval_covariance(inputs[i], inputs[j], th, same_sample=(i == j))
        np.testing.assert_allclose(cov, brute, rtol=1e-12)

    def test_symmetric(self):
        rng = np.random.default_rng(4)
        inputs = rng.normal(size=(9, 3))
        th = theta(2.0, 0.1, 0.7, 0.2, (1.0, 2.0, 0.5))
        cov = build_covariance_matrix(inputs, th)
        np.testing.assert_allclose(cov, cov.T, rtol=0, atol=0)


class TestJitterPolicy:
    def test_psd_across_theta_ranges_on_standardized_data(self):
        # components anywhere in [1e-4, 1e4] must factor after the jitter policy
        rng = np.random.default_rng(5)
        for trial in range(40):
            k = int(rng.integers(0, 4))
            inputs = rng.normal(size=(25, k))
            vals = np.exp(rng.uniform(np.log(1e-4), np.log(1e4), size=4 + k))
            if k == 0:
                th = Hyperparameters(theta0=vals[0], theta1=vals[1], theta3=vals[3])
            else:
                th = Hyperparameters(
                    theta0=vals[0], theta1=vals[1], theta2=vals[2], theta3=vals[3],
                    lengthscales=tuple(vals[4:]),
                )
            cov = build_covariance_matrix(inputs, th)
            chol, _ = cholesky_with_jitter(cov, th.diagonal_scale())
            rel = np.linalg.norm(chol @ chol.T - cov) / np.linalg.norm(cov)
            assert rel < 1e-6

    def test_jitter_reported(self):
        th = theta(1, 0.1, 0.1, 0.5, (1,))
        cov = build_covariance_matrix(np.zeros((3, 1)), th)
        _, jitter = cholesky_with_jitter(cov, th.diagonal_scale())
        assert jitter == pytest.approx(1e-8 * th.diagonal_scale())


class TestHyperparameters:
    def test_free_parameter_count(self):
        assert theta(1, 1, None, 1).n_free == 3
        assert theta(1, 1, 1, 1, (1,)).n_free == 5
        assert theta(1, 1, 1, 1, (1, 1, 1)).n_free == 7

    def test_log_vector_roundtrip(self):
        th = theta(1.5, 0.2, 0.7, 0.05, (0.9, 2.2))
        back = Hyperparameters.from_log_vector(th.to_log_vector(), 2)
        assert back.theta0 == pytest.approx(th.theta0)
        assert back.lengthscales == pytest.approx(th.lengthscales)

    def test_theta2_requires_parents(self):
        with pytest.raises(SchemaError):
            Hyperparameters(theta0=1, theta1=1, theta3=1, theta2=0.5)
        with pytest.raises(SchemaError):
            Hyperparameters(theta0=1, theta1=1, theta3=1, lengthscales=(1.0,))
