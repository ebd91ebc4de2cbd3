import numpy as np
import pytest

from gpbnet.covariance import Hyperparameters, eval_covariance
from gpbnet.gp import (
    GpPosterior,
    log_marginal_likelihood,
    log_marginal_likelihood_and_gradient,
    log_marginal_likelihood_gradient,
    predict,
    reset_variance_clamp_count,
    variance_clamp_count,
)

LOG_2PI = np.log(2 * np.pi)


def random_family(rng, m, k):
    inputs = rng.normal(size=(m, k))
    targets = rng.normal(size=m)
    theta = Hyperparameters(
        theta0=float(rng.uniform(0.3, 3.0)),
        theta1=float(rng.uniform(0.05, 1.0)),
        theta2=float(rng.uniform(0.05, 1.0)),
        theta3=float(rng.uniform(0.1, 1.0)),
        lengthscales=tuple(rng.uniform(0.5, 2.0, size=k)),
    )
    return targets, inputs, theta


class TestLogMarginalLikelihood:
    def test_single_standard_normal_point(self):
        theta = Hyperparameters(theta0=1, theta1=0, theta3=0)
        value = log_marginal_likelihood([0.0], np.zeros((1, 0)), theta)
        assert value == pytest.approx(-0.5 * LOG_2PI, abs=1e-6)

    def test_identity_covariance_two_points(self):
        theta = Hyperparameters(theta0=0, theta1=0, theta3=1)
        value = log_marginal_likelihood([1.0, 1.0], np.zeros((2, 0)), theta)
        assert value == pytest.approx(-LOG_2PI - 1.0, abs=1e-6)

    def test_chain_rule_identity(self):
        # joint log likelihood telescopes into one-step-ahead predictions
        rng = np.random.default_rng(11)
        for _ in range(5):
            m = 40
            targets, inputs, theta = random_family(rng, m, int(rng.integers(1, 4)))
            joint = log_marginal_likelihood(targets, inputs, theta)
            seq = sum(
                predict(GpPosterior.fit(targets[:i], inputs[:i], theta), inputs[i]).log_density(
                    targets[i]
                )
                for i in range(m)
            )
            assert abs(joint - seq) < 1e-8

    def test_chain_rule_under_reordering(self):
        rng = np.random.default_rng(12)
        targets, inputs, theta = random_family(rng, 30, 2)
        joint = log_marginal_likelihood(targets, inputs, theta)
        perm = rng.permutation(30)
        tp, ip = targets[perm], inputs[perm]
        seq = sum(
            predict(GpPosterior.fit(tp[:i], ip[:i], theta), ip[i]).log_density(tp[i])
            for i in range(30)
        )
        assert abs(joint - seq) < 1e-8

    def test_permutation_invariance(self):
        rng = np.random.default_rng(13)
        targets, inputs, theta = random_family(rng, 35, 3)
        base = log_marginal_likelihood(targets, inputs, theta)
        for _ in range(5):
            perm = rng.permutation(35)
            assert abs(log_marginal_likelihood(targets[perm], inputs[perm], theta) - base) < 1e-9


class TestGradient:
    def test_noise_only_closed_form(self):
        # C = theta3 * I gives dL/d(ln theta3) = -M/2 + x^T x / (2 theta3)
        rng = np.random.default_rng(21)
        x = rng.normal(size=12)
        theta = Hyperparameters(theta0=0, theta1=0, theta3=0.7)
        grad = log_marginal_likelihood_gradient(x, np.zeros((12, 0)), theta)
        expected = -6.0 + x @ x / (2 * 0.7)
        assert grad[2] == pytest.approx(expected, rel=1e-6)

    def test_matches_central_finite_differences(self):
        # relative error per component, denominator floored at 1: below that
        # scale the FD value itself carries ~eps*|L|/h of cancellation noise
        rng = np.random.default_rng(22)
        h = 1e-5
        for _ in range(20):
            k = int(rng.integers(1, 4))
            targets, inputs, theta = random_family(rng, 30, k)
            value, grad = log_marginal_likelihood_and_gradient(targets, inputs, theta)
            psi = theta.to_log_vector()
            for j in range(psi.size):
                up, down = psi.copy(), psi.copy()
                up[j] += h
                down[j] -= h
                fd = (
                    log_marginal_likelihood(targets, inputs, Hyperparameters.from_log_vector(up, k))
                    - log_marginal_likelihood(
                        targets, inputs, Hyperparameters.from_log_vector(down, k)
                    )
                ) / (2 * h)
                assert abs(grad[j] - fd) < 1e-5 * max(1.0, abs(fd))


class TestPosteriorInvariants:
    def test_cholesky_reconstruction_and_solve(self):
        rng = np.random.default_rng(31)
        targets, inputs, theta = random_family(rng, 25, 2)
        post = GpPosterior.fit(targets, inputs, theta)
        from gpbnet.covariance import build_covariance_matrix

        cov = build_covariance_matrix(inputs, theta) + post.jitter * np.eye(25)
        rel = np.linalg.norm(post.chol @ post.chol.T - cov) / np.linalg.norm(cov)
        assert rel < 1e-8
        rel_solve = np.linalg.norm(cov @ post.alpha - targets) / np.linalg.norm(targets)
        assert rel_solve < 1e-8


class TestPredict:
    def test_prior_prediction(self):
        theta = Hyperparameters(theta0=1, theta1=0, theta2=0, theta3=0.5, lengthscales=(1,))
        post = GpPosterior.fit(np.zeros(0), np.zeros((0, 1)), theta)
        density = predict(post, [0.0])
        assert density.mean == 0.0
        assert density.variance == pytest.approx(1.5, rel=1e-6)

    def test_single_point_matrix_algebra(self):
        theta = Hyperparameters(theta0=2, theta1=0.3, theta2=0.2, theta3=0.4, lengthscales=(1.2,))
        u1, x1, u_star = np.array([0.4]), 0.8, np.array([1.1])
        post = GpPosterior.fit([x1], [u1], theta)
        c11 = eval_covariance(u1, u1, theta, same_sample=True) + post.jitter
        c1s = eval_covariance(u_star, u1, theta, same_sample=False)
        kappa = eval_covariance(u_star, u_star, theta, same_sample=True) + post.jitter
        density = predict(post, u_star)
        assert density.mean == pytest.approx(c1s * x1 / c11, rel=1e-10)
        assert density.variance == pytest.approx(kappa - c1s**2 / c11, rel=1e-10)

    def test_far_point_reverts_to_prior(self):
        # pure squared-exponential: far from data, mean -> 0 and var -> t0+t3
        rng = np.random.default_rng(41)
        theta = Hyperparameters(theta0=1.3, theta1=0, theta2=0, theta3=0.2, lengthscales=(0.7,))
        inputs = rng.uniform(-1, 1, size=(20, 1))
        targets = np.sin(2 * inputs[:, 0])
        post = GpPosterior.fit(targets, inputs, theta)
        density = predict(post, [50.0])
        assert abs(density.mean) < 1e-6
        assert density.variance == pytest.approx(1.5, abs=1e-6)

    def test_interpolates_noiseless_data_at_noise_floor(self):
        rng = np.random.default_rng(42)
        inputs = np.linspace(-2, 2, 15).reshape(-1, 1)
        targets = np.sin(1.3 * inputs[:, 0])
        theta = Hyperparameters(
            theta0=1.0, theta1=1e-8, theta2=1e-8, theta3=1e-8, lengthscales=(1.0,)
        )
        post = GpPosterior.fit(targets, inputs, theta)
        for i in range(15):
            assert abs(predict(post, inputs[i]).mean - targets[i]) < 1e-3

    def test_variance_never_below_noise(self):
        rng = np.random.default_rng(43)
        targets, inputs, theta = random_family(rng, 30, 1)
        post = GpPosterior.fit(targets, inputs, theta)
        for u in rng.normal(size=(20, 1)):
            assert predict(post, u).variance >= theta.theta3

    def test_clamp_counter_tracks_cancellation(self):
        reset_variance_clamp_count()
        assert variance_clamp_count() == 0
