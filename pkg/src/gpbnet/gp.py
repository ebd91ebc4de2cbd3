"""GP marginal likelihood, analytic gradients, and predictive densities.

The marginal log likelihood of targets x under a zero-mean GP with
covariance matrix C is

    L = -(M/2) ln(2 pi) - (1/2) ln|C| - (1/2) x^T C^-1 x

computed via Cholesky. Gradients use the standard identity
dL/dp = 0.5 * x^T C^-1 (dC/dp) C^-1 x - 0.5 * tr(C^-1 dC/dp), chain-ruled
into log-parameter coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .covariance import (
    Hyperparameters,
    build_covariance_matrix,
    cholesky_with_jitter,
    covariance_log_gradients,
    eval_covariance,
)
from .errors import SchemaError

# Diagnostics: how often numerical cancellation forced the predictive
# variance up to the noise floor.
_VARIANCE_CLAMPS = 0


def variance_clamp_count() -> int:
    return _VARIANCE_CLAMPS


def reset_variance_clamp_count() -> None:
    global _VARIANCE_CLAMPS
    _VARIANCE_CLAMPS = 0


def _check_shapes(targets: np.ndarray, inputs: np.ndarray) -> None:
    if inputs.ndim != 2:
        raise SchemaError("inputs must be an M x k matrix")
    if targets.shape != (inputs.shape[0],):
        raise SchemaError(
            f"targets length {targets.shape} does not match {inputs.shape[0]} rows"
        )
    if not (np.all(np.isfinite(targets)) and np.all(np.isfinite(inputs))):
        raise SchemaError("non-finite values in targets or inputs")


def log_marginal_likelihood(targets, inputs, theta: Hyperparameters) -> float:
    targets = np.asarray(targets, dtype=float)
    inputs = np.asarray(inputs, dtype=float)
    _check_shapes(targets, inputs)
    cov = build_covariance_matrix(inputs, theta)
    chol, _ = cholesky_with_jitter(cov, theta.diagonal_scale())
    alpha = cho_solve((chol, True), targets)
    m = targets.size
    return float(
        -0.5 * m * np.log(2.0 * np.pi)
        - np.sum(np.log(np.diag(chol)))
        - 0.5 * targets @ alpha
    )


def log_marginal_likelihood_gradient(targets, inputs, theta: Hyperparameters) -> np.ndarray:
    return log_marginal_likelihood_and_gradient(targets, inputs, theta)[1]


def log_marginal_likelihood_and_gradient(targets, inputs, theta: Hyperparameters):
    """Value and gradient with respect to ln(theta) in one factorization."""
    targets = np.asarray(targets, dtype=float)
    inputs = np.asarray(inputs, dtype=float)
    _check_shapes(targets, inputs)
    m = targets.size
    cov = build_covariance_matrix(inputs, theta)
    chol, jitter = cholesky_with_jitter(cov, theta.diagonal_scale())
    alpha = cho_solve((chol, True), targets)
    value = float(
        -0.5 * m * np.log(2.0 * np.pi)
        - np.sum(np.log(np.diag(chol)))
        - 0.5 * targets @ alpha
    )
    cov_inv = cho_solve((chol, True), np.eye(m))
    grad = np.empty(theta.n_free)
    for j, dcov in enumerate(covariance_log_gradients(inputs, theta)):
        quad = alpha @ dcov @ alpha
        trace = float(np.sum(cov_inv * dcov))
        grad[j] = 0.5 * (quad - trace)
    # the jitter scales with theta0 + theta1 + theta3, so it contributes to
    # those components' derivatives through the identity direction
    identity_term = 0.5 * (alpha @ alpha - np.trace(cov_inv)) * jitter / theta.diagonal_scale()
    for idx, component in zip(_DIAGONAL_SCALE_INDICES[min(theta.k, 1)], (theta.theta0, theta.theta1, theta.theta3)):
        grad[idx] += identity_term * component
    return value, grad


# positions of theta0, theta1, theta3 in the log vector: k = 0 packs
# (t0, t1, t3); k >= 1 packs (t0, t1, t2, t3, lambdas...)
_DIAGONAL_SCALE_INDICES = {0: (0, 1, 2), 1: (0, 1, 3)}


@dataclass(frozen=True)
class PredictiveDensity:
    """Univariate Gaussian prediction for a noisy observation."""

    mean: float
    variance: float

    def log_density(self, x: float) -> float:
        return float(
            -0.5 * np.log(2.0 * np.pi * self.variance)
            - 0.5 * (x - self.mean) ** 2 / self.variance
        )


@dataclass(frozen=True)
class GpPosterior:
    """Training data plus the factorized covariance needed for prediction.

    The stabilization jitter applied to the training covariance is kept and
    added to the prior variance of query points, so predictions are exact
    conditionals of the (jittered) joint and sequential one-step-ahead
    predictions telescope to the joint log likelihood.
    """

    inputs: np.ndarray
    targets: np.ndarray
    theta: Hyperparameters
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float

    @classmethod
    def fit(cls, targets, inputs, theta: Hyperparameters) -> "GpPosterior":
        from .covariance import JITTER_START

        targets = np.asarray(targets, dtype=float)
        inputs = np.asarray(inputs, dtype=float)
        if inputs.shape[0] == 0:
            base = JITTER_START * theta.diagonal_scale()
            return cls(inputs, targets, theta, np.zeros((0, 0)), np.zeros(0), base)
        _check_shapes(targets, inputs)
        cov = build_covariance_matrix(inputs, theta)
        chol, jitter = cholesky_with_jitter(cov, theta.diagonal_scale())
        alpha = cho_solve((chol, True), targets)
        return cls(inputs, targets, theta, chol, alpha, jitter)

    @property
    def n_train(self) -> int:
        return self.inputs.shape[0]


def _cross_covariances(posterior: GpPosterior, u_star: np.ndarray) -> np.ndarray:
    theta = posterior.theta
    train = posterior.inputs
    if theta.k == 0:
        return np.full(train.shape[0], theta.theta0 + theta.theta1)
    lam = np.asarray(theta.lengthscales)
    sq = np.sum((train - u_star[None, :]) ** 2 / lam**2, axis=1)
    return theta.theta0 * np.exp(-0.5 * sq) + theta.theta1 + theta.theta2 * (train @ u_star)


def predict(posterior: GpPosterior, u_star) -> PredictiveDensity:
    """Predictive density at a new input; includes observation noise."""
    global _VARIANCE_CLAMPS
    theta = posterior.theta
    u_star = np.asarray(u_star, dtype=float).reshape(-1)
    if u_star.size != theta.k:
        raise SchemaError(f"query has dimension {u_star.size}, expected {theta.k}")
    kappa = eval_covariance(u_star, u_star, theta, same_sample=True) + posterior.jitter
    if posterior.n_train == 0:
        return PredictiveDensity(mean=0.0, variance=kappa)
    k_vec = _cross_covariances(posterior, u_star)
    mean = float(k_vec @ posterior.alpha)
    v = solve_triangular(posterior.chol, k_vec, lower=True)
    variance = float(kappa - v @ v)
    if variance <= 0.0:
        _VARIANCE_CLAMPS += 1
        variance = theta.theta3
    return PredictiveDensity(mean=mean, variance=variance)
