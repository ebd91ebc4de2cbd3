"""Covariance function for GP conditional densities.

The covariance of two function values at parent vectors u, u' is

    C(u, u') = theta0 * exp(-0.5 * sum_k (u_k - u'_k)^2 / lam_k^2)
             + theta1 + theta2 * sum_k u_k u'_k + theta3 * [same sample]

The noise term fires on sample identity (row index), not on input-value
equality: duplicated inputs must still be allowed to differ by observation
noise. Predictions at new points therefore include theta3 in the prior
variance, so held-out log losses are densities of noisy observations.

Zero-parent families have no squared-exponential distances and no linear
term; their covariance degenerates to theta0 + theta1 + theta3 * [i == j]
with three free parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky

from .errors import SchemaError, SingularCovarianceError

# Stabilization jitter, relative to the covariance's own diagonal scale
# (theta0 + theta1 + theta3). Tying the scale to theta rather than to the
# empirical diagonal keeps prefix covariance matrices exactly nested, which
# the sequential-prediction identity relies on.
JITTER_START = 1e-8
JITTER_MAX = 1e-4

# Box bounds for hyperparameters during optimization (log-space search).
THETA_FLOOR = 1e-8
THETA_CEIL = 1e4


@dataclass(frozen=True)
class Hyperparameters:
    """Covariance parameters. ``theta2``/``lengthscales`` absent when k = 0."""

    theta0: float
    theta1: float
    theta3: float
    theta2: float | None = None
    lengthscales: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "lengthscales", tuple(float(v) for v in self.lengthscales))
        vals = [self.theta0, self.theta1, self.theta3, *self.lengthscales]
        if self.theta2 is not None:
            vals.append(self.theta2)
        if not all(np.isfinite(v) and v >= 0 for v in vals):
            raise SchemaError("hyperparameters must be finite and non-negative")
        if any(lam <= 0 for lam in self.lengthscales):
            raise SchemaError("lengthscales must be strictly positive")
        if (self.theta2 is None) != (len(self.lengthscales) == 0):
            raise SchemaError("theta2 must be present exactly when there are parents")

    @property
    def k(self) -> int:
        return len(self.lengthscales)

    @property
    def n_free(self) -> int:
        """Free-parameter count K: 3 for zero parents, else 4 + k."""
        return 3 if self.k == 0 else 4 + self.k

    def diagonal_scale(self) -> float:
        return self.theta0 + self.theta1 + self.theta3

    def to_log_vector(self) -> np.ndarray:
        floor = THETA_FLOOR
        if self.k == 0:
            vals = [self.theta0, self.theta1, self.theta3]
        else:
            vals = [self.theta0, self.theta1, self.theta2, self.theta3, *self.lengthscales]
        return np.log(np.maximum(vals, floor))

    @classmethod
    def from_log_vector(cls, psi: np.ndarray, k: int) -> "Hyperparameters":
        psi = np.asarray(psi, dtype=float)
        if k == 0:
            if psi.shape != (3,):
                raise SchemaError(f"expected 3 log-parameters for k=0, got {psi.shape}")
            t0, t1, t3 = np.exp(psi)
            return cls(theta0=t0, theta1=t1, theta3=t3)
        if psi.shape != (4 + k,):
            raise SchemaError(f"expected {4 + k} log-parameters for k={k}, got {psi.shape}")
        t0, t1, t2, t3 = np.exp(psi[:4])
        lams = tuple(np.exp(psi[4:]))
        return cls(theta0=t0, theta1=t1, theta2=t2, theta3=t3, lengthscales=lams)

    @classmethod
    def default_init(cls, k: int) -> "Hyperparameters":
        """Standard starting point for optimization on standardized data."""
        if k == 0:
            return cls(theta0=1.0, theta1=0.1, theta3=0.1)
        return cls(theta0=1.0, theta1=0.1, theta2=0.1, theta3=0.1, lengthscales=(1.0,) * k)


def eval_covariance(u, u_prime, theta: Hyperparameters, same_sample: bool) -> float:
    """Pointwise covariance C(u, u'); ``same_sample`` adds the noise term."""
    u = np.asarray(u, dtype=float).reshape(-1)
    u_prime = np.asarray(u_prime, dtype=float).reshape(-1)
    k = theta.k
    if u.size != k or u_prime.size != k:
        raise SchemaError(
            f"dimension mismatch: u has {u.size}, u' has {u_prime.size}, lengthscales {k}"
        )
    value = theta.theta0
    if k > 0:
        lam = np.asarray(theta.lengthscales)
        value = theta.theta0 * np.exp(-0.5 * np.sum((u - u_prime) ** 2 / lam**2))
        value += theta.theta2 * float(u @ u_prime)
    value += theta.theta1
    if same_sample:
        value += theta.theta3
    return float(value)


def _component_matrices(inputs: np.ndarray, theta: Hyperparameters):
    """Shared pieces of C: squared-exp factor E and per-dimension sq. distances."""
    m, k = inputs.shape
    if k != theta.k:
        raise SchemaError(f"inputs have {k} columns but lengthscales have {theta.k}")
    if k == 0:
        return np.ones((m, m)), None, None
    lam = np.asarray(theta.lengthscales)
    diffs = inputs[:, None, :] - inputs[None, :, :]  # (m, m, k)
    sq = diffs**2
    expo = np.exp(-0.5 * np.tensordot(sq, 1.0 / lam**2, axes=([2], [0])))
    gram = inputs @ inputs.T
    return expo, gram, sq


def build_covariance_matrix(inputs, theta: Hyperparameters) -> np.ndarray:
    """Full M x M covariance with the noise term on the diagonal (no jitter)."""
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2:
        raise SchemaError("inputs must be an M x k matrix")
    m = inputs.shape[0]
    if m < 1:
        raise SchemaError("need at least one row")
    expo, gram, _ = _component_matrices(inputs, theta)
    cov = theta.theta0 * expo + theta.theta1
    if theta.k > 0:
        cov = cov + theta.theta2 * gram
    cov = cov + theta.theta3 * np.eye(m)
    return cov


def covariance_log_gradients(inputs: np.ndarray, theta: Hyperparameters) -> list[np.ndarray]:
    """dC/d(ln theta_j) for each free parameter, ordered as the log vector."""
    inputs = np.asarray(inputs, dtype=float)
    m = inputs.shape[0]
    expo, gram, sq = _component_matrices(inputs, theta)
    grads = [theta.theta0 * expo, theta.theta1 * np.ones((m, m))]
    if theta.k > 0:
        grads.append(theta.theta2 * gram)
    grads.append(theta.theta3 * np.eye(m))
    if theta.k > 0:
        lam = np.asarray(theta.lengthscales)
        base = theta.theta0 * expo
        for j in range(theta.k):
            grads.append(base * sq[:, :, j] / lam[j] ** 2)
    return grads


def cholesky_with_jitter(cov: np.ndarray, scale: float):
    """Lower Cholesky factor under the escalating-jitter policy.

    Starts at JITTER_START * scale, multiplies by 10 on failure up to
    JITTER_MAX * scale, then raises SingularCovarianceError.
    """
    m = cov.shape[0]
    jitter = JITTER_START * scale
    while jitter <= JITTER_MAX * scale * (1 + 1e-12):
        try:
            return cholesky(cov + jitter * np.eye(m), lower=True), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise SingularCovarianceError(
        f"covariance not positive definite at maximal jitter {JITTER_MAX * scale:g}"
    )
