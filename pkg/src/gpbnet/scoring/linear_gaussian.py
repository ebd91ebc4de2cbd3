"""Linear-Gaussian family score with an exact conjugate marginal likelihood.

Model: x = a0 + sum_i a_i u_i + eps, eps ~ N(0, s2). The prior is
normal-inverse-gamma: coefficients N(0, s2/g * I) and s2 ~ InvGamma(a, b),
so the marginal likelihood is closed form and needs no extra complexity
penalty. The posterior predictive is Student-t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from ..dataset import Dataset
from ..errors import DegenerateDataError
from .base import LINEAR_GAUSSIAN, FamilyKey, FamilyScore, ScoreConfig
from .gp_family import _continuous_slice


@dataclass(frozen=True)
class LinearGaussianFit:
    """Posterior summary sufficient for prediction."""

    coef_mean: np.ndarray  # intercept first, then one slope per parent
    precision: np.ndarray  # posterior precision of the coefficients
    a_n: float
    b_n: float


def _design(u: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((u.shape[0], 1)), u])


def linear_gaussian_family_score(
    child: int, parents, data: Dataset, config: ScoreConfig = ScoreConfig()
) -> FamilyScore:
    key = FamilyKey.make(child, parents)
    m = data.n_rows
    if m < len(key.parents) + 2:
        raise DegenerateDataError(
            f"family {key}: {m} rows < {len(key.parents) + 2} required"
        )
    x, u = _continuous_slice(data, key.child, key.parents)
    phi = _design(u)
    p = phi.shape[1]
    prec0 = config.lg_g * np.eye(p)
    prec_n = prec0 + phi.T @ phi
    coef_mean = np.linalg.solve(prec_n, phi.T @ x)
    a_n = config.lg_a + 0.5 * m
    b_n = config.lg_b + 0.5 * float(x @ x - coef_mean @ prec_n @ coef_mean)
    log_ml = (
        -0.5 * m * np.log(2.0 * np.pi)
        + 0.5 * (p * np.log(config.lg_g) - _logdet(prec_n))
        + config.lg_a * np.log(config.lg_b)
        - a_n * np.log(b_n)
        + gammaln(a_n)
        - gammaln(config.lg_a)
    )
    return FamilyScore(
        key=key,
        log_score=float(log_ml),
        fitted=LinearGaussianFit(coef_mean, prec_n, float(a_n), float(b_n)),
        penalty_applied=0.0,
        scorer_id=LINEAR_GAUSSIAN,
    )


def _logdet(a: np.ndarray) -> float:
    sign, val = np.linalg.slogdet(a)
    return float(val)


def linear_gaussian_log_density(fit: LinearGaussianFit, x_star: float, u_star) -> float:
    """Log posterior-predictive density (Student-t) at one query point."""
    phi = np.concatenate([[1.0], np.asarray(u_star, dtype=float).reshape(-1)])
    loc = float(phi @ fit.coef_mean)
    quad = float(phi @ np.linalg.solve(fit.precision, phi))
    scale2 = fit.b_n / fit.a_n * (1.0 + quad)
    df = 2.0 * fit.a_n
    z2 = (x_star - loc) ** 2 / scale2
    return float(
        gammaln(0.5 * (df + 1.0))
        - gammaln(0.5 * df)
        - 0.5 * np.log(df * np.pi * scale2)
        - 0.5 * (df + 1.0) * np.log1p(z2 / df)
    )
