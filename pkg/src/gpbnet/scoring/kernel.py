"""Kernel (nonparametric) family score via leave-one-out log loss.

The joint density over (child, parents) is a Gaussian kernel estimate with
one shared isotropic bandwidth; conditionals are ratios of joint and
parent-marginal estimates. The score of a family is the leave-one-out sum
of conditional log densities at the bandwidth that maximizes it. The
bandwidth is floored to keep the estimate from collapsing onto sharp
per-sample peaks when a variable takes only a few distinct values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..dataset import Dataset
from ..errors import DegenerateDataError
from .base import KERNEL, FamilyKey, FamilyScore, ScoreConfig
from .gp_family import _continuous_slice

_LOG_2PI = np.log(2.0 * np.pi)
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class KernelFit:
    bandwidth: float


def _sq_dists(a: np.ndarray) -> np.ndarray:
    norms = np.sum(a**2, axis=1)
    d = norms[:, None] + norms[None, :] - 2.0 * (a @ a.T)
    return np.maximum(d, 0.0)


def _loo_terms(dj: np.ndarray, du: np.ndarray, sigma: float) -> np.ndarray:
    m = dj.shape[0]
    off = ~np.eye(m, dtype=bool)
    ej = np.where(off, -dj / (2.0 * sigma**2), -np.inf)
    eu = np.where(off, -du / (2.0 * sigma**2), -np.inf)
    return logsumexp(ej, axis=1) - logsumexp(eu, axis=1) - 0.5 * np.log(2.0 * np.pi * sigma**2)


def kernel_loo_objective(x: np.ndarray, u: np.ndarray, sigma: float) -> float:
    """Sum over samples of the left-out conditional log density at ``sigma``."""
    joint = np.column_stack([x, u])
    return float(np.sum(_loo_terms(_sq_dists(joint), _sq_dists(u), sigma)))


def _golden_max(fun, lo: float, hi: float, iters: int = 40):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
    return (c, fc) if fc >= fd else (d, fd)


def kernel_family_score(
    child: int, parents, data: Dataset, config: ScoreConfig = ScoreConfig()
) -> FamilyScore:
    key = FamilyKey.make(child, parents)
    m = data.n_rows
    if m < 3:
        raise DegenerateDataError(f"family {key}: kernel score needs at least 3 rows, got {m}")
    x, u = _continuous_slice(data, key.child, key.parents)
    joint = np.column_stack([x, u])
    dj = _sq_dists(joint)
    du = _sq_dists(u)
    if np.max(dj) == 0.0:
        raise DegenerateDataError(f"family {key}: all samples identical")

    def objective(sigma: float) -> float:
        return float(np.sum(_loo_terms(dj, du, sigma)))

    grid = np.logspace(
        np.log10(config.kernel_grid_min),
        np.log10(config.kernel_grid_max),
        config.kernel_grid_points,
    )
    allowed = np.flatnonzero(grid >= config.kernel_bandwidth_floor)
    values = np.array([objective(grid[i]) for i in allowed])
    best = int(allowed[np.argmax(values)])
    lo = max(config.kernel_bandwidth_floor, grid[max(best - 1, 0)])
    hi = grid[min(best + 1, grid.size - 1)]
    log_sigma, refined = _golden_max(lambda s: objective(np.exp(s)), np.log(lo), np.log(hi))
    if refined >= values.max():
        sigma, score = float(np.exp(log_sigma)), float(refined)
    else:
        sigma, score = float(grid[best]), float(values.max())
    return FamilyScore(
        key=key,
        log_score=score,
        fitted=KernelFit(bandwidth=sigma),
        penalty_applied=0.0,
        scorer_id=KERNEL,
    )


def kernel_log_density(
    fit: KernelFit, x_train: np.ndarray, u_train: np.ndarray, x_star: float, u_star
) -> float:
    """Conditional log density at a new point using all training samples."""
    sigma = fit.bandwidth
    u_star = np.asarray(u_star, dtype=float).reshape(-1)
    dx = (x_train - x_star) ** 2
    du = np.sum((u_train - u_star[None, :]) ** 2, axis=1)
    lse_joint = logsumexp(-(dx + du) / (2.0 * sigma**2))
    lse_u = logsumexp(-du / (2.0 * sigma**2))
    return float(lse_joint - lse_u - 0.5 * np.log(2.0 * np.pi * sigma**2))
