"""Conjugate-gradient ascent for MAP hyperparameter search.

All hyperparameters are optimized in log coordinates, which keeps them
positive and makes the scale of moves comparable across parameters. The
hyperparameter prior is uniform in log space, so the MAP objective is just
the log marginal likelihood as a function of the log parameters.

Polak-Ribiere directions with restarts, backtracking Armijo line search.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .covariance import THETA_CEIL, THETA_FLOOR, Hyperparameters
from .errors import GpbnetError, OptimizationError
from .gp import log_marginal_likelihood, log_marginal_likelihood_and_gradient

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CgConfig:
    max_iter: int = 100
    rel_tol: float = 1e-6  # relative objective improvement counting as progress
    stall_limit: int = 5  # consecutive no-progress iterations before stopping
    grad_tol: float = 1e-4  # sup-norm of the projected gradient at convergence
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 40
    lower: float = np.log(THETA_FLOOR)
    upper: float = np.log(THETA_CEIL)


@dataclass(frozen=True)
class CgResult:
    x: np.ndarray
    value: float
    initial_value: float
    n_iter: int
    grad_norm: float  # projected sup-norm


def _projected_gradient(x, g, config: CgConfig) -> np.ndarray:
    """Zero out components pushing outward at active box bounds."""
    g = g.copy()
    g[(x <= config.lower) & (g < 0)] = 0.0
    g[(x >= config.upper) & (g > 0)] = 0.0
    return g


def cg_ascent(value_and_grad, x0, config: CgConfig = CgConfig(), value=None) -> CgResult:
    """Maximize a smooth function from ``x0``; never accepts a worse point.

    ``value_and_grad(x)`` must return ``(value, gradient)``. ``value``, if
    given, is a cheaper value-only evaluation used for line-search trials.
    Non-finite values are treated as rejected trials. Convergence is judged
    by the projected gradient, since the search is box-constrained.
    """
    if value is None:
        value = lambda x: value_and_grad(x)[0]  # noqa: E731
    x = np.clip(np.asarray(x0, dtype=float), config.lower, config.upper)
    f, g = value_and_grad(x)
    if not np.isfinite(f):
        raise OptimizationError("objective not finite at the starting point")
    f0 = f
    gp = _projected_gradient(x, g, config)
    d = gp.copy()
    alpha = 1.0
    n_iter = 0
    stalls = 0
    for n_iter in range(1, config.max_iter + 1):
        if np.max(np.abs(gp)) <= config.grad_tol:
            break
        if float(gp @ d) <= 0.0:  # not an ascent direction: restart on the gradient
            d = gp.copy()
        step, trial = _armijo_search(value, x, f, gp, d, alpha, config)
        if trial is None and not np.array_equal(d, gp):
            d = gp.copy()
            step, trial = _armijo_search(value, x, f, gp, d, 1.0, config)
        if trial is None:
            # no ascent even along the gradient: try jumping the worst flat
            # coordinate straight to its bound, else we are numerically done
            slammed = _slam_to_bound(value, value_and_grad, x, f, gp, config)
            if slammed is None:
                break
            x, f, g = slammed
            gp = _projected_gradient(x, g, config)
            d = gp.copy()
            stalls = 0
            continue
        alpha = min(max(step, 1e-6), 1.0)  # next search starts from a sane step
        x_new, f_new = trial
        f_new, g_new = value_and_grad(x_new)
        improved = f_new - f
        beta = max(0.0, float(g_new @ (g_new - g)) / float(g @ g))
        gp_new = _projected_gradient(x_new, g_new, config)
        d = gp_new + beta * d
        x, f, g, gp = x_new, f_new, g_new, gp_new
        if improved <= config.rel_tol * max(1.0, abs(f)):
            stalls += 1
            slammed = _slam_to_bound(value, value_and_grad, x, f, gp, config)
            if slammed is not None:
                x, f, g = slammed
                gp = _projected_gradient(x, g, config)
                d = gp.copy()
                stalls = 0
            elif stalls >= config.stall_limit:
                break
        else:
            stalls = 0
    return CgResult(
        x=x, value=f, initial_value=f0, n_iter=n_iter, grad_norm=float(np.max(np.abs(gp)))
    )


def _slam_to_bound(value, value_and_grad, x, f, gp, config: CgConfig):
    """Try moving single nearly-flat coordinates to their optimal bound.

    Log-parameters whose maximum sits at a box bound (an irrelevant offset
    or linear variance, say) make CG creep: their gradient shrinks with the
    parameter, so progress is logarithmic. A direct jump is accepted only
    if the objective improves.
    """
    for i in np.argsort(-np.abs(gp)):
        if abs(gp[i]) <= config.grad_tol:
            return None
        candidate = x.copy()
        candidate[i] = config.lower if gp[i] < 0 else config.upper
        if candidate[i] == x[i]:
            continue
        if value(candidate) > f:
            f_new, g_new = value_and_grad(candidate)
            return candidate, f_new, g_new
    return None


def _armijo_search(value, x, f, g, d, alpha, config: CgConfig):
    """Armijo backtracking with growth and a parabolic polish.

    Doubles the step while the objective keeps improving (flat directions
    whose maximum sits on a box bound need long steps), then refines the
    bracketed 1-D maximum with a few parabolic interpolations so conjugate
    directions stay informative. Returns (step, (x_new, f_new)) or
    (alpha, None) on failure.
    """

    def phi(a):
        x_new = np.clip(x + a * d, config.lower, config.upper)
        return x_new, value(x_new)

    def acceptable(a, x_new, f_new):
        gain_floor = config.armijo_c * float(g @ (x_new - x))
        return gain_floor > 0.0 and np.isfinite(f_new) and f_new >= f + gain_floor

    a_mid = alpha
    x_mid, f_mid = phi(a_mid)
    if acceptable(a_mid, x_mid, f_mid):
        a_lo, f_lo = 0.0, f
        bracketed = False
        for _ in range(60):  # enough doublings to cross the whole box
            a_probe = 2.0 * a_mid
            x_probe, f_probe = phi(a_probe)
            if not np.isfinite(f_probe) or f_probe <= f_mid:
                a_hi, f_hi = a_probe, f_probe
                bracketed = True
                break
            a_lo, f_lo = a_mid, f_mid
            a_mid, x_mid, f_mid = a_probe, x_probe, f_probe
        if not bracketed:
            return a_mid, (x_mid, f_mid)
        a_mid, x_mid, f_mid = _refine_bracket(
            phi, (a_lo, f_lo), (a_mid, x_mid, f_mid), (a_hi, f_hi)
        )
        return a_mid, (x_mid, f_mid)
    a = a_mid
    for _ in range(config.max_backtracks):
        a *= config.backtrack
        x_new, f_new = phi(a)
        if acceptable(a, x_new, f_new):
            return a, (x_new, f_new)
    return alpha, None


def _refine_bracket(phi, lo, mid, hi, rounds: int = 4):
    """Shrink a bracketed 1-D maximum by parabolic interpolation/bisection."""
    a_lo, f_lo = lo
    a_mid, x_mid, f_mid = mid
    a_hi, f_hi = hi
    for _ in range(rounds):
        a_new = _parabola_vertex(a_lo, f_lo, a_mid, f_mid, a_hi, f_hi)
        if a_new is None or not (a_lo < a_new < a_hi) or np.isclose(a_new, a_mid):
            if a_mid - a_lo > a_hi - a_mid:
                a_new = 0.5 * (a_lo + a_mid)
            else:
                a_new = 0.5 * (a_mid + a_hi)
        x_new, f_new = phi(a_new)
        if not np.isfinite(f_new):
            f_new = -np.inf
        if f_new > f_mid:
            if a_new < a_mid:
                a_hi, f_hi = a_mid, f_mid
            else:
                a_lo, f_lo = a_mid, f_mid
            a_mid, x_mid, f_mid = a_new, x_new, f_new
        elif a_new < a_mid:
            a_lo, f_lo = a_new, f_new
        else:
            a_hi, f_hi = a_new, f_new
    return a_mid, x_mid, f_mid


def _parabola_vertex(a1, f1, a2, f2, a3, f3):
    if not (np.isfinite(f1) and np.isfinite(f2) and np.isfinite(f3)):
        return None
    denom = (a2 - a1) * (f2 - f3) - (a2 - a3) * (f2 - f1)
    if denom == 0.0:
        return None
    return a2 - 0.5 * ((a2 - a1) ** 2 * (f2 - f3) - (a2 - a3) ** 2 * (f2 - f1)) / denom


@dataclass(frozen=True)
class GpOptimizerConfig:
    restarts: int = 3  # perturbed starts in addition to the default one
    perturb_sigma: float = 0.5  # log-space scale of restart perturbations
    seed: int = 0
    cg: CgConfig = field(default_factory=CgConfig)
    init: Hyperparameters | None = None  # default_init(k) unless given


def optimize_hyperparameters(targets, inputs, config: GpOptimizerConfig = GpOptimizerConfig()):
    """MAP hyperparameters by conjugate-gradient ascent with restarts.

    Returns ``(theta, objective)`` for the best restart. Raises
    :class:`OptimizationError` (carrying the best initial point as a
    fallback) if every restart fails numerically.
    """
    targets = np.asarray(targets, dtype=float)
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2 or inputs.shape[0] != targets.size:
        raise GpbnetError("targets and inputs disagree on the sample count")
    if targets.size < 2:
        raise GpbnetError("hyperparameter optimization needs at least 2 samples")
    k = inputs.shape[1]

    def objective(psi):
        theta = Hyperparameters.from_log_vector(psi, k)
        try:
            return log_marginal_likelihood_and_gradient(targets, inputs, theta)
        except GpbnetError:
            return -np.inf, np.zeros_like(psi)

    def objective_value(psi):
        theta = Hyperparameters.from_log_vector(psi, k)
        try:
            return log_marginal_likelihood(targets, inputs, theta)
        except GpbnetError:
            return -np.inf

    init = config.init if config.init is not None else Hyperparameters.default_init(k)
    psi0 = init.to_log_vector()
    rng = np.random.default_rng(config.seed)
    starts = [psi0] + [
        psi0 + config.perturb_sigma * rng.standard_normal(psi0.size)
        for _ in range(config.restarts)
    ]

    best: CgResult | None = None
    fallback = None
    for psi_start in starts:
        f_start = objective(psi_start)[0]
        if np.isfinite(f_start) and (fallback is None or f_start > fallback[1]):
            fallback = (Hyperparameters.from_log_vector(psi_start, k), f_start)
        try:
            result = cg_ascent(objective, psi_start, config.cg, value=objective_value)
        except OptimizationError:
            continue
        if best is None or result.value > best.value:
            best = result
    if best is None:
        raise OptimizationError("all restarts failed numerically", fallback=fallback)
    return Hyperparameters.from_log_vector(best.x, k), best.value


def tightened(config: GpOptimizerConfig, **cg_overrides) -> GpOptimizerConfig:
    """Copy of ``config`` with CG settings overridden (testing convenience)."""
    return replace(config, cg=replace(config.cg, **cg_overrides))
