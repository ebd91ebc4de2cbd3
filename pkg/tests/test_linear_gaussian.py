import numpy as np
import pytest
from scipy.special import gammaln

from gpbnet.dataset import CONTINUOUS, Column, Dataset, standardize
from gpbnet.errors import DegenerateDataError
from gpbnet.scoring import ScoreConfig, gp_family_score, linear_gaussian_family_score
from gpbnet.scoring.linear_gaussian import linear_gaussian_log_density


def continuous_dataset(matrix):
    cols = [Column(f"X{j}", CONTINUOUS) for j in range(matrix.shape[1])]
    return Dataset(cols, matrix)


def quadrature_log_evidence(x, u, config, n_sigma=400, n_coef=161, span=10.0):
    """Dense numerical integration over (a0, a1, s2) for one parent.

    Integrates the likelihood against the normal-inverse-gamma prior:
    coefficient grids are centered on the conditional posterior so the mass
    is fully covered; the noise variance is integrated on a log grid.
    """
    phi = np.column_stack([np.ones_like(u), u])
    m = len(x)
    log_s2 = np.linspace(np.log(1e-4), np.log(1e4), n_sigma)
    s2_grid = np.exp(log_s2)
    prec = config.lg_g * np.eye(2) + phi.T @ phi
    mean = np.linalg.solve(prec, phi.T @ x)
    cov_scale = np.linalg.inv(prec)
    sds = np.sqrt(np.diag(cov_scale))
    outer_vals = np.empty(n_sigma)
    for i, s2 in enumerate(s2_grid):
        sd = np.sqrt(s2)
        a0 = mean[0] + np.linspace(-span, span, n_coef) * sds[0] * sd
        a1 = mean[1] + np.linspace(-span, span, n_coef) * sds[1] * sd
        aa0, aa1 = np.meshgrid(a0, a1, indexing="ij")
        resid = x[None, None, :] - aa0[..., None] - aa1[..., None] * u[None, None, :]
        log_lik = -0.5 * m * np.log(2 * np.pi * s2) - 0.5 * np.sum(resid**2, axis=-1) / s2
        log_prior_coef = (
            -np.log(2 * np.pi * s2 / config.lg_g)
            - 0.5 * config.lg_g * (aa0**2 + aa1**2) / s2
        )
        # inverse-gamma(a, b) density in s2
        log_prior_s2 = (
            config.lg_a * np.log(config.lg_b)
            - gammaln(config.lg_a)
            - (config.lg_a + 1) * np.log(s2)
            - config.lg_b / s2
        )
        integrand = np.exp(log_lik + log_prior_coef)
        inner = np.trapezoid(np.trapezoid(integrand, a1, axis=1), a0, axis=0)
        outer_vals[i] = inner * np.exp(log_prior_s2) * s2  # jacobian of log grid
    return float(np.log(np.trapezoid(outer_vals, log_s2)))


class TestClosedForm:
    def test_matches_dense_quadrature(self):
        rng = np.random.default_rng(5)
        u = rng.normal(size=4)
        x = 0.7 * u + 0.5 * rng.normal(size=4)
        data = continuous_dataset(np.column_stack([x, u]))
        config = ScoreConfig()
        closed = linear_gaussian_family_score(0, (1,), data, config).log_score
        numeric = quadrature_log_evidence(x, u, config)
        assert closed == pytest.approx(numeric, abs=1e-4)

    def test_matches_quadrature_second_instance(self):
        rng = np.random.default_rng(6)
        u = rng.normal(size=5)
        x = -1.2 * u + 1.1 + 0.8 * rng.normal(size=5)
        data = continuous_dataset(np.column_stack([x, u]))
        config = ScoreConfig()
        closed = linear_gaussian_family_score(0, (1,), data, config).log_score
        numeric = quadrature_log_evidence(x, u, config)
        assert closed == pytest.approx(numeric, abs=1e-4)

    def test_too_few_samples_rejected(self):
        data = continuous_dataset(np.ones((2, 2)) + np.arange(4).reshape(2, 2))
        with pytest.raises(DegenerateDataError):
            linear_gaussian_family_score(0, (1,), data)


class TestModelComparisons:
    def test_linear_dependence_is_home_turf(self):
        rng = np.random.default_rng(7)
        u = rng.normal(size=100)
        x = 2 * u + 0.1 * rng.normal(size=100)
        data, _ = standardize(continuous_dataset(np.column_stack([x, u])))
        with_parent = linear_gaussian_family_score(0, (1,), data).log_score
        without = linear_gaussian_family_score(0, (), data).log_score
        assert with_parent - without > 50

    def test_sinusoidal_dependence_is_invisible(self):
        rng = np.random.default_rng(8)
        u = rng.normal(size=100)
        x = np.sin(3 * u) + 0.1 * rng.normal(size=100)
        data, _ = standardize(continuous_dataset(np.column_stack([x, u])))
        lg_gain = (
            linear_gaussian_family_score(0, (1,), data).log_score
            - linear_gaussian_family_score(0, (), data).log_score
        )
        gp_gain = (
            gp_family_score(0, (1,), data).log_score
            - gp_family_score(0, (), data).log_score
        )
        assert lg_gain < 5
        assert gp_gain > 20

    def test_rank_deficient_design_is_finite(self):
        # duplicated parent values: the proper prior keeps the score defined
        u = np.array([1.0, 1.0, 1.0, 1.0, 1.0])
        x = np.array([0.1, -0.2, 0.3, 0.0, -0.1])
        data = continuous_dataset(np.column_stack([x, u]))
        score = linear_gaussian_family_score(0, (1,), data)
        assert np.isfinite(score.log_score)


class TestPredictive:
    def test_student_t_density_integrates_to_one(self):
        rng = np.random.default_rng(9)
        u = rng.normal(size=30)
        x = 1.5 * u + 0.4 * rng.normal(size=30)
        data = continuous_dataset(np.column_stack([x, u]))
        fit = linear_gaussian_family_score(0, (1,), data).fitted
        grid = np.linspace(-30, 30, 20001)
        dens = np.exp([linear_gaussian_log_density(fit, g, [0.3]) for g in grid])
        assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-3)
