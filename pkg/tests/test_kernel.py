import numpy as np
import pytest

from gpbnet.dataset import CONTINUOUS, Column, Dataset, standardize
from gpbnet.errors import DegenerateDataError
from gpbnet.scoring import ScoreConfig, kernel_family_score, kernel_loo_objective
from gpbnet.scoring.kernel import kernel_log_density


def continuous_dataset(matrix):
    cols = [Column(f"X{j}", CONTINUOUS) for j in range(matrix.shape[1])]
    return Dataset(cols, matrix)


def brute_force_loo(x, u, sigma):
    """Literally rebuild the leave-one-out estimator for every sample."""
    m = len(x)
    d = u.shape[1]
    total = 0.0
    for i in range(m):
        others = [j for j in range(m) if j != i]
        log_joint_terms = []
        log_u_terms = []
        for j in others:
            dj = (x[i] - x[j]) ** 2 + np.sum((u[i] - u[j]) ** 2)
            du = np.sum((u[i] - u[j]) ** 2)
            log_joint_terms.append(
                -0.5 * (d + 1) * np.log(2 * np.pi * sigma**2) - dj / (2 * sigma**2)
            )
            log_u_terms.append(-0.5 * d * np.log(2 * np.pi * sigma**2) - du / (2 * sigma**2))
        log_joint = np.logaddexp.reduce(log_joint_terms) - np.log(m - 1)
        log_marg = np.logaddexp.reduce(log_u_terms) - np.log(m - 1)
        total += log_joint - log_marg
    return total


class TestLooObjective:
    def test_matches_brute_force_rebuild(self):
        rng = np.random.default_rng(10)
        for m in (5, 17, 50):
            u = rng.normal(size=(m, 2))
            x = u[:, 0] ** 2 + 0.3 * rng.normal(size=m)
            for sigma in (0.1, 0.3, 1.0, 3.0):
                fast = kernel_loo_objective(x, u, sigma)
                brute = brute_force_loo(x, u, sigma)
                assert fast == pytest.approx(brute, rel=1e-9, abs=1e-9)

    def test_empty_parent_set_matches_brute_force(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=20)
        u = np.zeros((20, 0))
        for sigma in (0.2, 0.8):
            assert kernel_loo_objective(x, u, sigma) == pytest.approx(
                brute_force_loo(x, u, sigma), rel=1e-9
            )


class TestKernelFamilyScore:
    def test_two_rows_rejected(self):
        data = continuous_dataset(np.array([[0.0, 1.0], [1.0, 2.0]]))
        with pytest.raises(DegenerateDataError):
            kernel_family_score(0, (1,), data)

    def test_identical_samples_rejected(self):
        data = continuous_dataset(np.ones((10, 2)))
        with pytest.raises(DegenerateDataError):
            kernel_family_score(0, (1,), data)

    def test_score_is_loo_sum_at_fitted_bandwidth(self):
        rng = np.random.default_rng(12)
        u = rng.normal(size=(40, 1))
        x = np.sin(2 * u[:, 0]) + 0.2 * rng.normal(size=40)
        data = continuous_dataset(np.column_stack([x, u]))
        fs = kernel_family_score(0, (1,), data)
        assert fs.log_score == pytest.approx(
            kernel_loo_objective(x, u, fs.fitted.bandwidth), rel=1e-12
        )

    def test_bandwidth_respects_floor(self):
        # a 9-valued integer column treated as continuous: without the floor
        # the estimator collapses onto per-value delta peaks
        rng = np.random.default_rng(13)
        raw = rng.integers(0, 9, size=120).astype(float)
        data, _ = standardize(continuous_dataset(raw.reshape(-1, 1)))
        config = ScoreConfig()
        fs = kernel_family_score(0, (), data, config)
        assert fs.fitted.bandwidth >= config.kernel_bandwidth_floor
        assert np.isfinite(fs.log_score)

    def test_better_bandwidth_than_grid_neighbours(self):
        rng = np.random.default_rng(14)
        u = rng.normal(size=(60, 1))
        x = u[:, 0] + 0.3 * rng.normal(size=60)
        data = continuous_dataset(np.column_stack([x, u]))
        fs = kernel_family_score(0, (1,), data)
        at_fit = kernel_loo_objective(x, u, fs.fitted.bandwidth)
        for factor in (0.5, 2.0):
            assert at_fit >= kernel_loo_objective(x, u, fs.fitted.bandwidth * factor) - 1e-9


class TestConditionalDensity:
    def test_normalizes_at_random_conditioning_points(self):
        rng = np.random.default_rng(15)
        u = rng.normal(size=(100, 1))
        x = np.tanh(u[:, 0]) + 0.2 * rng.normal(size=100)
        data = continuous_dataset(np.column_stack([x, u]))
        fs = kernel_family_score(0, (1,), data)
        grid = np.linspace(-12, 12, 10_000)
        for u_star in rng.normal(size=5):
            dens = np.exp(
                [kernel_log_density(fs.fitted, x, u, g, [u_star]) for g in grid]
            )
            mass = np.trapezoid(dens, grid)
            assert mass == pytest.approx(1.0, abs=0.02)
