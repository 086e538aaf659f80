import numpy as np
import pytest
from scipy import stats

from lfikit.density import MoGDist, single_gaussian_mog
from lfikit.errors import ConfigurationError

from oracles import trapezoid_grid_2d


def random_mog(rng, k=2, n=2, spread=1.0):
    weights = rng.dirichlet(np.ones(k) * 2.0)
    means = rng.normal(scale=spread, size=(k, n))
    chols = np.zeros((k, n, n))
    for i in range(k):
        a = rng.normal(scale=0.4, size=(n, n))
        chols[i] = np.linalg.cholesky(a @ a.T + 0.3 * np.eye(n))
    return MoGDist(weights, means, chols)


class TestLogProb:
    def test_standard_normal_at_mode(self):
        d = single_gaussian_mog(np.zeros(2), np.eye(2))
        assert d.log_prob(np.zeros(2)) == pytest.approx(-np.log(2 * np.pi), abs=1e-12)
        assert d.log_prob(np.zeros(2)) == pytest.approx(-1.837877066, abs=1e-6)

    def test_degenerate_two_component_mixture(self):
        single = single_gaussian_mog([0.3, -0.5], np.linalg.cholesky([[1.0, 0.2], [0.2, 0.5]]))
        double = MoGDist(np.array([0.5, 0.5]),
                         np.vstack([single.means, single.means]),
                         np.concatenate([single.chols, single.chols]))
        pts = np.random.default_rng(0).normal(size=(20, 2))
        np.testing.assert_allclose(double.log_prob(pts), single.log_prob(pts), rtol=1e-12)

    def test_normalizes_on_grid(self):
        d = random_mog(np.random.default_rng(42))
        total = trapezoid_grid_2d(lambda p: np.exp(d.log_prob(p)), -12, 12)
        assert total == pytest.approx(1.0, abs=1e-3)

    def test_dimension_mismatch(self):
        d = single_gaussian_mog(np.zeros(2), np.eye(2))
        with pytest.raises(ConfigurationError):
            d.log_prob(np.zeros(3))


class TestSample:
    def test_near_point_mass(self):
        d = single_gaussian_mog(np.array([1.5, -2.0]), 1e-6 * np.eye(2))
        samples = d.sample(np.random.default_rng(1), 1000)
        assert np.max(np.abs(samples - np.array([1.5, -2.0]))) < 1e-5

    def test_moments_standard_normal(self):
        d = single_gaussian_mog(np.zeros(2), np.eye(2))
        s = d.sample(np.random.default_rng(2), 100_000)
        assert np.max(np.abs(s.mean(axis=0))) < 0.02
        assert np.max(np.abs(s.var(axis=0) - 1.0)) < 0.05

    def test_component_frequencies(self):
        weights = np.array([0.2, 0.5, 0.3])
        means = np.array([[-20.0], [0.0], [20.0]])
        chols = np.full((3, 1, 1), 0.1)
        d = MoGDist(weights, means, chols)
        n = 100_000
        s = d.sample(np.random.default_rng(3), n)
        counts = np.array([(np.abs(s[:, 0] - m) < 10).sum() for m in (-20, 0, 20)])
        sigma = np.sqrt(n * weights * (1 - weights))
        assert np.all(np.abs(counts - n * weights) < 3 * sigma)

    def test_marginal_cdf_ks(self):
        d = random_mog(np.random.default_rng(7), k=3, n=2)
        s = d.sample(np.random.default_rng(8), 100_000)
        for dim in range(2):
            ks = stats.kstest(s[:, dim], lambda t: d.marginal_cdf(dim, t))
            assert ks.statistic < 0.01


class TestAlgebraHelpers:
    def test_affine_matches_sample_transform(self):
        rng = np.random.default_rng(9)
        d = random_mog(rng)
        shift, scale = np.array([1.0, -2.0]), np.array([0.5, 3.0])
        mapped = d.affine(shift, scale)
        pts = rng.normal(size=(50, 2))
        direct = d.log_prob((pts - shift) / scale) - np.log(scale).sum()
        np.testing.assert_allclose(mapped.log_prob(pts), direct, rtol=1e-10)

    def test_moment_match(self):
        d = random_mog(np.random.default_rng(10), k=3)
        g = d.moment_match_gaussian()
        np.testing.assert_allclose(g.mean, d.mean(), rtol=1e-12)
        np.testing.assert_allclose(g.cov, d.cov(), rtol=1e-10)

    def test_invalid_weights_rejected(self):
        with pytest.raises(ConfigurationError):
            MoGDist(np.array([0.6, 0.6]), np.zeros((2, 1)), np.ones((2, 1, 1)))

    def test_nonpositive_diag_rejected(self):
        with pytest.raises(ConfigurationError):
            MoGDist(np.array([1.0]), np.zeros((1, 1)), np.array([[[-1.0]]]))
