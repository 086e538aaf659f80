import numpy as np
import pytest

from lfikit.density import MAF, MDN, Standardizer, standardize_fit
from lfikit.diffcore import ParamVector, finite_diff_check, tape
from lfikit.errors import ConfigurationError

from oracles import trapezoid_grid_2d

LOG_2PI = np.log(2 * np.pi)


def zero_params(model) -> ParamVector:
    return ParamVector(np.zeros(model.n_params), model.layout)


class TestMDNEmit:
    def test_zero_net_emits_unit_mixture(self):
        mdn = MDN(x_dim=3, theta_dim=2, n_components=4, hidden=(8, 8))
        d = mdn.emit(zero_params(mdn), np.array([0.4, -1.0, 2.2]))
        np.testing.assert_allclose(d.weights, 0.25)
        np.testing.assert_array_equal(d.means, np.zeros((4, 2)))
        np.testing.assert_array_equal(d.chols, np.broadcast_to(np.eye(2), (4, 2, 2)))

    def test_distinct_inputs_distinct_psi(self):
        rng = np.random.default_rng(0)
        for seed in range(5):
            mdn = MDN(x_dim=2, theta_dim=2, n_components=3, hidden=(10,))
            params = mdn.init_params(np.random.default_rng(seed))
            a = mdn.emit(params, rng.normal(size=2))
            b = mdn.emit(params, rng.normal(size=2))
            assert not np.allclose(a.means, b.means)

    def test_weights_sum_to_one(self):
        rng = np.random.default_rng(1)
        for seed in range(100):
            mdn = MDN(x_dim=2, theta_dim=1, n_components=5, hidden=(6,))
            params = mdn.init_params(np.random.default_rng(seed))
            d = mdn.emit(params, rng.normal(size=2))
            assert abs(d.weights.sum() - 1.0) <= 1e-12

    def test_rejects_bad_input(self):
        mdn = MDN(x_dim=2, theta_dim=1, n_components=2, hidden=(4,))
        with pytest.raises(ConfigurationError):
            mdn.emit(zero_params(mdn), np.zeros(3))

    def test_emitted_mog_normalizes(self):
        mdn = MDN(x_dim=1, theta_dim=2, n_components=3, hidden=(8,))
        params = mdn.init_params(np.random.default_rng(3))
        d = mdn.emit(params, np.array([0.7]))
        total = trapezoid_grid_2d(lambda p: np.exp(d.log_prob(p)), -10, 10)
        assert total == pytest.approx(1.0, abs=1e-3)


class TestMDNLogProb:
    def test_matches_emitted_mixture(self):
        mdn = MDN(x_dim=2, theta_dim=2, n_components=4, hidden=(12,))
        params = mdn.init_params(np.random.default_rng(5))
        rng = np.random.default_rng(6)
        xs = rng.normal(size=(7, 2))
        thetas = rng.normal(size=(7, 2))
        got = mdn.log_prob(params, xs, thetas)
        want = [mdn.emit(params, x).log_prob(t) for x, t in zip(xs, thetas)]
        np.testing.assert_allclose(got, want, rtol=1e-12)

    def test_pair_matrix_consistent(self):
        mdn = MDN(x_dim=1, theta_dim=2, n_components=2, hidden=(6,))
        params = mdn.init_params(np.random.default_rng(7))
        rng = np.random.default_rng(8)
        xs = rng.normal(size=(5, 1))
        thetas = rng.normal(size=(5, 2))
        pair = mdn.pair_log_prob(params, xs, thetas)
        for i in range(5):
            for j in range(5):
                assert pair[i, j] == pytest.approx(
                    float(mdn.emit(params, xs[i]).log_prob(thetas[j])), rel=1e-12)

    def test_nll_gradient(self):
        mdn = MDN(x_dim=2, theta_dim=2, n_components=2, hidden=(5,))
        params = mdn.init_params(np.random.default_rng(9))
        rng = np.random.default_rng(10)
        xs = rng.normal(size=(6, 2))
        thetas = rng.normal(size=(6, 2))

        def f(p):
            if isinstance(p, tape.Node):
                return -tape.sum_(mdn.log_prob(params, xs, thetas, root=p))
            return -np.sum(mdn.log_prob(params.with_values(np.asarray(p)), xs, thetas))

        assert finite_diff_check(f, params, h=1e-5) < 1e-4


class TestMAF:
    def test_identity_flow_is_standard_normal(self):
        maf = MAF(x_dim=2, theta_dim=3, n_mades=3, hidden=(8, 8), perm_seed=4)
        params = zero_params(maf)
        rng = np.random.default_rng(11)
        xs = rng.normal(size=(9, 2))
        thetas = rng.normal(size=(9, 3))
        want = -0.5 * np.sum(thetas**2, axis=1) - 1.5 * LOG_2PI
        np.testing.assert_allclose(maf.log_prob(params, xs, thetas), want, rtol=1e-12)

    def test_constant_shift_1d(self):
        maf = MAF(x_dim=1, theta_dim=1, n_mades=1, hidden=(4, 4))
        params = zero_params(maf)
        params.segment("m0_bshift")[:] = 0.7
        thetas = np.linspace(-2, 2, 11)[:, None]
        xs = np.zeros((11, 1))
        want = -0.5 * (thetas[:, 0] - 0.7) ** 2 - 0.5 * LOG_2PI
        np.testing.assert_allclose(maf.log_prob(params, xs, thetas), want, rtol=1e-12)

    def test_random_flow_normalizes(self):
        maf = MAF(x_dim=1, theta_dim=2, n_mades=2, hidden=(6, 6), perm_seed=1)
        params = maf.init_params(np.random.default_rng(12))
        x = np.array([[0.3]])

        def density(pts):
            xs = np.repeat(x, pts.shape[0], axis=0)
            return np.exp(maf.log_prob(params, xs, pts))

        assert trapezoid_grid_2d(density, -12, 12) == pytest.approx(1.0, abs=1e-3)

    def test_autoregressive_masking(self):
        maf = MAF(x_dim=2, theta_dim=4, n_mades=3, hidden=(10, 10), perm_seed=2)
        params = maf.init_params(np.random.default_rng(13))
        rng = np.random.default_rng(14)
        x = rng.normal(size=(1, 2))
        seg = params.segment
        for l in range(maf.n_mades):
            xproj = x @ seg(f"m{l}_Wx")
            z = rng.normal(size=(1, 4))
            for j in range(4):
                z2 = z.copy()
                z2[0, j] += 0.5
                s1, a1 = maf.block_shift_scale(seg, l, z, xproj)
                s2, a2 = maf.block_shift_scale(seg, l, z2, xproj)
                np.testing.assert_array_equal(s1[0, :j + 1], s2[0, :j + 1])
                np.testing.assert_array_equal(a1[0, :j + 1], a2[0, :j + 1])

    def test_sampling_identity_flow_moments(self):
        maf = MAF(x_dim=1, theta_dim=2, n_mades=2, hidden=(4, 4), perm_seed=3)
        params = zero_params(maf)
        s = maf.sample(params, np.zeros(1), np.random.default_rng(15), 100_000)
        assert np.max(np.abs(s.mean(axis=0))) < 0.02
        assert np.max(np.abs(s.var(axis=0) - 1.0)) < 0.05

    def test_sample_roundtrip_recovers_noise(self):
        maf = MAF(x_dim=2, theta_dim=3, n_mades=4, hidden=(8, 8), perm_seed=5)
        params = maf.init_params(np.random.default_rng(16))
        x = np.array([0.2, -0.4])
        base = np.random.default_rng(77).standard_normal((50, 3))
        samples = maf.sample(params, x, np.random.default_rng(77), 50)
        back = maf.transform_to_base(params, x[None], samples)
        np.testing.assert_allclose(back, base, atol=1e-9)

    def test_own_sample_loglik_consistency(self):
        maf = MAF(x_dim=1, theta_dim=2, n_mades=2, hidden=(6, 6), perm_seed=6)
        params = maf.init_params(np.random.default_rng(17))
        x = np.array([0.5])
        n = 10_000
        s = maf.sample(params, x, np.random.default_rng(18), n)
        u = maf.transform_to_base(params, x[None], s)
        base_nll = 0.5 * np.sum(u**2, axis=1) + LOG_2PI
        # own samples mapped to base noise must match the differential
        # entropy of N(0, I_2) = 1 + log(2*pi) nats
        assert abs(base_nll.mean() - (1.0 + LOG_2PI)) < 0.05

    def test_nll_gradient(self):
        maf = MAF(x_dim=2, theta_dim=2, n_mades=2, hidden=(5, 5), perm_seed=7)
        params = maf.init_params(np.random.default_rng(19))
        rng = np.random.default_rng(20)
        xs = rng.normal(size=(5, 2))
        thetas = rng.normal(size=(5, 2))

        def f(p):
            if isinstance(p, tape.Node):
                return -tape.sum_(maf.log_prob(params, xs, thetas, root=p))
            return -np.sum(maf.log_prob(params.with_values(np.asarray(p)), xs, thetas))

        assert finite_diff_check(f, params, h=1e-5) < 1e-4

    def test_pair_log_prob_matches_loop(self):
        maf = MAF(x_dim=2, theta_dim=2, n_mades=2, hidden=(6, 6), perm_seed=8)
        params = maf.init_params(np.random.default_rng(21))
        rng = np.random.default_rng(22)
        xs = rng.normal(size=(4, 2))
        thetas = rng.normal(size=(4, 2))
        pair = maf.pair_log_prob(params, xs, thetas)
        for i in range(4):
            row = maf.log_prob(params, np.repeat(xs[[i]], 4, axis=0), thetas)
            np.testing.assert_allclose(pair[i], row, rtol=1e-10)


class TestStandardizer:
    def test_constant_column(self):
        with pytest.warns(RuntimeWarning):
            s = standardize_fit(np.column_stack([np.full(10, 3.0), np.arange(10.0)]))
        assert s.shift[0] == 3.0 and s.scale[0] == 1.0

    def test_fit_then_apply_centers(self):
        rng = np.random.default_rng(23)
        data = rng.normal(size=(50, 3)) * 4 + 7
        s = standardize_fit(data)
        out = s.apply(data)
        assert np.max(np.abs(out.mean(axis=0))) < 1e-12
        assert np.max(np.abs(out.std(axis=0) - 1.0)) < 1e-12

    def test_roundtrip(self):
        rng = np.random.default_rng(24)
        s = standardize_fit(rng.normal(size=(20, 2)))
        v = rng.normal(size=(5, 2))
        np.testing.assert_allclose(s.invert(s.apply(v)), v, atol=1e-12)

    def test_identity(self):
        s = Standardizer.identity(3)
        v = np.array([1.0, -2.0, 3.0])
        np.testing.assert_array_equal(s.apply(v), v)
