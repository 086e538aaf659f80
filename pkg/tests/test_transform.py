import numpy as np
import pytest

from lfikit.density import MoGDist, single_gaussian_mog
from lfikit.diffcore import ParamVector, build_layout, grad_of_scalar, tape
from lfikit.errors import (
    ConfigurationError,
    InvalidAtomError,
    LeakageTooHigh,
    NonPositiveDefinite,
    PrecisionNotPD,
)
from lfikit.transform import (
    AtomSet,
    BoxUniform,
    GaussianDist,
    atomic_log_prob,
    atomic_loss_from_matrix,
    gaussian_proposal_posterior,
    mog_proposal_posterior,
    snpe_a_correct,
    snpe_b_weight,
    truncated_posterior_sample,
)


def gauss1(mean, var):
    return GaussianDist(np.array([mean]), np.array([[np.sqrt(var)]]))


def grid_oracle_1d(post_logpdf, proposal_logpdf, prior_logpdf, lo=-20, hi=20, n=40001):
    """Pointwise density of grid-normalized post * proposal / prior."""
    xs = np.linspace(lo, hi, n)[:, None]
    logs = post_logpdf(xs) + proposal_logpdf(xs) - prior_logpdf(xs)
    vals = np.exp(logs - logs.max())
    z = np.trapezoid(vals[:, 0] if vals.ndim > 1 else vals, xs[:, 0])
    return xs, vals / z


def grid_oracle_2d(post_logpdf, proposal_logpdf, prior_logpdf, lo=-14, hi=14, n=561):
    axis = np.linspace(lo, hi, n)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    logs = post_logpdf(pts) + proposal_logpdf(pts) - prior_logpdf(pts)
    vals = np.exp(logs - logs.max()).reshape(n, n)
    z = np.trapezoid(np.trapezoid(vals, axis, axis=1), axis)
    return pts, (vals / z).ravel()


class TestGaussianProposalPosterior:
    def test_proposal_equals_prior_is_identity(self):
        prior = gauss1(0.3, 2.0)
        post = gauss1(1.0, 0.7)
        out = gaussian_proposal_posterior(post, prior, prior)
        np.testing.assert_allclose(out.mean, post.mean, atol=1e-12)
        np.testing.assert_allclose(out.cov, post.cov, rtol=1e-12)

    def test_1d_hand_case_and_grid_oracle(self):
        post = gauss1(0.0, 1.0)
        prior = gauss1(0.0, 4.0)
        proposal = gauss1(0.0, 1.0)
        out = gaussian_proposal_posterior(post, prior, proposal)
        assert out.cov[0, 0] == pytest.approx(4.0 / 7.0, rel=1e-12)
        assert out.mean[0] == pytest.approx(0.0, abs=1e-12)
        xs, oracle = grid_oracle_1d(post.log_prob, proposal.log_prob, prior.log_prob)
        mine = np.exp(out.log_prob(xs))
        mask = oracle > oracle.max() * 1e-8
        np.testing.assert_allclose(mine[mask], oracle[mask], rtol=1e-6)

    def test_uniform_prior_zero_precision(self):
        post = gauss1(0.5, 2.0)
        proposal = gauss1(-0.2, 3.0)
        prior = BoxUniform(np.array([-50.0]), np.array([50.0]))
        out = gaussian_proposal_posterior(post, prior, proposal)
        assert 1.0 / out.cov[0, 0] == pytest.approx(1.0 / 2.0 + 1.0 / 3.0, rel=1e-12)

    def test_wider_proposal_than_prior_raises(self):
        post = gauss1(0.0, 10.0)
        prior = gauss1(0.0, 1.0)
        proposal = gauss1(0.0, 50.0)
        with pytest.raises(PrecisionNotPD):
            gaussian_proposal_posterior(post, prior, proposal)


def random_case_2d(rng, uniform_prior):
    k, l = 2, 2
    means = rng.normal(scale=1.5, size=(k, 2))
    chols = np.zeros((k, 2, 2))
    for i in range(k):
        a = rng.normal(scale=0.3, size=(2, 2))
        chols[i] = np.linalg.cholesky(a @ a.T + 0.4 * np.eye(2))
    post = MoGDist(rng.dirichlet(np.ones(k)), means, chols)
    pm = rng.normal(scale=1.0, size=(l, 2))
    pc = np.zeros((l, 2, 2))
    for i in range(l):
        a = rng.normal(scale=0.2, size=(2, 2))
        pc[i] = np.linalg.cholesky(a @ a.T + 0.5 * np.eye(2))
    proposal = MoGDist(rng.dirichlet(np.ones(l)), pm, pc)
    if uniform_prior:
        prior = BoxUniform(-14 * np.ones(2), 14 * np.ones(2))
        prior_logpdf = lambda p: np.zeros(p.shape[0])  # constant cancels
    else:
        prior = GaussianDist(np.zeros(2), np.sqrt(6.0) * np.eye(2))
        prior_logpdf = prior.log_prob
    return post, proposal, prior, prior_logpdf


class TestMoGProposalPosterior:
    def test_single_components_reduce_to_gaussian_rule(self):
        post_g = gauss1(0.7, 1.3)
        prior = gauss1(0.0, 5.0)
        proposal_g = gauss1(-0.4, 0.9)
        got = mog_proposal_posterior(post_g.as_mog(), prior, proposal_g)
        want = gaussian_proposal_posterior(post_g, prior, proposal_g)
        assert got.n_components == 1
        np.testing.assert_allclose(got.means[0], want.mean, rtol=1e-12)
        np.testing.assert_allclose(got.covs[0], want.cov, rtol=1e-10)
        assert got.weights[0] == pytest.approx(1.0)

    def test_proposal_equals_prior_keeps_weights(self):
        rng = np.random.default_rng(0)
        post, _, _, _ = random_case_2d(rng, uniform_prior=False)
        prior = GaussianDist(np.array([0.1, -0.3]), np.linalg.cholesky(4 * np.eye(2)))
        out = mog_proposal_posterior(post, prior, prior)
        np.testing.assert_allclose(out.weights, post.weights, rtol=1e-10)
        np.testing.assert_allclose(out.means, post.means, rtol=1e-10)
        np.testing.assert_allclose(out.covs, post.covs, rtol=1e-9)

    @pytest.mark.parametrize("uniform_prior", [True, False])
    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_grid_oracle_2d(self, uniform_prior, seed):
        rng = np.random.default_rng(seed)
        post, proposal, prior, prior_logpdf = random_case_2d(rng, uniform_prior)
        out = mog_proposal_posterior(post, prior, proposal)
        pts, oracle = grid_oracle_2d(post.log_prob, proposal.log_prob, prior_logpdf)
        mine = np.exp(out.log_prob(pts))
        mask = oracle > oracle.max() * 1e-6
        np.testing.assert_allclose(mine[mask], oracle[mask], rtol=1e-6)

    def test_not_pd_reports_component(self):
        post = single_gaussian_mog(np.zeros(1), np.array([[3.0]]))
        prior = gauss1(0.0, 0.5)
        proposal = single_gaussian_mog(np.zeros(1), np.array([[5.0]]))
        with pytest.raises(PrecisionNotPD) as exc:
            mog_proposal_posterior(post, prior, proposal)
        assert exc.value.component == (0, 0)


class TestSnpeACorrect:
    def test_proposal_equals_prior_identity(self):
        rng = np.random.default_rng(4)
        post, _, _, _ = random_case_2d(rng, uniform_prior=False)
        prior = GaussianDist(np.array([0.4, 0.0]), np.linalg.cholesky(3 * np.eye(2)))
        out = snpe_a_correct(post, prior, prior)
        np.testing.assert_allclose(out.weights, post.weights, rtol=1e-10)
        np.testing.assert_allclose(out.covs, post.covs, rtol=1e-9)

    @pytest.mark.parametrize("seed", [5, 6])
    def test_roundtrip_inverse_pair(self, seed):
        rng = np.random.default_rng(seed)
        post, _, prior, _ = random_case_2d(rng, uniform_prior=False)
        proposal = GaussianDist(rng.normal(size=2), np.linalg.cholesky(1.5 * np.eye(2)))
        forward = mog_proposal_posterior(post, prior, proposal)
        back = snpe_a_correct(forward, proposal, prior)
        np.testing.assert_allclose(back.weights, post.weights, atol=1e-10)
        np.testing.assert_allclose(back.means, post.means, atol=1e-10)
        np.testing.assert_allclose(back.covs, post.covs, atol=1e-10)

    def test_constructed_failure_under_uniform_prior(self):
        trained = single_gaussian_mog(np.zeros(1), np.array([[1.0]]))  # var 1
        proposal = gauss1(0.0, 0.5)
        prior = BoxUniform(np.array([-5.0]), np.array([5.0]))
        with pytest.raises(NonPositiveDefinite) as exc:
            snpe_a_correct(trained, proposal, prior)
        assert exc.value.component == 0


class TestSnpeBWeight:
    def test_proposal_equals_prior(self):
        prior = gauss1(0.0, 2.0)
        theta = np.array([0.3])
        w = snpe_b_weight(theta, prior, lambda t: np.exp(prior.log_prob(t)))
        assert w == pytest.approx(1.0, rel=1e-12)

    def test_box_prior_arithmetic(self):
        prior = BoxUniform(np.array([0.0, 0.0]), np.array([2.0, 2.0]))  # volume 4
        w = snpe_b_weight(np.array([1.0, 1.0]), prior, lambda t: 0.5)
        assert w == pytest.approx(0.5, rel=1e-12)

    def test_weights_average_to_one(self):
        rng = np.random.default_rng(7)
        prior = gauss1(0.0, 4.0)
        proposal = gauss1(0.8, 1.0)
        n = 100_000
        draws = proposal.sample(rng, n)
        w = np.exp(prior.log_prob(draws) - proposal.log_prob(draws))
        se = w.std() / np.sqrt(n)
        assert abs(w.mean() - 1.0) < 3 * se

    def test_zero_density_rejected(self):
        prior = gauss1(0.0, 1.0)
        with pytest.raises(ConfigurationError):
            snpe_b_weight(np.array([0.0]), prior, lambda t: 0.0)


class TestAtomic:
    def test_two_atom_arithmetic(self):
        atoms = AtomSet(np.array([[0.0], [1.0]]), np.array([0, 1]))
        prior = BoxUniform(np.array([-2.0]), np.array([2.0]))
        q = {0.0: np.log(0.3), 1.0: np.log(0.1)}
        lp0 = atomic_log_prob(lambda t: q[float(t[0])], prior, atoms, np.array([0.0]))
        lp1 = atomic_log_prob(lambda t: q[float(t[0])], prior, atoms, np.array([1.0]))
        assert np.exp(lp0) == pytest.approx(0.75, rel=1e-12)
        assert np.exp(lp1) == pytest.approx(0.25, rel=1e-12)

    def test_equal_values_give_uniform(self):
        m = 7
        atoms = AtomSet(np.arange(m, dtype=float)[:, None], np.arange(m))
        prior = BoxUniform(np.array([-1.0]), np.array([10.0]))
        lp = atomic_log_prob(lambda t: -1.234, prior, atoms, np.array([3.0]))
        assert np.exp(lp) == pytest.approx(1.0 / m, rel=1e-12)

    def test_nonuniform_prior_ratio(self):
        atoms = AtomSet(np.array([[0.0], [1.0]]), np.array([0, 1]))

        class TwoPointPrior:
            def log_prob(self, t):
                t = np.atleast_2d(t)
                return np.where(t[:, 0] < 0.5, np.log(0.5), np.log(0.25))

        q = {0.0: np.log(0.3), 1.0: np.log(0.1)}
        lp0 = atomic_log_prob(lambda t: q[float(t[0])], TwoPointPrior(), atoms,
                              np.array([0.0]))
        assert np.exp(lp0) == pytest.approx(0.6, rel=1e-12)

    def test_atom_outside_support_rejected(self):
        atoms = AtomSet(np.array([[0.0], [9.0]]), np.array([0, 1]))
        prior = BoxUniform(np.array([-1.0]), np.array([1.0]))
        with pytest.raises(InvalidAtomError):
            atomic_log_prob(lambda t: 0.0, prior, atoms, np.array([0.0]))

    def test_constant_estimator_max_entropy_loss(self):
        m = 6
        pair = np.full((m, m), -3.7)
        loss = atomic_loss_from_matrix(pair)
        assert loss == pytest.approx(m * np.log(m), rel=1e-12)

    def test_one_hot_estimator_zero_loss(self):
        m = 5
        pair = np.full((m, m), -1e3)
        np.fill_diagonal(pair, 1e3)
        assert atomic_loss_from_matrix(pair) == pytest.approx(0.0, abs=1e-10)

    def test_per_x_rescaling_invariance_value_and_gradient(self):
        rng = np.random.default_rng(8)
        m = 10
        base = rng.normal(size=(m, m))
        loss0 = atomic_loss_from_matrix(base)
        offsets = rng.normal(size=m)
        shifted = base + offsets[:, None]
        assert atomic_loss_from_matrix(shifted) == pytest.approx(loss0, abs=1e-10)

        layout, _ = build_layout({"c": (m,)})
        cvec = ParamVector(np.zeros(m), layout)

        def loss_fn(root):
            q = base + tape.reshape(root, (m, 1))
            return atomic_loss_from_matrix(q)

        grad = grad_of_scalar(loss_fn, cvec)
        assert np.max(np.abs(grad)) < 1e-8

    def test_ratio_identity_on_conjugate_toy(self):
        # q proportional to the analytic posterior => categorical transform
        # of q equals the transform of the true posterior, atom for atom
        rng = np.random.default_rng(9)
        x_o = 1.3
        post_mean, post_var = x_o / 2.0, 0.5
        prior = gauss1(0.0, 1.0)
        atoms_arr = rng.normal(size=(6, 1))
        atoms = AtomSet(atoms_arr, np.arange(6))
        post = gauss1(post_mean, post_var)

        def q_scaled(t):
            return float(post.log_prob(np.atleast_1d(t))) + 3.21  # q = c * posterior

        for j in range(6):
            via_q = atomic_log_prob(q_scaled, prior, atoms, atoms_arr[j])
            via_p = atomic_log_prob(lambda t: float(post.log_prob(np.atleast_1d(t))),
                                    prior, atoms, atoms_arr[j])
            assert via_q == pytest.approx(via_p, abs=1e-12)

    def test_duplicate_atom_vectors_allowed(self):
        atoms = AtomSet(np.array([[1.0], [1.0], [2.0]]), np.array([0, 1, 2]))
        prior = BoxUniform(np.array([0.0]), np.array([3.0]))
        lp = atomic_log_prob(lambda t: 0.0, prior, atoms, np.array([2.0]))
        assert np.exp(lp) == pytest.approx(1.0 / 3.0, rel=1e-12)

    def test_duplicate_indices_rejected(self):
        with pytest.raises(ConfigurationError):
            AtomSet(np.array([[1.0], [2.0]]), np.array([0, 0]))


class TestTruncatedSampling:
    def test_estimator_inside_support(self):
        prior = BoxUniform(np.array([-10.0, -10.0]), np.array([10.0, 10.0]))
        dist = single_gaussian_mog(np.zeros(2), 0.1 * np.eye(2))
        samples, rate = truncated_posterior_sample(
            lambda rng, k: dist.sample(rng, k), prior, np.random.default_rng(10), 5000)
        assert rate == 1.0
        assert samples.shape == (5000, 2)

    def test_half_normal_acceptance(self):
        prior = BoxUniform(np.array([0.0]), np.array([10.0]))
        dist = single_gaussian_mog(np.zeros(1), np.eye(1))
        rng = np.random.default_rng(11)
        n = 50_000
        samples, rate = truncated_posterior_sample(
            lambda r, k: dist.sample(r, k), prior, rng, n, max_draws=n * 4)
        assert rate == pytest.approx(0.5, abs=0.01)
        assert np.all((samples >= 0.0) & (samples <= 10.0))

    def test_leakage_error_with_partials(self):
        prior = BoxUniform(np.array([5.0]), np.array([6.0]))
        dist = single_gaussian_mog(np.zeros(1), np.eye(1))
        with pytest.raises(LeakageTooHigh) as exc:
            truncated_posterior_sample(lambda r, k: dist.sample(r, k), prior,
                                       np.random.default_rng(12), 1000, max_draws=5000)
        assert exc.value.acceptance_rate is not None
        assert exc.value.acceptance_rate < 0.01


class TestGraphTransform:
    def _setup(self, seed, uniform_prior):
        from lfikit.density import MDN

        rng = np.random.default_rng(seed)
        mdn = MDN(x_dim=2, theta_dim=2, n_components=2, hidden=(6,))
        params = mdn.init_params(rng)
        xs = rng.normal(size=(4, 2))
        thetas = rng.normal(size=(4, 2))
        proposal = MoGDist(
            np.array([0.6, 0.4]), rng.normal(scale=0.5, size=(2, 2)),
            np.stack([np.linalg.cholesky(0.5 * np.eye(2)) for _ in range(2)]))
        if uniform_prior:
            prior = BoxUniform(-12 * np.ones(2), 12 * np.ones(2))
        else:
            prior = GaussianDist(np.zeros(2), np.linalg.cholesky(8.0 * np.eye(2)))
        return mdn, params, xs, thetas, prior, proposal

    @pytest.mark.parametrize("uniform_prior", [True, False])
    def test_matches_numpy_transform(self, uniform_prior):
        from lfikit.transform import transformed_mog_log_prob

        mdn, params, xs, thetas, prior, proposal = self._setup(13, uniform_prior)
        psi = mdn.psi(params, xs)
        got = transformed_mog_log_prob(psi, thetas, prior, proposal)
        for b in range(4):
            emitted = mdn.emit(params, xs[b])
            ref = mog_proposal_posterior(emitted, prior, proposal)
            assert got[b] == pytest.approx(float(ref.log_prob(thetas[b])), rel=1e-9)

    def test_gradient(self):
        from lfikit.diffcore import finite_diff_check
        from lfikit.transform import transformed_mog_log_prob

        mdn, params, xs, thetas, prior, proposal = self._setup(14, False)

        def f(p):
            if isinstance(p, tape.Node):
                psi = mdn.psi(params, xs, root=p)
            else:
                psi = mdn.psi(params.with_values(np.asarray(p)), xs)
            return -tape.sum_(transformed_mog_log_prob(psi, thetas, prior, proposal))

        assert finite_diff_check(f, params, h=1e-5) < 1e-4
