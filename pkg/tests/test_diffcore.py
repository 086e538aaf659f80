import numpy as np
import pytest

from lfikit.diffcore import (
    AdamState,
    MLPSpec,
    ParamVector,
    adam_step,
    build_layout,
    finite_diff_check,
    grad_of_scalar,
    init_mlp_params,
    mlp_forward,
    tape,
)
from lfikit.errors import ConfigurationError, NumericError


def _flat_params(values):
    values = np.asarray(values, dtype=np.float64)
    layout, _ = build_layout({"w": values.shape})
    return ParamVector(values, layout)


class TestTapeOps:
    def test_quadratic_gradient(self):
        params = _flat_params([1.0, 2.0])
        grad = grad_of_scalar(lambda root: tape.sum_(tape.square(root)), params)
        np.testing.assert_allclose(grad, [2.0, 4.0])

    def test_unused_segment_gets_zero_adjoint(self):
        layout, n = build_layout({"a": (2,), "b": (3,)})
        params = ParamVector(np.arange(1.0, 6.0), layout)

        def loss(root):
            return tape.sum_(tape.square(params.segment_node(root, "a")))

        grad = grad_of_scalar(loss, params)
        np.testing.assert_allclose(grad[2:], 0.0)
        np.testing.assert_allclose(grad[:2], [2.0, 4.0])

    def test_linear_fd_error_tiny(self):
        params = _flat_params(np.arange(5.0))
        coef = np.linspace(-1.0, 1.0, 5)
        err = finite_diff_check(lambda p: tape.sum_(tape.mul(p, coef)), params)
        assert err < 1e-10

    def test_sum_of_sines_against_cos_oracle(self):
        # central differences checked against the exact cosine gradient
        rng = np.random.default_rng(0)
        params = _flat_params(rng.uniform(-1.0, 1.0, size=10))
        err = finite_diff_check(lambda p: np.sum(np.sin(tape.value_of(p))),
                                params, h=1e-5, grad=np.cos(params.values))
        assert err < 1e-6

    def test_tanh_gradient_exact(self):
        rng = np.random.default_rng(0)
        params = _flat_params(rng.uniform(-1.0, 1.0, size=10))
        err = finite_diff_check(lambda p: tape.sum_(tape.tanh(p)), params, h=1e-5)
        assert err < 1e-6
        grad = grad_of_scalar(lambda p: tape.sum_(tape.tanh(p)), params)
        np.testing.assert_allclose(grad, 1.0 - np.tanh(params.values) ** 2, rtol=1e-12)

    def test_dead_parameter_zero_error(self):
        layout, _ = build_layout({"used": (2,), "dead": (1,)})
        params = ParamVector(np.array([0.3, -0.2, 5.0]), layout)

        def f(p):
            if isinstance(p, tape.Node):
                part = params.segment_node(p, "used")
            else:
                part = p[:2]
            return tape.sum_(tape.square(part))

        grad = grad_of_scalar(f, params)
        assert grad[2] == 0.0
        assert finite_diff_check(f, params) < 1e-8

    @pytest.mark.parametrize("axis,keepdims", [(-1, False), (0, True), (1, False)])
    def test_logsumexp_matches_numpy(self, axis, keepdims):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(4, 5))
        got = tape.logsumexp(x, axis=axis, keepdims=keepdims)
        hi = x.max(axis=axis, keepdims=True)
        want = np.log(np.exp(x - hi).sum(axis=axis, keepdims=True)) + hi
        if not keepdims:
            want = np.squeeze(want, axis=axis)
        np.testing.assert_allclose(got, want, rtol=1e-12)

    def test_logsumexp_gradient(self):
        rng = np.random.default_rng(2)
        params = _flat_params(rng.normal(size=6))

        def f(p):
            m = tape.reshape(p, (2, 3))
            return tape.sum_(tape.logsumexp(m, axis=-1))

        assert finite_diff_check(f, params) < 1e-7

    def test_matmul_and_take_gradients(self):
        rng = np.random.default_rng(3)
        params = _flat_params(rng.normal(size=12))
        x = rng.normal(size=(3, 4))

        def f(p):
            w = tape.reshape(p, (4, 3))
            y = tape.matmul(x, w)
            return tape.sum_(tape.square(y[1:, :2]))

        assert finite_diff_check(f, params) < 1e-7

    def test_tri_solve_gradient(self):
        rng = np.random.default_rng(4)
        n = 3
        n_low = n * (n - 1) // 2
        params = _flat_params(np.concatenate([
            rng.uniform(0.5, 1.5, size=n), rng.normal(size=n_low), rng.normal(size=n)
        ]))

        def f(p):
            diag = p[:n]
            low = p[n:n + n_low]
            b = p[n + n_low:]
            L = tape.build_tril(diag, low, n)
            y = tape.tri_solve_lower(L, b)
            return tape.sum_(tape.square(y))

        assert finite_diff_check(f, params) < 1e-6

    def test_posdef_ops_gradient(self):
        rng = np.random.default_rng(5)
        n = 2
        params = _flat_params(rng.normal(size=n * n + n))

        def f(p):
            a = tape.reshape(p[: n * n], (n, n))
            b = p[n * n:]
            spd = tape.matmul(a, tape.swapaxes(a, -1, -2)) + np.eye(n)
            y = tape.posdef_solve(spd, b)
            return tape.posdef_logdet(spd) + tape.sum_(tape.mul(y, b))

        assert finite_diff_check(f, params) < 1e-6

    def test_non_finite_flagged(self):
        tape.set_check_finite(True)
        try:
            with np.errstate(invalid="ignore"), pytest.raises(NumericError):
                tape.log(tape.leaf(np.array([-1.0])))
        finally:
            tape.set_check_finite(False)

    def test_backward_rejects_nonfinite_loss(self):
        with np.errstate(divide="ignore"):
            loss = tape.sum_(tape.log(tape.leaf(np.array([0.0]))))
        with pytest.raises(NumericError):
            tape.backward(loss)


class TestMLP:
    def test_zero_weights_zero_output(self):
        spec = MLPSpec(input_dim=3, hidden_layers=(4, 4), output_dim=2)
        layout, n = build_layout(spec.segment_shapes())
        params = ParamVector(np.zeros(n), layout)
        out = mlp_forward(spec, params, np.array([[0.3, -1.0, 2.0]]))
        np.testing.assert_array_equal(out, np.zeros((1, 2)))

    def test_one_unit_chain_hand_value(self):
        spec = MLPSpec(input_dim=1, hidden_layers=(1,), output_dim=1)
        layout, n = build_layout(spec.segment_shapes())
        params = ParamVector(np.zeros(n), layout)
        params.segment("W0")[:] = 1.0
        params.segment("W1")[:] = 1.0
        out = mlp_forward(spec, params, np.array([[0.5]]))
        np.testing.assert_allclose(out, [[np.tanh(0.5)]])
        assert abs(out[0, 0] - 0.46211715726000974) < 1e-12

    def test_deterministic(self):
        spec = MLPSpec(input_dim=2, hidden_layers=(8,), output_dim=3)
        params = init_mlp_params(spec, np.random.default_rng(7))
        x = np.array([[0.1, -0.7]])
        a = mlp_forward(spec, params, x)
        b = mlp_forward(spec, params, x)
        np.testing.assert_array_equal(a, b)

    def test_dimension_mismatch_raises(self):
        spec = MLPSpec(input_dim=2, hidden_layers=(4,), output_dim=1)
        params = init_mlp_params(spec, np.random.default_rng(0))
        with pytest.raises(ConfigurationError):
            mlp_forward(spec, params, np.zeros((1, 3)))

    def test_invalid_spec(self):
        with pytest.raises(ConfigurationError):
            MLPSpec(input_dim=0, hidden_layers=(4,), output_dim=1)

    def test_forward_gradient_matches_fd(self):
        spec = MLPSpec(input_dim=2, hidden_layers=(5,), output_dim=3)
        params = init_mlp_params(spec, np.random.default_rng(11))
        x = np.random.default_rng(12).normal(size=(4, 2))

        def f(p):
            if isinstance(p, tape.Node):
                out = mlp_forward(spec, params, x, root=p)
            else:
                out = mlp_forward(spec, params.with_values(np.asarray(p)), x)
            return tape.sum_(tape.square(out))

        assert finite_diff_check(f, params) < 1e-6


class TestAdam:
    def _params(self):
        return _flat_params([1.0, -2.0])

    def test_zero_gradient_no_move(self):
        p = self._params()
        state = AdamState.init(p.size)
        p2, state2 = adam_step(p, np.zeros(2), state)
        np.testing.assert_array_equal(p2.values, p.values)
        assert state2.step_count == 1

    def test_constant_gradient_descends(self):
        p = self._params()
        state = AdamState.init(p.size)
        g = np.array([0.5, -0.25])
        for _ in range(10):
            p, state = adam_step(p, g, state)
        assert p.values[0] < 1.0 and p.values[1] > -2.0

    def test_quadratic_converges(self):
        layout, _ = build_layout({"w": (1,)})
        p = ParamVector(np.array([1.0]), layout)
        hyper = AdamState.init(1).hyper.__class__(learning_rate=0.1)
        state = AdamState.init(1, hyper)
        for _ in range(200):
            p, state = adam_step(p, 2.0 * p.values, state)
        assert abs(p.values[0]) < 0.1

    def test_nonfinite_gradient_rejected(self):
        p = self._params()
        state = AdamState.init(p.size)
        with pytest.raises(NumericError):
            adam_step(p, np.array([np.nan, 0.0]), state)
        assert state.step_count == 0
        np.testing.assert_array_equal(state.first_moment, 0.0)

    def test_bitwise_determinism(self):
        def run():
            spec = MLPSpec(input_dim=2, hidden_layers=(6,), output_dim=1)
            params = init_mlp_params(spec, np.random.default_rng(123))
            state = AdamState.init(params.size)
            x = np.random.default_rng(5).normal(size=(8, 2))

            def loss(root):
                out = mlp_forward(spec, params, x, root=root)
                return tape.sum_(tape.square(out))

            for _ in range(25):
                grad = grad_of_scalar(loss, params)
                params, state = adam_step(params, grad, state)
            return params.values

        np.testing.assert_array_equal(run(), run())


class TestParamVector:
    def test_layout_must_cover(self):
        with pytest.raises(ConfigurationError):
            ParamVector(np.zeros(3), {"a": (0, (2,))})

    def test_serialization_roundtrip(self, tmp_path):
        layout, n = build_layout({"a": (2, 3), "b": (4,)})
        p = ParamVector(np.arange(float(n)), layout)
        p.save(tmp_path / "snap")
        q = ParamVector.load(tmp_path / "snap")
        np.testing.assert_array_equal(p.values, q.values)
        assert q.layout == p.layout
        assert (tmp_path / "snap.bin").read_bytes() == p.values.astype("<f8").tobytes()

    def test_rejects_nonfinite(self):
        layout, _ = build_layout({"a": (1,)})
        with pytest.raises(NumericError):
            ParamVector(np.array([np.inf]), layout)
