import numpy as np
import pytest

from claimgan.nets import (
    CheckpointError,
    Layer,
    NeuralNet,
    PROB_EPS,
    backward,
    checkpoint_load,
    checkpoint_save,
    forward,
    grad_check,
    make_optimizer,
    net_init,
    numeric_gradients,
    optimizer_step,
    zero_grads,
)


def single_layer(w, b, act):
    return NeuralNet([Layer(np.array(w, dtype=float), np.array(b, dtype=float), act)])


class TestInit:
    def test_deterministic_given_seed(self):
        a = net_init([2, 4, 1], ["tanh", "sigmoid"], 7)
        b = net_init([2, 4, 1], ["tanh", "sigmoid"], 7)
        for la, lb in zip(a.layers, b.layers):
            assert np.array_equal(la.weight, lb.weight)
            assert np.array_equal(la.bias, lb.bias)

    def test_biases_are_zero(self):
        net = net_init([3, 3], ["identity"], 0)
        assert net.layers[0].bias.shape == (3,)
        assert np.all(net.layers[0].bias == 0.0)

    def test_weight_std_scales_with_fan_in(self):
        # pool weights over many draws; normalized std should be close to 1
        pooled = []
        for seed in range(200):
            net = net_init([2, 8, 1], ["tanh", "sigmoid"], seed)
            for layer in net.layers:
                fan_in = layer.weight.shape[1]
                pooled.append((layer.weight * np.sqrt(fan_in)).ravel())
        std = np.concatenate(pooled).std()
        assert abs(std - 1.0) < 0.25

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            net_init([2, 4, 1], ["tanh"], 0)
        with pytest.raises(ValueError):
            net_init([2, 0, 1], ["tanh", "sigmoid"], 0)
        with pytest.raises(ValueError):
            net_init([4], [], 0)

    def test_unknown_activation_rejected(self):
        with pytest.raises(ValueError):
            net_init([2, 1], ["softplus"], 0)


class TestForward:
    def test_zero_params_sigmoid_gives_half(self):
        net = single_layer([[0.0, 0.0]], [0.0], "sigmoid")
        out, _ = forward(net, np.array([[1.0, -3.0], [0.5, 2.0]]))
        assert np.all(out == 0.5)

    def test_identity_layer_is_identity(self):
        net = single_layer(np.eye(3), np.zeros(3), "identity")
        x = np.arange(6, dtype=float).reshape(2, 3)
        out, _ = forward(net, x)
        assert np.array_equal(out, x)

    def test_scalar_logistic_value(self):
        net = single_layer([[2.0]], [1.0], "sigmoid")
        out, _ = forward(net, np.array([[0.5]]))
        # logistic(2) computed independently
        assert out[0, 0] == pytest.approx(0.8807970779778823, abs=1e-12)

    def test_rejects_bad_width_and_nonfinite(self):
        net = net_init([3, 1], ["sigmoid"], 0)
        with pytest.raises(ValueError):
            forward(net, np.zeros((2, 4)))
        with pytest.raises(ValueError):
            forward(net, np.array([[1.0, np.nan, 0.0]]))

    def test_sigmoid_outputs_clamped(self):
        net = single_layer([[1000.0]], [0.0], "sigmoid")
        out, _ = forward(net, np.array([[1.0], [-1.0]]))
        assert out[0, 0] <= 1.0 - PROB_EPS
        assert out[1, 0] >= PROB_EPS

    def test_forward_is_deterministic(self):
        net = net_init([4, 8, 2], ["relu", "identity"], 3)
        x = np.random.default_rng(0).standard_normal((5, 4))
        a, _ = forward(net, x)
        b, _ = forward(net, x)
        assert np.array_equal(a, b)


class TestBackward:
    def test_zero_output_grad_gives_zero_param_grads(self):
        net = net_init([3, 5, 2], ["tanh", "identity"], 1)
        x = np.random.default_rng(2).standard_normal((4, 3))
        out, cache = forward(net, x)
        grads, input_grad = backward(net, cache, np.zeros_like(out))
        for gw, gb in grads:
            assert np.all(gw == 0) and np.all(gb == 0)
        assert np.all(input_grad == 0)

    def test_single_linear_layer_matches_closed_form(self):
        # squared error on one point: dL/dw = 2*(yhat - y)*x
        net = single_layer([[0.7, -0.2]], [0.1], "identity")
        x = np.array([[1.5, -2.0]])
        y = 0.3
        out, cache = forward(net, x)
        resid = out[0, 0] - y
        grads, _ = backward(net, cache, np.array([[2.0 * resid]]))
        assert np.allclose(grads[0][0], 2.0 * resid * x)
        assert grads[0][1][0] == pytest.approx(2.0 * resid)

    def test_shape_mismatch_rejected(self):
        net = net_init([2, 1], ["identity"], 0)
        _, cache = forward(net, np.zeros((3, 2)))
        with pytest.raises(ValueError):
            backward(net, cache, np.zeros((2, 1)))


class TestGradCheck:
    @staticmethod
    def quadratic_loss(target):
        def loss(out):
            d = out - target
            return float((d * d).sum()), 2.0 * d

        return loss

    def test_linear_net_quadratic_loss_near_exact(self):
        net = net_init([3, 2], ["identity"], 5)
        x = np.random.default_rng(6).standard_normal((4, 3))
        err = grad_check(net, self.quadratic_loss(0.5), x)
        assert err <= 1e-7

    def test_logistic_net_bce_loss(self):
        net = net_init([4, 8, 1], ["tanh", "sigmoid"], 9)
        x = np.random.default_rng(10).standard_normal((6, 4))
        y = np.random.default_rng(11).integers(0, 2, (6, 1)).astype(float)

        def bce(out):
            v = float(-(y * np.log(out) + (1 - y) * np.log(1 - out)).mean())
            g = (out - y) / (out * (1 - out) * out.shape[0])
            return v, g

        assert grad_check(net, bce, x) <= 1e-4

    def test_constant_loss_zero_error(self):
        net = single_layer([[0.0, 0.0]], [0.0], "identity")
        err = grad_check(net, lambda out: (1.0, np.zeros_like(out)), np.zeros((2, 2)))
        assert err <= 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_random_nets_pass(self, seed):
        rng = np.random.default_rng(seed)
        net = net_init([3, 6, 6, 1], ["relu", "tanh", "sigmoid"], seed)
        x = rng.standard_normal((4, 3))

        def loss(out):
            return float(np.log(out).mean()), 1.0 / (out * out.shape[0])

        assert grad_check(net, loss, x) <= 1e-4

    def test_rejects_nonpositive_eps(self):
        net = net_init([2, 1], ["identity"], 0)
        with pytest.raises(ValueError):
            grad_check(net, lambda o: (0.0, np.zeros_like(o)), np.zeros((1, 2)), eps=0)


class TestOptimizer:
    def test_zero_grads_leave_params(self):
        net = net_init([2, 3, 1], ["tanh", "sigmoid"], 0)
        before = [l.weight.copy() for l in net.layers]
        optimizer_step(net, zero_grads(net), make_optimizer(net, "sgd", 0.1), "descend")
        for b, l in zip(before, net.layers):
            assert np.array_equal(b, l.weight)

    def test_sgd_descend_arithmetic(self):
        net = single_layer([[1.0]], [0.0], "identity")
        grads = [(np.array([[0.5]]), np.array([0.0]))]
        optimizer_step(net, grads, make_optimizer(net, "sgd", 0.1), "descend")
        assert net.layers[0].weight[0, 0] == pytest.approx(0.95)

    def test_sgd_ascend_then_descend_restores(self):
        net = net_init([3, 4, 1], ["relu", "sigmoid"], 2)
        before = [(l.weight.copy(), l.bias.copy()) for l in net.layers]
        grads = [
            (np.random.default_rng(3).standard_normal(l.weight.shape), np.ones_like(l.bias))
            for l in net.layers
        ]
        state = make_optimizer(net, "sgd", 0.05)
        optimizer_step(net, grads, state, "ascend")
        optimizer_step(net, grads, state, "descend")
        for (w, b), l in zip(before, net.layers):
            assert np.allclose(w, l.weight) and np.allclose(b, l.bias)
        assert state.step == 2

    def test_nonfinite_grads_rejected_state_unchanged(self):
        net = single_layer([[1.0]], [0.0], "identity")
        state = make_optimizer(net, "adam", 0.1)
        bad = [(np.array([[np.inf]]), np.array([0.0]))]
        with pytest.raises(ValueError):
            optimizer_step(net, bad, state, "descend")
        assert state.step == 0
        assert net.layers[0].weight[0, 0] == 1.0

    def test_adam_moves_against_gradient(self):
        net = single_layer([[1.0]], [0.0], "identity")
        grads = [(np.array([[0.5]]), np.array([0.0]))]
        optimizer_step(net, grads, make_optimizer(net, "adam", 0.01), "descend")
        assert net.layers[0].weight[0, 0] < 1.0

    def test_params_stay_finite_under_updates(self):
        net = net_init([2, 4, 1], ["relu", "sigmoid"], 4)
        state = make_optimizer(net, "adam", 0.1)
        rng = np.random.default_rng(5)
        for _ in range(50):
            grads = [
                (rng.standard_normal(l.weight.shape), rng.standard_normal(l.bias.shape))
                for l in net.layers
            ]
            optimizer_step(net, grads, state, "descend")
        for l in net.layers:
            assert np.all(np.isfinite(l.weight)) and np.all(np.isfinite(l.bias))


class TestCheckpoint:
    def test_round_trip_identity(self, tmp_path):
        nets = {
            "Gp": net_init([2, 4, 3], ["tanh", "identity"], 1),
            "Dy": net_init([3, 4, 1], ["relu", "sigmoid"], 2),
        }
        path = tmp_path / "ckpt.json"
        checkpoint_save(nets, path)
        loaded = checkpoint_load(path)
        x = np.random.default_rng(0).standard_normal((5, 3))
        a, _ = forward(nets["Dy"], x)
        b, _ = forward(loaded["Dy"], x)
        assert np.array_equal(a, b)
        for name in nets:
            for la, lb in zip(nets[name].layers, loaded[name].layers):
                assert np.array_equal(la.weight, lb.weight)
                assert np.array_equal(la.bias, lb.bias)

    def test_truncated_file_rejected(self, tmp_path):
        nets = {"Gp": net_init([2, 3], ["identity"], 0)}
        path = tmp_path / "ckpt.json"
        checkpoint_save(nets, path)
        text = path.read_text()
        path.write_text(text[: len(text) // 2])
        with pytest.raises(CheckpointError):
            checkpoint_load(path)

    def test_version_mismatch_rejected(self, tmp_path):
        path = tmp_path / "ckpt.json"
        path.write_text('{"version": 99, "nets": {}}')
        with pytest.raises(CheckpointError):
            checkpoint_load(path)

    def test_six_net_names_preserved(self, tmp_path):
        names = ["Gp", "Gn", "Gy", "Dp", "Dn", "Dy"]
        nets = {n: net_init([2, 2, 1], ["tanh", "sigmoid"], i) for i, n in enumerate(names)}
        path = tmp_path / "six.json"
        checkpoint_save(nets, path)
        assert set(checkpoint_load(path)) == set(names)


def test_numeric_gradients_matches_simple_analytic():
    net = single_layer([[2.0]], [1.0], "identity")
    # f(w, b) = (w*3 + b)^2 -> df/dw = 6*(3w+b), df/db = 2*(3w+b)
    value = lambda: float((net.layers[0].weight[0, 0] * 3 + net.layers[0].bias[0]) ** 2)
    grads = numeric_gradients(net, value)
    assert grads[0][0][0, 0] == pytest.approx(6 * 7.0, rel=1e-6)
    assert grads[0][1][0] == pytest.approx(2 * 7.0, rel=1e-6)
