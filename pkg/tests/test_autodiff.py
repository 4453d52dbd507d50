"""Tape semantics, finite-difference gradient checks, Adam, checkpoints."""

import numpy as np
import pytest

import eitventlab.ndtensor as nt


class TestBackwardBasics:
    def test_grad_of_sum_is_ones(self, rng):
        x = nt.Tensor(rng.normal(size=(2, 2)), requires_grad=True)
        nt.backward(nt.sum_all(x))
        assert np.allclose(x.grad, 1.0)

    def test_grad_of_half_square_sum_is_x(self, rng):
        xv = rng.normal(size=(3, 3))
        x = nt.Tensor(xv, requires_grad=True)
        nt.backward(nt.scale(nt.sum_all(nt.mul(x, x)), 0.5))
        assert np.allclose(x.grad, xv)

    def test_backward_requires_scalar(self, rng):
        x = nt.Tensor(rng.normal(size=(2, 2)), requires_grad=True)
        with pytest.raises(nt.NotScalar):
            nt.backward(nt.mul(x, x))

    def test_double_backward_raises(self, rng):
        x = nt.Tensor(rng.normal(size=3), requires_grad=True)
        loss = nt.sum_all(x)
        nt.backward(loss)
        with pytest.raises(nt.GraphConsumed):
            nt.backward(loss)

    def test_shared_subexpression_accumulates(self, rng):
        xv = rng.normal(size=4)
        x = nt.Tensor(xv, requires_grad=True)
        y = nt.add(nt.mul(x, x), nt.mul(x, x))
        nt.backward(nt.sum_all(y))
        assert np.allclose(x.grad, 4 * xv)

    def test_no_grad_blocks_tape(self, rng):
        x = nt.Tensor(rng.normal(size=3), requires_grad=True)
        with nt.no_grad():
            loss = nt.sum_all(x)
        assert not loss.requires_grad


class TestCompositeGradients:
    def test_toy_vae_style_loss_matches_central_differences(self, rng):
        # four-parameter toy net: dense encode to (mu, logvar), reparam with
        # fixed noise, dense decode, MSE + small KL
        x = nt.Tensor(rng.normal(size=(2, 3)))
        eps = nt.Tensor(rng.normal(size=(2, 2)))
        params = {
            "w_enc": nt.Tensor(rng.normal(size=(3, 4)) * 0.5, requires_grad=True),
            "b_enc": nt.Tensor(rng.normal(size=4) * 0.1, requires_grad=True),
            "w_dec": nt.Tensor(rng.normal(size=(2, 3)) * 0.5, requires_grad=True),
            "b_dec": nt.Tensor(rng.normal(size=3) * 0.1, requires_grad=True),
        }

        def loss_fn():
            h = nt.dense(x, params["w_enc"], params["b_enc"])
            mu = nt.reshape(h, (2, 4))
            mu_part = nt.Tensor(np.eye(4)[:, :2])
            lv_part = nt.Tensor(np.eye(4)[:, 2:])
            mu2 = nt.matmul(mu, mu_part)
            lv = nt.matmul(mu, lv_part)
            z = nt.add(mu2, nt.mul(eps, nt.exp(nt.scale(lv, 0.5))))
            xhat = nt.sigmoid(nt.dense(z, params["w_dec"], params["b_dec"]))
            mse = nt.mean_all(nt.mul(nt.sub(x, xhat), nt.sub(x, xhat)))
            kl = nt.scale(
                nt.sum_all(
                    nt.add_scalar(
                        nt.sub(nt.add(nt.mul(mu2, mu2), nt.exp(lv)), lv), -1.0
                    )
                ),
                0.25,
            )
            return nt.add(mse, nt.scale(kl, 1e-3))

        report = nt.grad_check(loss_fn, params, h=1e-5)
        assert report.max_error < 1e-6

    def test_grad_check_on_linear_net(self, rng):
        x = nt.Tensor(rng.normal(size=(4, 3)))
        params = {
            "w": nt.Tensor(rng.normal(size=(3, 2)), requires_grad=True),
            "b": nt.Tensor(rng.normal(size=2), requires_grad=True),
        }

        def loss_fn():
            return nt.sum_all(nt.dense(x, params["w"], params["b"]))

        report = nt.grad_check(loss_fn, params)
        assert report.max_error < 1e-9

    def test_grad_check_detects_corrupted_gradient(self, rng, monkeypatch):
        x = nt.Tensor(rng.normal(size=(4, 3)))
        params = {"w": nt.Tensor(rng.normal(size=(3, 2)), requires_grad=True)}

        def loss_fn():
            return nt.sum_all(nt.matmul(x, params["w"]))

        report = nt.grad_check(loss_fn, params)
        assert report.max_error < 1e-9

        # inject a unit fault into the analytic gradient and re-check
        orig_backward = nt.backward

        def corrupted(loss):
            orig_backward(loss)
            params["w"].grad.reshape(-1)[0] += 1.0

        monkeypatch.setattr("eitventlab.ndtensor.gradcheck.backward", corrupted)
        report = nt.grad_check(loss_fn, params)
        assert report.max_error > 1e-2

    @pytest.mark.parametrize(
        "op", ["conv", "convT", "dense", "relu", "sigmoid", "softmax", "pool"]
    )
    def test_every_layer_kind_matches_central_differences(self, rng, op):
        if op in ("conv", "convT"):
            x = nt.Tensor(rng.normal(size=(2, 2, 4, 4, 4)))
            params = {
                "k": nt.Tensor(rng.normal(size=(2, 2, 3, 3, 3)) * 0.4, requires_grad=True)
            }
            fwd = nt.conv3d if op == "conv" else nt.conv_transpose3d

            def loss_fn():
                y = fwd(x, params["k"], 1, 1)
                return nt.mean_all(nt.mul(y, y))

        elif op == "pool":
            x = nt.Tensor(rng.normal(size=(2, 2, 6, 6)))
            params = {"w": nt.Tensor(rng.normal(size=(2, 3)), requires_grad=True)}

            def loss_fn():
                p = nt.global_avg_pool2d(nt.maxpool2d(x))
                return nt.mean_all(nt.mul(nt.matmul(p, params["w"]), nt.matmul(p, params["w"])))

        else:
            x = nt.Tensor(rng.normal(size=(3, 4)))
            params = {
                "w": nt.Tensor(rng.normal(size=(4, 4)) * 0.5, requires_grad=True),
                "b": nt.Tensor(rng.normal(size=4) * 0.1, requires_grad=True),
            }
            act = {"dense": None, "relu": nt.relu, "sigmoid": nt.sigmoid, "softmax": nt.softmax_rows}[op]

            def loss_fn():
                y = nt.dense(x, params["w"], params["b"])
                if act is not None:
                    y = act(y)
                return nt.mean_all(nt.mul(y, y))

        report = nt.grad_check(loss_fn, params, h=1e-5)
        assert report.max_error < 1e-6, report.block_errors

    def test_cross_entropy_gradient(self, rng):
        x = nt.Tensor(rng.normal(size=(5, 3)))
        labels = np.array([0, 2, 1, 1, 0])
        params = {"w": nt.Tensor(rng.normal(size=(3, 3)) * 0.5, requires_grad=True)}

        def loss_fn():
            return nt.cross_entropy_logits(nt.matmul(x, params["w"]), labels)

        assert nt.grad_check(loss_fn, params).max_error < 1e-6


class TestAdam:
    def test_zero_gradient_leaves_params(self):
        p = nt.Tensor(np.array([1.0, -2.0]), requires_grad=True)
        state = nt.AdamState(lr=0.1)
        nt.adam_step({"p": p}, {"p": np.zeros(2)}, state)
        assert np.allclose(p.data, [1.0, -2.0])

    def test_constant_gradient_moves_against_sign(self):
        p = nt.Tensor(np.array([0.0, 0.0]), requires_grad=True)
        state = nt.AdamState(lr=0.01)
        g = np.array([1.0, -3.0])
        for _ in range(50):
            nt.adam_step({"p": p}, {"p": g}, state)
        assert p.data[0] < 0 < p.data[1]

    def test_first_step_matches_closed_form(self):
        # g=1, lr=0.1, step 1: m_hat=1, v_hat=1, update = -0.1/(1+1e-8)
        p = nt.Tensor(np.array([1.0]), requires_grad=True)
        state = nt.AdamState(lr=0.1)
        nt.adam_step({"p": p}, {"p": np.array([1.0])}, state)
        expected = 1.0 - 0.1 * (1.0 / (1.0 + 1e-8))
        assert abs(p.data[0] - expected) < 1e-15
        assert state.step == 1

    def test_shape_mismatch(self):
        p = nt.Tensor(np.zeros(2), requires_grad=True)
        with pytest.raises(nt.ShapeMismatch):
            nt.adam_step({"p": p}, {"p": np.zeros(3)}, nt.AdamState())

    def test_bit_identical_under_same_seed(self):
        def run():
            r = np.random.default_rng(7)
            p = nt.Tensor(r.normal(size=8), requires_grad=True)
            state = nt.AdamState(lr=1e-3)
            for _ in range(25):
                g = r.normal(size=8)
                nt.adam_step({"p": p}, {"p": g}, state)
            return p.data.copy()

        a, b = run(), run()
        assert a.tobytes() == b.tobytes()


class TestCheckpoint:
    def test_round_trip_bit_exact(self, rng, tmp_path):
        arrays = {
            "enc.w": rng.normal(size=(4, 3, 2)),
            "enc.b": rng.normal(size=7),
            "scalar": np.array(3.5),
        }
        prefix = tmp_path / "ckpt"
        nt.save_checkpoint(prefix, arrays)
        loaded = nt.load_checkpoint(prefix)
        assert set(loaded) == set(arrays)
        for name in arrays:
            assert loaded[name].shape == np.asarray(arrays[name]).shape
            assert loaded[name].tobytes() == np.asarray(arrays[name], dtype="<f8").tobytes()
