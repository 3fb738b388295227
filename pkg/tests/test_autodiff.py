import math

import numpy as np
import pytest

from noisylab import autodiff as ad
from noisylab.errors import (
    DegenerateInputError,
    DeterminismError,
    NonFiniteError,
    ShapeError,
)
from noisylab.gradcheck import central_difference, grad_check

from helpers import tape_loss


class TestMatmul:
    def test_identity(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        out = ad.matmul(ad.Tensor(np.eye(2)), ad.Tensor(a))
        np.testing.assert_array_equal(out.data, a)

    def test_dot_product(self):
        out = ad.matmul(ad.Tensor([[1.0, 2.0]]), ad.Tensor([[3.0], [4.0]]))
        assert out.data.shape == (1, 1)
        assert out.item() == 11.0

    def test_zero_annihilates(self, rng):
        b = rng.normal(size=(3, 5))
        out = ad.matmul(ad.Tensor(np.zeros((4, 3))), ad.Tensor(b))
        np.testing.assert_array_equal(out.data, np.zeros((4, 5)))

    def test_shape_mismatch_names_both_shapes(self):
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(2, 3\)"):
            ad.matmul(ad.Tensor(np.ones((2, 3))), ad.Tensor(np.ones((2, 3))))


class TestSoftmaxRows:
    def test_uniform_on_equal_logits(self):
        out = ad.softmax_rows(ad.Tensor([[0.0, 0.0, 0.0]]))
        np.testing.assert_allclose(out.data, [[1 / 3, 1 / 3, 1 / 3]], atol=1e-15)

    def test_ln2_case(self):
        out = ad.softmax_rows(ad.Tensor([[math.log(2.0), 0.0]]))
        np.testing.assert_allclose(out.data, [[2 / 3, 1 / 3]], atol=1e-15)

    def test_large_logits_no_overflow(self):
        out = ad.softmax_rows(ad.Tensor([[1000.0, 0.0]]))
        assert np.all(np.isfinite(out.data))
        np.testing.assert_allclose(out.data, [[1.0, 0.0]], atol=1e-12)

    def test_rows_sum_to_one_and_positive(self, rng):
        z = rng.normal(scale=3.0, size=(20, 7))
        p = ad.softmax_rows(ad.Tensor(z)).data
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(p > 0.0)

    def test_shift_invariance(self, rng):
        z = rng.normal(size=(6, 5))
        shift = rng.normal(size=(6, 1)) * 10
        p1 = ad.softmax_rows(ad.Tensor(z)).data
        p2 = ad.softmax_rows(ad.Tensor(z + shift)).data
        np.testing.assert_allclose(p1, p2, atol=1e-12)


class TestCosineSim:
    def test_self_similarity(self, rng):
        u = rng.uniform(0.1, 1.0, size=4)
        assert ad.cosine_sim(u, u) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert ad.cosine_sim([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_hand_value(self):
        assert ad.cosine_sim([0.6, 0.8], [1.0, 0.0]) == pytest.approx(0.6, abs=1e-15)

    def test_zero_norm_rejected(self):
        with pytest.raises(DegenerateInputError):
            ad.cosine_sim([0.0, 0.0], [1.0, 0.0])

    def test_symmetry_and_scale_invariance(self, rng):
        for _ in range(20):
            u = rng.uniform(0.01, 1.0, size=6)
            v = rng.uniform(0.01, 1.0, size=6)
            a, b = rng.uniform(0.1, 10.0, size=2)
            s = ad.cosine_sim(u, v)
            assert ad.cosine_sim(v, u) == pytest.approx(s, abs=1e-12)
            assert ad.cosine_sim(a * u, b * v) == pytest.approx(s, abs=1e-12)
            assert 0.0 <= s <= 1.0 + 1e-12


class TestTapeMechanics:
    def test_constants_record_nothing(self):
        tape = ad.GradTape()
        out = ad.mul(ad.Tensor([[2.0]]), ad.Tensor([[3.0]]))
        assert out.tape is None
        assert len(tape) == 0

    def test_mixed_tapes_rejected(self):
        a = ad.Tensor([[1.0]], ad.GradTape())
        b = ad.Tensor([[1.0]], ad.GradTape())
        with pytest.raises(ValueError, match="different tapes"):
            ad.add(a, b)

    def test_backward_requires_scalar(self):
        tape = ad.GradTape()
        a = ad.Tensor(np.ones((2, 2)), tape)
        out = ad.add(a, a)
        with pytest.raises(ShapeError):
            tape.backward(out)

    def test_nonfinite_rejected(self):
        with pytest.raises(NonFiniteError):
            ad.Tensor([[np.nan, 1.0]])

    def test_unused_branch_gets_no_gradient(self):
        tape = ad.GradTape()
        a = ad.Tensor([[2.0]], tape)
        dead = ad.mul(a, a)  # recorded but not part of the loss
        loss = ad.sum_all(a)
        tape.backward(loss)
        assert dead.grad is None
        np.testing.assert_array_equal(a.grad, [[1.0]])

    def test_gradient_accumulates_over_reuse(self):
        tape = ad.GradTape()
        a = ad.Tensor([[3.0]], tape)
        loss = ad.sum_all(ad.add(ad.mul(a, a), a))  # a^2 + a -> 2a + 1
        tape.backward(loss)
        np.testing.assert_allclose(a.grad, [[7.0]])


# Each differentiable primitive is exercised through a scalar loss and
# compared against central differences (random instances <= 8x8, eps=1e-5).
def _op_losses(rng):
    r84 = rng.normal(size=(8, 4))
    r48 = rng.normal(size=(4, 8))
    r81 = rng.normal(size=(8, 1))
    r14 = rng.normal(size=(1, 4))
    r88 = rng.normal(size=(8, 8))
    pos = rng.uniform(0.2, 2.0, size=(8, 4))
    return {
        "matmul": lambda p: ad.sum_all(ad.mul(ad.matmul(p, ad.Tensor(r48)), ad.Tensor(r88))),
        "transpose": lambda p: ad.sum_all(ad.mul(ad.transpose(p), ad.Tensor(r48))),
        "add_broadcast_row": lambda p: ad.sum_all(ad.mul(ad.add(p, ad.Tensor(r14)), ad.Tensor(r84))),
        "sub": lambda p: ad.sum_all(ad.mul(ad.sub(ad.Tensor(r84), p), ad.Tensor(r84))),
        "mul_broadcast_col": lambda p: ad.sum_all(ad.mul(ad.mul(p, ad.Tensor(r81)), ad.Tensor(r84))),
        "div": lambda p: ad.sum_all(ad.div(p, ad.Tensor(pos))),
        "div_by_param": lambda p: ad.sum_all(ad.div(ad.Tensor(r84), ad.add(ad.mul(p, p), 1.0))),
        "neg": lambda p: ad.sum_all(ad.neg(ad.mul(p, p))),
        "relu": lambda p: ad.sum_all(ad.mul(ad.relu(p), ad.Tensor(r84))),
        "softmax": lambda p: ad.sum_all(ad.mul(ad.softmax_rows(p), ad.Tensor(r84))),
        "log": lambda p: ad.sum_all(ad.log_clamped(ad.add(ad.mul(p, p), 0.5))),
        "exp": lambda p: ad.sum_all(ad.mul(ad.exp(p), ad.Tensor(r84))),
        "sqrt": lambda p: ad.sum_all(ad.sqrt(ad.add(ad.mul(p, p), 0.3))),
        "row_sum": lambda p: ad.sum_all(ad.mul(ad.row_sum(ad.mul(p, p)), ad.Tensor(r81))),
        "col_sum": lambda p: ad.sum_all(ad.mul(ad.col_sum(ad.mul(p, p)), ad.Tensor(r14))),
        "diag_part": lambda p: ad.sum_all(ad.diag_part(ad.matmul(p, ad.transpose(p)))),
    }


@pytest.mark.parametrize("name", sorted(_op_losses(np.random.default_rng(0))))
def test_primitive_gradients_match_central_differences(name):
    rng = np.random.default_rng(7)
    builders = _op_losses(rng)
    params = rng.normal(size=(8, 4)) + 0.05  # nudge off relu kinks
    err = grad_check(tape_loss(builders[name]), params, epsilon=1e-5)
    assert err < 1e-6, f"{name}: rel error {err:.3e}"


class TestGradCheckOracle:
    def test_quadratic(self, rng):
        p = rng.normal(size=(3, 3))
        err = grad_check(
            tape_loss(lambda t: ad.mul(ad.sum_all(ad.mul(t, t)), 0.5)), p
        )
        assert err < 1e-8

    def test_kl_of_softmax_against_fixed_target(self, rng):
        target = np.array([[0.2, 0.5, 0.3], [0.6, 0.1, 0.3]])
        logt = np.log(target)

        def build(t):
            p = ad.softmax_rows(t)
            return ad.sum_all(ad.mul(p, ad.sub(ad.log_clamped(p, ceil=1.0), ad.Tensor(logt))))

        err = grad_check(tape_loss(build), rng.normal(size=(2, 3)), epsilon=1e-5)
        assert err < 1e-6

    def test_constant_loss_is_exact(self):
        def loss_fn(p):
            return 4.25, np.zeros_like(p)

        assert grad_check(loss_fn, np.ones((2, 2))) == 0.0

    def test_nondeterministic_loss_rejected(self):
        calls = []

        def loss_fn(p):
            calls.append(1)
            return float(len(calls)), np.zeros_like(p)

        with pytest.raises(DeterminismError):
            grad_check(loss_fn, np.ones((2, 1)))

    def test_bad_epsilon_rejected(self):
        with pytest.raises(ValueError):
            grad_check(lambda p: (0.0, np.zeros_like(p)), np.ones((1, 1)), epsilon=0.0)

    def test_central_difference_linear_is_exact(self):
        w = np.array([[2.0, -3.0], [0.5, 1.0]])
        num = central_difference(lambda p: float((w * p).sum()), np.zeros((2, 2)))
        np.testing.assert_allclose(num, w, atol=1e-9)
