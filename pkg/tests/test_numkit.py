import numpy as np
import pytest

from fusecast.numkit import (
    AdamState,
    ShapeMismatch,
    adam_step,
    affine,
    as_mat,
    as_vec,
    finite_diff_grad,
    mse,
    relu,
    sgd_step,
)


class TestAffine:
    def test_zero_map(self):
        out = affine(np.zeros((2, 2)), np.array([5.0, 1.0]), np.zeros(2))
        assert np.array_equal(out, np.zeros(2))

    def test_identity_case(self):
        out = affine(np.eye(2), np.array([3.0, -4.0]), np.array([1.0, 1.0]))
        assert np.array_equal(out, np.array([4.0, -3.0]))

    def test_hand_product(self):
        # [[1,2],[3,4]] @ (1,1) + (0.5,-0.5) worked out by hand
        out = affine(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([1.0, 1.0]), np.array([0.5, -0.5]))
        assert np.allclose(out, [3.5, 6.5], rtol=0, atol=0)

    def test_shape_mismatch_names_both_shapes(self):
        with pytest.raises(ShapeMismatch, match="2x3") as exc:
            affine(np.zeros((2, 3)), np.array([1.0, 2.0]), np.zeros(2))
        assert "length 2" in str(exc.value)
        with pytest.raises(ShapeMismatch):
            affine(np.zeros((2, 2)), np.array([1.0, 2.0]), np.zeros(3))

    def test_linearity(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            w = rng.standard_normal((4, 3))
            x, y = rng.standard_normal(3), rng.standard_normal(3)
            a, b = rng.standard_normal(2)
            zero = np.zeros(4)
            lhs = affine(w, a * x + b * y, zero)
            rhs = a * affine(w, x, zero) + b * affine(w, y, zero)
            assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


class TestRelu:
    def test_zeros(self):
        assert np.array_equal(relu(np.array([0.0, 0.0])), np.array([0.0, 0.0]))

    def test_definition(self):
        assert np.array_equal(relu(np.array([-2.0, 3.0])), np.array([0.0, 3.0]))

    def test_machine_small_sign(self):
        out = relu(np.array([-1e-12, 1e-12]))
        assert out[0] == 0.0 and out[1] == 1e-12


class TestMse:
    @pytest.mark.parametrize("y,yhat,expected", [(5.0, 5.0, 0.0), (3.0, 1.0, 4.0), (-2.0, 2.0, 16.0)])
    def test_values(self, y, yhat, expected):
        assert mse(y, yhat) == expected


class TestSgd:
    def test_zero_gradient(self):
        out = sgd_step([np.array(1.0)], [np.array(0.0)], 0.1)
        assert float(out[0]) == 1.0

    def test_hand_values(self):
        assert float(sgd_step([np.array(1.0)], [np.array(2.0)], 0.1)[0]) == pytest.approx(0.8)
        assert float(sgd_step([np.array(-0.5)], [np.array(-1.0)], 0.5)[0]) == pytest.approx(0.0)

    def test_twice_equals_double_gradient(self):
        rng = np.random.default_rng(1)
        p = [rng.standard_normal((3, 2)), rng.standard_normal(4)]
        g = [rng.standard_normal((3, 2)), rng.standard_normal(4)]
        once_twice = sgd_step(sgd_step(p, g, 0.05), g, 0.05)
        doubled = sgd_step(p, [2 * x for x in g], 0.05)
        for a, b in zip(once_twice, doubled):
            assert np.allclose(a, b, rtol=1e-14, atol=1e-14)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            sgd_step([np.zeros(2)], [np.zeros(3)], 0.1)


class TestAdam:
    def test_zero_gradient_noop(self):
        p = [np.array([1.0, -2.0])]
        state = AdamState.init(p, eta=0.01)
        out, state2 = adam_step(p, [np.zeros(2)], state)
        assert np.array_equal(out[0], p[0])
        assert state2.step == 1

    def test_first_step_magnitude(self):
        # fresh state, grad 1: bias correction gives mhat=g, vhat=g^2, step ~ eta
        p = [np.array(0.0)]
        state = AdamState.init(p, eta=0.001)
        out, _ = adam_step(p, [np.array(1.0)], state)
        assert float(out[0]) == pytest.approx(-0.001, rel=1e-6)

    def test_second_identical_gradient_similar_magnitude(self):
        p = [np.array(0.0)]
        state = AdamState.init(p, eta=0.001)
        p1, state = adam_step(p, [np.array(1.0)], state)
        p2, _ = adam_step(p1, [np.array(1.0)], state)
        step1 = abs(float(p1[0]) - 0.0)
        step2 = abs(float(p2[0]) - float(p1[0]))
        assert abs(step2 - step1) <= 0.1 * step1

    def test_shape_mismatch(self):
        state = AdamState.init([np.zeros(2)])
        with pytest.raises(ShapeMismatch):
            adam_step([np.zeros(2)], [np.zeros((2, 1))], state)


class TestFiniteDiff:
    def test_quadratic(self):
        grads = finite_diff_grad(lambda ps: float(ps[0]) ** 2, [np.array(3.0)], 1e-5)
        assert abs(float(grads[0]) - 6.0) < 1e-6

    def test_constant(self):
        grads = finite_diff_grad(lambda ps: 7.5, [np.arange(4.0)], 1e-5)
        assert np.array_equal(grads[0], np.zeros(4))

    def test_relu_away_from_kink(self):
        grads = finite_diff_grad(lambda ps: float(relu(np.array([float(ps[0])]))[0]), [np.array(1.0)], 1e-5)
        assert abs(float(grads[0]) - 1.0) < 1e-6

    def test_nonfinite_objective_rejected(self):
        with pytest.raises(ValueError):
            finite_diff_grad(lambda ps: float("nan"), [np.array(1.0)], 1e-5)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            finite_diff_grad(lambda ps: 0.0, [np.array(1.0)], 0.0)


def _composite_loss(params, x, y):
    """mse(y, w2 . relu(W1 x + b1) + b2) evaluated from raw arrays."""
    w1, b1, w2, b2 = params
    h = relu(affine(w1, x, b1))
    return mse(y, float(w2 @ h) + float(b2))


def _composite_grad(params, x, y):
    """Hand chain rule for the composite above, independent of model code."""
    w1, b1, w2, b2 = params
    a = w1 @ x + b1
    h = np.maximum(a, 0.0)
    yhat = float(w2 @ h) + float(b2)
    g = 2.0 * (yhat - y)
    dh = g * w2
    da = dh * (a > 0)
    return [np.outer(da, x), da, g * h, np.array(g)]


def test_composite_gradients_match_oracle_at_random_points():
    """Analytic gradients of an affine/relu/mse composite agree with the
    central-difference oracle at 1000 random non-kink points."""
    rng = np.random.default_rng(12345)
    checked = 0
    while checked < 1000:
        w1 = rng.standard_normal((3, 2))
        b1 = rng.standard_normal(3)
        w2 = rng.standard_normal(3)
        b2 = np.array(rng.standard_normal())
        x = rng.standard_normal(2)
        y = float(rng.standard_normal())
        if np.any(np.abs(w1 @ x + b1) <= 1e-3):
            continue
        params = [w1, b1, w2, b2]
        analytic = _composite_grad(params, x, y)
        numeric = finite_diff_grad(lambda ps: _composite_loss(ps, x, y), params, 1e-6)
        for a, n in zip(analytic, numeric):
            a, n = np.asarray(a), np.asarray(n)
            assert np.all(np.abs(a - n) <= 1e-8 + 1e-5 * np.maximum(np.abs(a), np.abs(n)))
        checked += 1


def test_bitwise_determinism():
    rng = np.random.default_rng(5)
    w = rng.standard_normal((6, 6))
    x = rng.standard_normal(6)
    b = rng.standard_normal(6)
    assert np.array_equal(affine(w, x, b), affine(w, x, b))
    p = [rng.standard_normal(4)]
    g = [rng.standard_normal(4)]
    s1 = AdamState.init(p, eta=0.01)
    s2 = AdamState.init(p, eta=0.01)
    o1, _ = adam_step(p, g, s1)
    o2, _ = adam_step(p, g, s2)
    assert np.array_equal(o1[0], o2[0])


def test_vec_mat_validation():
    with pytest.raises(ShapeMismatch):
        as_vec(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        as_vec([1.0, float("inf")])
    m = as_mat([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], rows=2, cols=3)
    assert m.shape == (2, 3) and m[1, 0] == 4.0
    with pytest.raises(ShapeMismatch):
        as_mat([1.0, 2.0, 3.0], rows=2, cols=2)
