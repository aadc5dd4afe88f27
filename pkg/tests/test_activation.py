import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from imcsim.activation import (
    activation_potential,
    local_gradient_gate,
    output_local_gradient,
    quantize_uniform,
    relu,
    relu_gate,
    softmax_digital,
)


def test_activation_potential():
    assert activation_potential([0.1, 0.2]) == pytest.approx(0.3)
    assert activation_potential([0.0, 0.0, 0.0]) == 0.0


@pytest.mark.parametrize("h, a, g", [(0.4, 0.4, True), (-0.4, 0.0, False), (0.0, 0.0, False)])
def test_relu(h, a, g):
    assert relu(h) == a
    assert relu_gate(h) is g


@pytest.mark.parametrize("h, s, out", [(-0.2, 0.5, 0.0), (0.2, 0.5, 0.5), (0.0, 0.5, 0.0)])
def test_gradient_gate(h, s, out):
    assert local_gradient_gate(h, s) == out


def test_relu_vector():
    h = np.array([-1.0, 0.0, 2.0])
    assert relu(h).tolist() == [0.0, 0.0, 2.0]
    assert relu_gate(h).tolist() == [False, False, True]


@pytest.mark.parametrize("h", [[0, 0, 0], [2.5, 2.5, 2.5], [-7, -7, -7]])
def test_softmax_uniform(h):
    assert np.allclose(softmax_digital(h), 1 / 3, atol=1e-15)


def test_softmax_single_and_empty():
    assert softmax_digital([3.0]).tolist() == [1.0]
    with pytest.raises(ValueError):
        softmax_digital([])


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=6), st.floats(0.1, 20))
def test_softmax_simplex(h, gain):
    y = softmax_digital(h, gain)
    assert np.all(y >= 0) and y.sum() == pytest.approx(1.0)
    assert np.argmax(y) == np.argmax(h) or np.isclose(max(h), h[int(np.argmax(y))])


def test_softmax_quantized_levels():
    y = softmax_digital([0.1, 0.5, -0.3], gain=5.0, n_bits=6)
    step = 1 / 63
    assert np.allclose(np.round(y / step) * step, y)


def test_quantize_uniform():
    assert quantize_uniform(0.26, 2, 0.0, 1.0) == pytest.approx(1 / 3)
    assert quantize_uniform(5.0, 2, 0.0, 1.0) == pytest.approx(1.0)
    assert np.array_equal(quantize_uniform(np.array([0.3]), 0, 0, 1), [0.3])


@pytest.mark.parametrize("act", ["linear", "softmax"])
def test_local_gradient_zero_when_converged(act):
    y = np.array([0.2, 0.8])
    assert np.all(output_local_gradient(y, y, act) == 0)


def test_local_gradient_examples():
    t, y = [1, 0], [0.6, 0.4]
    assert np.allclose(output_local_gradient(t, y, "linear"), [0.4, -0.4])
    assert np.allclose(output_local_gradient(t, y, "softmax"), [0.4 * 0.24, -0.4 * 0.24])
    with pytest.raises(ValueError):
        output_local_gradient([1, 0], [1.0], "linear")
    with pytest.raises(ValueError):
        output_local_gradient(t, y, "tanh")


def test_softmax_diag_is_loss_gradient_through_diagonal(rng):
    # finite-difference check: E = 1/2 sum (t - y)^2 where each y_l is held a function of its own z_l only
    t = np.array([0.0, 1.0, 0.0])
    z = rng.normal(size=3)
    y = softmax_digital(z)
    d = output_local_gradient(t, y, "softmax")
    for l in range(3):
        def E(zl):
            yl = y[l] * np.exp(zl - z[l]) / (1 - y[l] + y[l] * np.exp(zl - z[l]))
            return 0.5 * (t[l] - yl) ** 2
        h = 1e-6
        fd = (E(z[l] + h) - E(z[l] - h)) / (2 * h)
        assert -fd == pytest.approx(d[l], rel=1e-5, abs=1e-10)
