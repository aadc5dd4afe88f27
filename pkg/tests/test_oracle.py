import numpy as np
import pytest

from imcsim.oracle import OracleMLP, finite_difference, oracle_mlp


def rand_weights(rng, net):
    extra = int(net.bias)
    return [rng.uniform(-0.5, 0.5, (net.layer_sizes[k + 1], net.layer_sizes[k] + extra))
            for k in range(len(net.layer_sizes) - 1)]


@pytest.mark.parametrize("act, bias, gain", [("linear", False, 1.0), ("softmax", False, 1.0),
                                             ("softmax", True, 14.0), ("linear", True, 1.0)])
def test_gradient_matches_finite_difference(act, bias, gain):
    rng = np.random.default_rng(0)
    net = OracleMLP((3, 4, 2), act, bias, 1.0, gain)
    for _ in range(5):
        ws = rand_weights(rng, net)
        x = rng.uniform(0, 1, 3)
        t = np.eye(2)[rng.integers(2)]
        _, grads = net.gradients(ws, x, t)
        fd = finite_difference(lambda w: net.loss(w, x, t), ws, 1e-5)
        for g, f in zip(grads, fd):
            assert np.allclose(g, f, rtol=1e-6, atol=1e-9)


def test_zero_weights_uniform():
    net = OracleMLP((4, 5, 3))
    ws = [np.zeros((5, 4)), np.zeros((3, 5))]
    assert np.allclose(net.forward(ws, np.ones(4)), 1 / 3)


def test_dimension_errors():
    net = OracleMLP((4, 5, 3))
    with pytest.raises(ValueError):
        net.forward([np.zeros((5, 4))], np.ones(4))
    with pytest.raises(ValueError):
        net.forward([np.zeros((5, 3)), np.zeros((3, 5))], np.ones(4))
    with pytest.raises(ValueError):
        net.forward([np.zeros((5, 4)), np.zeros((3, 5))], np.ones(3))
    with pytest.raises(ValueError):
        net.deltas([np.zeros((5, 4)), np.zeros((3, 5))], np.ones(4), np.ones(3), mode="nope")


def test_hardware_mode_is_diagonal():
    net = OracleMLP((2, 2), "softmax")
    ws = [np.array([[0.3, -0.2], [0.1, 0.4]])]
    y, _, ds = net.deltas(ws, np.array([0.5, 0.5]), np.array([1.0, 0.0]), mode="hardware")
    assert np.allclose(ds[0], (np.array([1.0, 0.0]) - y) * y * (1 - y))


def test_functional_wrapper():
    ws = [np.eye(2)]
    y, g = oracle_mlp((2, 2), ws, [0.2, 0.3], output_activation="linear")
    assert np.allclose(y, [0.2, 0.3]) and g is None
    y, g = oracle_mlp((2, 2), ws, [0.2, 0.3], [0.2, 0.3], output_activation="linear")
    assert np.all(g[0] == 0)
