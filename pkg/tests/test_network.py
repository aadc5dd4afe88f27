import numpy as np
import pytest

from imcsim.config import SimConfig
from imcsim.ledger import Phase
from imcsim.network import NetworkTopology, PhaseError, State, build_network, evaluate, train
from imcsim.oracle import OracleMLP


def set_weights(net, weights):
    for layer, w in zip(net.layers, weights):
        layer.wu.sample_weight(w, net.t)


def oracle_for(net):
    return OracleMLP(net.topo.layer_sizes, net.topo.output_activation, net.topo.bias,
                     net.cfg.V_PRE, net.cfg.logit_gain)


@pytest.mark.parametrize("bias", [False, True])
def test_bank_map(bias):
    topo = NetworkTopology((4, 5, 3), bias=bias)
    extra = int(bias)
    assert topo.bank_map() == [(5, 4 + extra), (3, 5 + extra)]
    net = build_network(SimConfig(bias=bias), topo)
    assert [layer.bca.shape for layer in net.layers] == topo.bank_map()


def test_trivial_topology(cfg):
    net = build_network(cfg.replace(bias=False), NetworkTopology((1, 1)))
    assert net.layers[0].bca.shape == (1, 1)


@pytest.mark.parametrize("sizes", [(4,), (4, 0, 3)])
def test_bad_topology(sizes):
    with pytest.raises(ValueError):
        NetworkTopology(sizes)


def test_write_codes_shape_mismatch(cfg):
    net = build_network(cfg)
    with pytest.raises(ValueError, match="code grid"):
        net.write_codes([np.zeros((4, 5), int), np.zeros((3, 6), int)])


def test_zero_weights_uniform_output(cfg):
    net = build_network(cfg)
    net.write_codes([np.zeros(s, int) for s in net.topo.bank_map()])
    assert np.allclose(net.forward_pass([0.3, 0.9, 0.1, 0.5]), 1 / 3)


def test_input_length(cfg):
    net = build_network(cfg, rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        net.forward_pass([0.1, 0.2])


@pytest.mark.parametrize("bias", [False, True])
def test_ideal_forward_matches_oracle(bias):
    cfg = SimConfig(ideal=True, bias=bias)
    rng = np.random.default_rng(7)
    net = build_network(cfg, NetworkTopology((4, 5, 3), bias=bias), rng)
    orc = oracle_for(net)
    for _ in range(25):
        ws = [rng.uniform(-cfg.V_REF, cfg.V_REF, s) for s in net.topo.bank_map()]
        set_weights(net, ws)
        x = rng.uniform(0, 1, 4)
        assert np.max(np.abs(net.forward_pass(x) - orc.forward(ws, x))) <= 1e-6
        net.state = State.READY


def test_phase_order(cfg):
    net = build_network(cfg, rng=np.random.default_rng(0))
    with pytest.raises(PhaseError):
        net.backward_pass()
    with pytest.raises(PhaseError):
        net.weight_update_phase()
    with pytest.raises(PhaseError):
        net.evaluate_error([1, 0, 0])
    net.forward_pass([0.1, 0.2, 0.3, 0.4])
    with pytest.raises(PhaseError):
        net.weight_update_phase()
    net.evaluate_error([1, 0, 0])
    net.backward_pass()
    with pytest.raises(PhaseError):
        net.forward_pass([0.1, 0.2, 0.3, 0.4])
    with pytest.raises(PhaseError):
        net.write_back()
    net.weight_update_phase()
    assert net.phase_log == [Phase.FF, Phase.ERR, Phase.BP, Phase.WU]
    assert net.state is State.READY


def test_empty_network_rejects_forward(cfg):
    net = build_network(cfg)
    with pytest.raises(PhaseError):
        net.forward_pass([0, 0, 0, 0])


def test_converged_target_is_identity(cfg):
    net = build_network(cfg.replace(output_activation="linear", bias=False),
                        NetworkTopology((4, 5, 3), "linear"), np.random.default_rng(1))
    before = net.weights()
    y = net.forward_pass([0.2, 0.4, 0.6, 0.8])
    net.backward_pass(y)
    assert all(np.all(l.delta == 0) for l in net.layers)
    net.weight_update_phase()
    assert all(np.array_equal(a, b) for a, b in zip(before, net.weights()))


def test_single_weight_update():
    cfg = SimConfig(ideal=True, bias=False, output_activation="linear")
    net = build_network(cfg, NetworkTopology((1, 1), "linear"))
    net.write_codes([np.array([[1]])])
    w0 = net.weights()[0][0, 0]
    net.forward_pass([1.0])
    net.backward_pass([w0 + 0.5])  # delta = t - y = 0.5
    net.weight_update_phase()
    assert net.weights()[0][0, 0] == pytest.approx(w0 + 0.05, abs=1e-15)


def test_dead_neuron_gets_no_update(cfg):
    cfg = cfg.replace(ideal=True, bias=False)
    net = build_network(cfg, NetworkTopology((2, 2, 2), bias=False))
    net.write_codes([np.array([[3, 3], [-3, -3]]), np.array([[2, -2], [-1, 4]])])
    before = net.weights()[0]
    net.train_step([0.5, 0.5], [0.0, 1.0])
    after = net.weights()[0]
    assert net.layers[0].neurons.sampled_h[1] < 0
    assert np.array_equal(after[1], before[1])
    assert not np.array_equal(after[0], before[0])


def test_first_layer_update_uses_raw_input():
    cfg = SimConfig(ideal=True, bias=False)
    net = build_network(cfg, NetworkTopology((3, 2, 2), bias=False), np.random.default_rng(3))
    x = np.array([0.9, 0.0, 0.4])
    before = net.weights()[0]
    net.train_step(x, [1.0, 0.0])
    dw = net.weights()[0] - before
    d1 = net.layers[0].delta
    assert np.allclose(dw, cfg.eta * np.outer(d1, x), atol=1e-15)
    assert np.all(dw[:, 1] == 0)


@pytest.mark.parametrize("bias", [False, True])
def test_ideal_trajectory_matches_oracle(bias):
    cfg = SimConfig(ideal=True, bias=bias)
    rng = np.random.default_rng(11)
    net = build_network(cfg, NetworkTopology((4, 5, 3), bias=bias), rng)
    orc = oracle_for(net)
    ws = net.weights()
    for _ in range(15):
        x = rng.uniform(0, 1, 4)
        t = np.eye(3)[rng.integers(3)]
        net.train_step(x, t)
        ws = orc.sgd_step(ws, x, t, cfg.eta, mode="hardware", clip=cfg.V_REF)
        for a, b in zip(net.weights(), ws):
            assert np.max(np.abs(a - b)) <= 1e-5


def test_ledger_entries_per_iteration(cfg):
    net = build_network(cfg, rng=np.random.default_rng(0))
    base = net.ledger.by_phase()
    assert base["FR"]["delay"] == pytest.approx(2.4e-9)
    net.train_step([0.1, 0.2, 0.3, 0.4], [0, 1, 0])
    ph = net.ledger.by_phase()
    assert ph["ERR"]["delay"] == pytest.approx(340e-9)
    assert ph["FF"]["delay"] == pytest.approx(2 * cfg.delay_sm + 300e-12)
    assert ph["BP"]["count"] == 3 * 6 and ph["WU"]["count"] == 2 * (5 * 5 + 3 * 6)
    assert "softmax" in net.ledger.unmodeled_blocks()
    assert net.ledger.total_energy() == sum(e.energy for e in net.ledger.entries())


def test_evaluate_leaves_training_ledger(cfg):
    net = build_network(cfg, rng=np.random.default_rng(0))
    before = net.ledger.entries()
    X = np.random.default_rng(1).uniform(0, 1, (6, 4))
    acc, preds, led = evaluate(net, X, np.zeros(6, int), np.tile([1.0, 0, 0], (6, 1)))
    assert net.ledger.entries() == before
    s = led.per_decision_summary(6)
    assert s.delay == pytest.approx(2 * cfg.delay_sm + cfg.delay_relu + cfg.delay_err)
    assert 0.3e-6 < s.delay < 1e-6
    assert preds.shape == (6,) and 0 <= acc <= 1


def test_train_rejects_bad_input(cfg):
    net = build_network(cfg, rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        train(net, np.zeros((3, 4)), np.zeros((3, 3)), epochs=0)
    with pytest.raises(ValueError):
        train(net, np.zeros((3, 5)), np.zeros((3, 3)), epochs=1)
    with pytest.raises(ValueError):
        train(net, np.zeros((0, 4)), np.zeros((0, 3)), epochs=1)


def test_early_stop_on_plateau():
    # zero weights and uniform targets: every gradient vanishes and V_E never moves
    cfg = SimConfig(patience=5)
    net = build_network(cfg)
    net.write_codes([np.zeros(s, int) for s in net.topo.bank_map()])
    X = np.random.default_rng(0).uniform(0, 1, (4, 4))
    T = np.full((4, 3), 1 / 3)
    res = train(net, X, T, epochs=50)
    assert res.stopped_early and res.epochs_run == cfg.patience + 1
    assert len(res.log.mean_abs_VE) == res.epochs_run


def test_train_writes_back_codes(cfg):
    net = build_network(cfg, rng=np.random.default_rng(0))
    rng = np.random.default_rng(5)
    X = rng.uniform(0, 1, (6, 4))
    T = np.eye(3)[rng.integers(3, size=6)]
    res = train(net, X, T, epochs=3)
    assert res.epochs_run == 3 and not res.stopped_early
    for layer, grid in zip(net.layers, res.codes):
        assert np.array_equal(layer.bca.stored_values() != 15, np.ones(grid.shape, bool))
        assert np.allclose(net.weights()[layer.index - 1], grid * cfg.V_res)
    assert net.ledger.by_phase()["ADC"]["count"] == 5 * 5 + 3 * 6


def test_deterministic(cfg):
    def run():
        net = build_network(cfg, rng=np.random.default_rng(4))
        rng = np.random.default_rng(2)
        X = rng.uniform(0, 1, (8, 4))
        T = np.eye(3)[rng.integers(3, size=8)]
        res = train(net, X, T, epochs=4)
        return res.log.mean_abs_VE, net.ledger.to_csv(), [g.tolist() for g in res.codes]
    assert run() == run()


def test_accuracy_does_not_degrade_with_larger_a():
    from statistics import median

    from imcsim.cli import run_experiment

    acc = {}
    for A in (5.0, 100.0):
        acc[A] = median(run_experiment(SimConfig(A=A), seed=s)[0]["final"]["train_accuracy"] for s in range(5))
    assert acc[100.0] >= acc[5.0] - 0.05
