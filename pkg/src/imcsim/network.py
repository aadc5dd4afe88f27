"""Network controller: layer assembly, the S[1:0] phase machine and the training loop.

One iteration runs FF (S=01) -> error -> BP (S=11) -> WU (S=10). Functional
read and signed-weight calculation happen once before training and again after
every ADC write-back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import activation as act
from .adc import writeback
from .config import SimConfig, WeightCode, encode_weight
from .error_block import error_energy, per_output_error, sum_squares_voltage
from .frontend import WeightUpdateUnit, swc_signed_weight
from .ledger import EnergyDelayLedger, Phase
from .multiplier import BACKPROP, FEEDFORWARD, WEIGHT_UPDATE, MultiplierModel, SmRouting, multiplier_power, sm_multiply
from .sram import BitCellArray


class PhaseError(RuntimeError):
    """A controller operation was invoked out of the FF -> ERR -> BP -> WU order."""


class State(str, Enum):
    EMPTY = "empty"
    READY = "ready"
    FF = "ff"
    ERR = "err"
    BP = "bp"


@dataclass
class PhaseControl:
    s: SmRouting | None = None
    phi_out: bool = False


@dataclass(frozen=True)
class NetworkTopology:
    layer_sizes: tuple[int, ...]
    output_activation: str = "softmax"
    bias: bool = False

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.layer_sizes)
        if len(sizes) < 2 or min(sizes) < 1:
            raise ValueError(f"topology needs >= 2 layers of >= 1 neuron, got {self.layer_sizes}")
        if self.output_activation not in ("softmax", "linear"):
            raise ValueError(f"unknown output activation {self.output_activation!r}")
        object.__setattr__(self, "layer_sizes", sizes)

    @property
    def n_layers(self) -> int:
        """Number of weight layers (xi)."""
        return len(self.layer_sizes) - 1

    def bank_map(self) -> list[tuple[int, int]]:
        """(N_bank, N_col) per weight layer; the bias adds one column."""
        extra = 1 if self.bias else 0
        return [(self.layer_sizes[k], self.layer_sizes[k - 1] + extra) for k in range(1, len(self.layer_sizes))]


class Layer:
    def __init__(self, index: int, n_bank: int, n_col: int, cfg: SimConfig):
        self.index = index
        self.bca = BitCellArray(n_bank, n_col, cfg)
        self.wu = WeightUpdateUnit(cfg, (n_bank, n_col))
        self.neurons = act.NeuronState()
        self.a_in: np.ndarray | None = None
        self.delta: np.ndarray | None = None
        self.prev_gate = np.zeros(n_bank, dtype=bool)

    @property
    def name(self) -> str:
        return f"L{self.index}"


@dataclass
class EpochLog:
    mean_abs_VE: list[float] = field(default_factory=list)
    train_accuracy: list[float] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    delay: list[float] = field(default_factory=list)


class InMemoryNetwork:
    """Behavioral simulator of the multi-bank in-memory MLP."""

    def __init__(self, cfg: SimConfig, topo: NetworkTopology):
        self.cfg = cfg
        self.topo = topo
        self.mult = MultiplierModel.from_config(cfg)
        self.layers = [Layer(k + 1, nb, nc, cfg) for k, (nb, nc) in enumerate(topo.bank_map())]
        self.ledger = EnergyDelayLedger()
        self.state = State.EMPTY
        self.control = PhaseControl()
        self.t = 0.0
        self.phase_log: list[Phase] = []
        self.last_readout = None

    # -- weights ---------------------------------------------------------

    def init_weights(self, rng: np.random.Generator) -> list[np.ndarray]:
        """Draw integer codes uniformly from [-init_code_max, +init_code_max] and load them."""
        m = self.cfg.init_code_max
        grids = [rng.integers(-m, m + 1, size=layer.bca.shape) for layer in self.layers]
        self.write_codes(grids)
        return grids

    def write_codes(self, grids) -> None:
        for layer, grid in zip(self.layers, grids):
            grid = np.asarray(grid)
            if grid.shape != layer.bca.shape:
                raise ValueError(f"layer {layer.name}: code grid {grid.shape} != array {layer.bca.shape}")
            for b in range(grid.shape[0]):
                for c in range(grid.shape[1]):
                    layer.bca.write_weight(b, c, encode_weight(int(grid[b, c]), self.cfg.B_W))
        self.load_weights()

    def load_weights(self) -> None:
        """FR + SWC of every column, sampling the signed weights onto C_S."""
        energy = 0.0
        n_cols = 0
        for layer in self.layers:
            pair = layer.bca.functional_read_all()
            energy += float(np.sum(layer.bca.fr_energy_all()))
            n_cols += layer.bca.n_bank * layer.bca.n_col
            layer.wu.sample_weight(swc_signed_weight(pair), self.t + self.cfg.delay_fr + self.cfg.delay_swc)
        self._charge("fr", Phase.FR, energy, self.cfg.delay_fr, n_cols)
        self._charge("swc", Phase.SWC, 0.0, self.cfg.delay_swc, n_cols, modeled=False)
        self.state = State.READY

    def weights(self) -> list[np.ndarray]:
        """Current analog weights (C_S voltages), bank-major (N_out, N_in[+1])."""
        return [np.array(layer.wu.read(self.t)) for layer in self.layers]

    def codes(self) -> list[list[list[WeightCode]]]:
        return [layer.bca.codes() for layer in self.layers]

    def write_back(self) -> list[np.ndarray]:
        """Quantize every analog weight with the signed ADC, store it, then re-read."""
        if self.state in (State.EMPTY, State.BP):
            raise PhaseError(f"write-back not allowed in state {self.state.value}")
        grids = []
        n = 0
        for layer in self.layers:
            grids.append(writeback(layer.bca, layer.wu.read(self.t)))
            n += layer.bca.n_bank * layer.bca.n_col
        self._charge("adc", Phase.ADC, n * self.cfg.energy_adc, self.cfg.delay_adc, n)
        self.load_weights()
        return grids

    # -- phases ----------------------------------------------------------

    def _charge(self, block: str, phase: Phase, energy: float, delay: float, count: int = 1,
                modeled: bool = True) -> None:
        self.ledger.add(block, phase, energy, delay, count, modeled)
        self.t += delay

    def _sm(self, s: SmRouting, **operands):
        out, _, (v1, v2) = sm_multiply(self.mult, s, eta=self.cfg.eta, **operands)
        energy = float(np.sum(multiplier_power(self.mult, *np.broadcast_arrays(v1, v2)))) * self.cfg.delay_sm
        return out, energy

    def _layer_input(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        if self.topo.bias:
            a = np.append(a, self.cfg.V_PRE)
        return a

    def forward_pass(self, x) -> np.ndarray:
        if self.state not in (State.READY, State.FF, State.ERR):
            raise PhaseError(f"forward pass not allowed in state {self.state.value}")
        x = np.asarray(x, dtype=float)
        if x.shape != (self.topo.layer_sizes[0],):
            raise ValueError(f"input length {x.shape} != {self.topo.layer_sizes[0]}")
        self.control.s = FEEDFORWARD
        self.phase_log = [Phase.FF]
        a = x
        last = len(self.layers) - 1
        for k, layer in enumerate(self.layers):
            a_in = self._layer_input(a)
            w = layer.wu.read(self.t)
            products, energy = self._sm(FEEDFORWARD, a_in=a_in[None, :], w=w)
            self._charge(f"sm[{layer.name}]", Phase.FF, energy, self.cfg.delay_sm, products.size)
            h = act.activation_potential(products, axis=1)
            self.control.phi_out = True
            layer.neurons.sampled_h = np.array(h, copy=True)
            self.control.phi_out = False
            layer.neurons.h = h
            layer.a_in = a_in
            if k < last:
                gate = act.relu_gate(h)
                flips = int(np.count_nonzero(gate != layer.prev_gate))
                layer.prev_gate = gate
                layer.neurons.relu_gate = gate
                layer.neurons.a = act.relu(h)
                self._charge(f"relu[{layer.name}]", Phase.FF, flips * self.cfg.relu_charge * self.cfg.v_rail,
                             self.cfg.delay_relu, h.size)
            elif self.topo.output_activation == "softmax":
                layer.neurons.a = act.softmax_digital(h, self.cfg.logit_gain, self.cfg.softmax_bits)
                self._charge("softmax", Phase.FF, 0.0, 0.0, h.size, modeled=False)
            else:
                layer.neurons.a = np.array(h, copy=True)
            a = layer.neurons.a
        self.state = State.FF
        return np.array(a, copy=True)

    def evaluate_error(self, t_vec):
        """Error block on the current outputs; returns the readout carrying V_E."""
        if self.state is not State.FF:
            raise PhaseError(f"error evaluation requires a completed forward pass (state {self.state.value})")
        y = self.layers[-1].neurons.a
        t_vec = np.asarray(t_vec, dtype=float)
        if t_vec.shape != y.shape:
            raise ValueError(f"target length {t_vec.shape} != output length {y.shape}")
        e, _, _ = per_output_error(t_vec, y)
        readout = sum_squares_voltage(e, self.cfg.k_mos, self.cfg.R_1)
        self._charge("error_block", Phase.ERR, error_energy(readout.V_E, self.cfg.R_1, self.cfg.delay_err),
                     self.cfg.delay_err, e.size)
        self.last_readout = readout
        self._target = t_vec
        self.phase_log.append(Phase.ERR)
        self.state = State.ERR
        return readout

    def backward_pass(self, t_vec=None) -> None:
        """Local gradients for every layer, output first.

        Backprop products carry the SM gain eta (S=11); the summing node of the
        backprop block converts with R_load/eta so S_j = sum_k delta_k w_jk.
        """
        if self.state is State.FF and t_vec is not None:
            self.evaluate_error(t_vec)
        if self.state is not State.ERR:
            raise PhaseError(f"backward pass requires forward and error phases first (state {self.state.value})")
        self.control.s = BACKPROP
        out = self.layers[-1]
        out.delta = act.output_local_gradient(self._target, out.neurons.a, self.topo.output_activation)
        for k in range(len(self.layers) - 1, 0, -1):
            layer = self.layers[k]
            w = layer.wu.read(self.t)
            products, energy = self._sm(BACKPROP, delta=layer.delta[:, None], w=w)
            self._charge(f"sm[{layer.name}]", Phase.BP, energy, self.cfg.delay_sm, products.size)
            s_j = act.current_sum(products, axis=0) / self.cfg.eta
            if self.topo.bias:
                s_j = s_j[:-1]
            below = self.layers[k - 1]
            below.delta = act.local_gradient_gate(below.neurons.sampled_h, s_j)
            if not self.cfg.ideal:
                below.delta = np.where(below.neurons.sampled_h < self.cfg.v_rail, below.delta, 0.0)
        self.phase_log.append(Phase.BP)
        self.state = State.BP

    def weight_update_phase(self) -> None:
        """S=10: every C_B gets eta*delta_k*a_j and all units commit in parallel."""
        if self.state is not State.BP:
            raise PhaseError(f"weight update requires a completed backward pass (state {self.state.value})")
        self.control.s = WEIGHT_UPDATE
        energy = 0.0
        count = 0
        t_commit = self.t + self.cfg.delay_sm + self.cfg.delay_wu
        for layer in self.layers:
            dw, e = self._sm(WEIGHT_UPDATE, delta=layer.delta[:, None], a_in=layer.a_in[None, :])
            energy += e
            count += dw.size
            layer.wu.sample_delta(dw, self.t + self.cfg.delay_sm)
            layer.wu.commit(t_commit)
        self._charge("sm", Phase.WU, energy, self.cfg.delay_sm, count)
        self._charge("wu", Phase.WU, 0.0, self.cfg.delay_wu, count, modeled=False)
        self.phase_log.append(Phase.WU)
        self.state = State.READY

    def train_step(self, x, t_vec):
        y = self.forward_pass(x)
        readout = self.evaluate_error(t_vec)
        self.backward_pass()
        self.weight_update_phase()
        return y, readout

    def predict(self, x) -> int:
        return int(np.argmax(self.forward_pass(x)))


@dataclass
class TrainResult:
    epochs_run: int
    stopped_early: bool
    log: EpochLog
    codes: list[np.ndarray]
    analog_train_accuracy: float


def build_network(cfg: SimConfig, topo: NetworkTopology | None = None, rng: np.random.Generator | None = None):
    """Assemble a network; with ``rng`` the BCA is initialized and read out."""
    topo = topo or NetworkTopology((4, 5, 3), cfg.output_activation, cfg.bias)
    net = InMemoryNetwork(cfg, topo)
    if rng is not None:
        net.init_weights(rng)
    return net


def train(net: InMemoryNetwork, X, T, epochs: int | None = None, labels=None, callback=None) -> TrainResult:
    """Per-sample gradient descent with early stopping on mean |V_E|, then ADC write-back.

    ``X`` and ``T`` are already in presentation order. Training stops once the
    epoch-mean |V_E| has not improved by ``cfg.min_delta`` for ``cfg.patience``
    consecutive epochs.
    """
    cfg = net.cfg
    epochs = cfg.epochs if epochs is None else epochs
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    X = np.asarray(X, dtype=float)
    T = np.asarray(T, dtype=float)
    if len(X) == 0 or len(X) != len(T):
        raise ValueError("training set must be nonempty with one target per sample")
    if X.shape[1] != net.topo.layer_sizes[0] or T.shape[1] != net.topo.layer_sizes[-1]:
        raise ValueError(f"dataset shape {X.shape}/{T.shape} does not match topology {net.topo.layer_sizes}")
    labels = np.argmax(T, axis=1) if labels is None else np.asarray(labels)
    log = EpochLog()
    best = np.inf
    stale = 0
    stopped = False
    run = 0
    for epoch in range(epochs):
        before_e = net.ledger.total_energy()
        before_d = net.ledger.total_delay()
        ve_sum = 0.0
        correct = 0
        for x, t_vec, lab in zip(X, T, labels):
            y, readout = net.train_step(x, t_vec)
            ve_sum += abs(readout.V_E)
            correct += int(np.argmax(y) == lab)
        run = epoch + 1
        mean_ve = ve_sum / len(X)
        log.mean_abs_VE.append(mean_ve)
        log.train_accuracy.append(correct / len(X))
        log.energy.append(net.ledger.total_energy() - before_e)
        log.delay.append(net.ledger.total_delay() - before_d)
        if callback is not None:
            callback(epoch, mean_ve, correct / len(X))
        if mean_ve < best - cfg.min_delta:
            best = mean_ve
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                stopped = True
                break
    analog_acc, _, _ = evaluate(net, X, labels)
    codes = net.write_back()
    return TrainResult(epochs_run=run, stopped_early=stopped, log=log, codes=codes,
                       analog_train_accuracy=analog_acc)


def evaluate(net: InMemoryNetwork, X, labels, T=None):
    """Inference over ``X`` on a scratch ledger.

    With targets ``T`` each decision also runs the error block. Returns
    (accuracy, predictions, ledger); the network's own ledger is untouched.
    """
    if net.state in (State.EMPTY, State.BP):
        raise PhaseError(f"evaluation not allowed in state {net.state.value}")
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    if len(X) == 0 or len(X) != len(labels):
        raise ValueError("evaluation set must be nonempty with one label per sample")
    saved = net.ledger
    net.ledger = EnergyDelayLedger()
    try:
        preds = np.empty(len(X), dtype=int)
        for i, x in enumerate(X):
            preds[i] = int(np.argmax(net.forward_pass(x)))
            if T is not None:
                net.evaluate_error(T[i])
        ledger = net.ledger
    finally:
        net.ledger = saved
        net.state = State.READY
    return float(np.mean(preds == labels)), preds, ledger
