"""Activation potential, hardware ReLU with its gradient gate, and the digital softmax stage."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .multiplier import current_sum


@dataclass
class NeuronState:
    """Per-layer neuron state; ``h`` and ``sampled_h`` are vectors over the layer's banks."""

    h: np.ndarray = field(default_factory=lambda: np.zeros(0))
    a: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sampled_h: np.ndarray | None = None
    relu_gate: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))


def activation_potential(products, axis: int = -1):
    """h = sum_j a_j * w_jk, formed by current summation of the SM outputs of a bank."""
    return current_sum(products, axis=axis)


def relu(h):
    """max(0, h): the comparator + MUX A1 pair."""
    out = np.where(np.asarray(h) > 0, h, 0.0)
    return out if out.ndim else float(out)


def relu_gate(h):
    g = np.asarray(h) > 0
    return g if g.ndim else bool(g)


def local_gradient_gate(h, backsum):
    """MUX A2: pass the back-propagated sum only where h > 0."""
    out = np.where(np.asarray(h) > 0, backsum, 0.0)
    return out if out.ndim else float(out)


def quantize_uniform(x, n_bits: int, lo: float, hi: float):
    """Mid-tread uniform quantizer used to model the optional ADC/DAC around softmax."""
    if n_bits <= 0:
        return np.asarray(x, dtype=float)
    levels = 2**n_bits - 1
    step = (hi - lo) / levels
    return lo + np.round((np.clip(x, lo, hi) - lo) / step) * step


def softmax_digital(h_vec, gain: float = 1.0, n_bits: int = 0, h_range: float = 8.0):
    """Softmax of ``gain * h`` with max subtraction.

    ``gain`` converts volts to the digital units of the converter feeding the
    block. With ``n_bits > 0`` the input codes and output values are quantized
    to model the ADC and DAC around the digital block.
    """
    h = np.asarray(h_vec, dtype=float)
    if h.size == 0:
        raise ValueError("softmax needs at least one input")
    z = gain * h
    if n_bits:
        z = quantize_uniform(z, n_bits, -h_range, h_range)
    z = z - z.max()
    e = np.exp(z)
    y = e / e.sum()
    if n_bits:
        y = quantize_uniform(y, n_bits, 0.0, 1.0)
    return y


def output_local_gradient(t_vec, y_vec, activation: str = "softmax"):
    """delta_l = (t_l - y_l) * phi'_l.

    phi' is 1 for a linear output and the diagonal y(1 - y) for softmax.
    """
    t = np.asarray(t_vec, dtype=float)
    y = np.asarray(y_vec, dtype=float)
    if t.shape != y.shape:
        raise ValueError(f"target length {t.shape} does not match output length {y.shape}")
    e = t - y
    if activation == "linear":
        return e
    if activation == "softmax":
        return e * y * (1.0 - y)
    raise ValueError(f"unknown output activation {activation!r}")
