"""Floating-point reference MLP used to validate the analog path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OracleMLP:
    """ReLU hidden layers, softmax or linear output, loss E = 1/2 sum (t - y)^2.

    Weights are bank-major: ``W[k]`` has shape (N_k, N_{k-1} [+1 with bias]).
    The bias input is the constant ``bias_input``.
    """

    layer_sizes: tuple[int, ...]
    output_activation: str = "softmax"
    bias: bool = False
    bias_input: float = 1.0
    gain: float = 1.0

    def _check(self, weights):
        if len(weights) != len(self.layer_sizes) - 1:
            raise ValueError(f"expected {len(self.layer_sizes) - 1} weight matrices, got {len(weights)}")
        extra = 1 if self.bias else 0
        for k, w in enumerate(weights):
            want = (self.layer_sizes[k + 1], self.layer_sizes[k] + extra)
            if np.shape(w) != want:
                raise ValueError(f"layer {k + 1}: weight shape {np.shape(w)} != {want}")

    def _augment(self, a):
        return np.append(a, self.bias_input) if self.bias else a

    def forward(self, weights, x, trace: bool = False):
        self._check(weights)
        x = np.asarray(x, dtype=float)
        if x.shape != (self.layer_sizes[0],):
            raise ValueError(f"input length {x.shape} != {self.layer_sizes[0]}")
        a = x
        inputs, potentials = [], []
        for k, w in enumerate(weights):
            a_in = self._augment(a)
            h = np.asarray(w, dtype=float) @ a_in
            inputs.append(a_in)
            potentials.append(h)
            if k < len(weights) - 1:
                a = np.maximum(h, 0.0)
            elif self.output_activation == "softmax":
                z = self.gain * h
                z = np.exp(z - z.max())
                a = z / z.sum()
            else:
                a = h
        if trace:
            return a, inputs, potentials
        return a

    def loss(self, weights, x, t) -> float:
        y = self.forward(weights, x)
        return 0.5 * float(np.sum((np.asarray(t, dtype=float) - y) ** 2))

    def deltas(self, weights, x, t, mode: str = "exact"):
        """Local gradients delta_k = -dE/dh_k per layer.

        ``mode="exact"`` uses the full softmax Jacobian including the gain;
        ``mode="hardware"`` uses the diagonal y(1 - y) term the circuit applies.
        """
        y, inputs, potentials = self.forward(weights, x, trace=True)
        e = np.asarray(t, dtype=float) - y
        if self.output_activation == "linear":
            d = e
        elif mode == "hardware":
            d = e * y * (1.0 - y)
        elif mode == "exact":
            d = self.gain * y * (e - np.dot(e, y))
        else:
            raise ValueError(f"unknown gradient mode {mode!r}")
        ds = [d]
        for k in range(len(weights) - 1, 0, -1):
            back = np.asarray(weights[k], dtype=float).T @ ds[0]
            if self.bias:
                back = back[:-1]
            ds.insert(0, np.where(potentials[k - 1] > 0, back, 0.0))
        return y, inputs, ds

    def gradients(self, weights, x, t, mode: str = "exact"):
        """(y, [dE/dW_k]) for each layer."""
        y, inputs, ds = self.deltas(weights, x, t, mode)
        return y, [-np.outer(d, a) for d, a in zip(ds, inputs)]

    def sgd_step(self, weights, x, t, eta: float, mode: str = "hardware", clip: float | None = None):
        _, grads = self.gradients(weights, x, t, mode)
        new = [np.asarray(w, dtype=float) - eta * g for w, g in zip(weights, grads)]
        if clip is not None:
            new = [np.clip(w, -clip, clip) for w in new]
        return new


def finite_difference(fn, weights, step: float = 1e-5):
    """Central-difference gradient of scalar ``fn(weights)`` w.r.t. every entry."""
    weights = [np.array(w, dtype=float) for w in weights]
    grads = []
    for w in weights:
        g = np.zeros_like(w)
        for idx in np.ndindex(w.shape):
            orig = w[idx]
            w[idx] = orig + step
            plus = fn(weights)
            w[idx] = orig - step
            minus = fn(weights)
            w[idx] = orig
            g[idx] = (plus - minus) / (2 * step)
        grads.append(g)
    return grads


def oracle_mlp(topology, weights, x, t=None, **kw):
    """Forward pass and, when ``t`` is given, analytic gradients."""
    net = OracleMLP(tuple(topology), **kw)
    if t is None:
        return net.forward(weights, x), None
    return net.gradients(weights, x, t)
