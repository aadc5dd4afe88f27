"""Four-quadrant triode multiplier, signed-multiplier (SM) routing and current summation."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import SimConfig


class ForbiddenStateError(ValueError):
    pass


class Destination(str, Enum):
    ACTIVATION = "activation"
    WEIGHT_UPDATE = "weight-update"
    BACKPROP = "backprop"


@dataclass(frozen=True)
class MultiplierModel:
    """Calibrated behavioral multiplier.

    ``A`` attenuates the second operand so the devices stay in triode; the
    current gain ``K_i`` and load resistor are bookkeeping once the transfer is
    calibrated to unit gain. ``ideal`` switches to the exact product.
    """

    A: float = 100.0
    K_i: float = 250.0
    k_mos: float = 1e-3
    R_load: float = 1e3
    ideal: bool = False
    v_max: float = 1.0

    def __post_init__(self):
        if self.A < 1:
            raise ValueError(f"reduction factor A must be >= 1, got {self.A}")
        if self.K_i <= 0:
            raise ValueError(f"current gain K_i must be > 0, got {self.K_i}")

    @classmethod
    def from_config(cls, cfg: SimConfig) -> "MultiplierModel":
        return cls(A=cfg.A, K_i=cfg.K_i, k_mos=cfg.k_mos, R_load=cfg.R_load, ideal=cfg.ideal, v_max=cfg.v_rail)


def _check_range(m: MultiplierModel, v1, v2) -> None:
    if np.any(np.abs(v1) > m.v_max) or np.any(np.abs(v2) > m.v_max):
        raise ValueError(f"multiplier inputs must lie within +/-{m.v_max} V")


def multiply(m: MultiplierModel, v1, v2):
    """Multiplier output voltage.

    Non-ideal transfer, from i = k[(V_GS - V_T) V_DS - V_DS^2/2] with
    V_GS - V_T = |v1| and V_DS = |v2|/A, rescaled to unit bilinear gain:

        |v_out| = |v1 v2| - v2^2/(2A)      for |v2|/A <= |v1|  (triode)
        |v_out| = A v1^2 / 2               otherwise          (saturated)

    and v_out carries the sign of v1*v2. The worst case error over the unit
    square is 1/(2A), at |v1| = |v2| = 1. Ideal multipliers are not range limited.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    if m.ideal:
        out = v1 * v2
        return out if out.ndim else float(out)
    _check_range(m, v1, v2)
    a1, a2 = np.abs(v1), np.abs(v2)
    vds = a2 / m.A
    triode = vds <= a1
    mag = np.where(triode, a1 * a2 - a2 * a2 / (2 * m.A), m.A * a1 * a1 / 2)
    out = np.sign(v1 * v2) * mag
    return out if out.ndim else float(out)


def multiplier_power(m: MultiplierModel, v1, v2):
    """Device dissipation k*|v1|*(v2/A)^2 of the triode pair (W)."""
    p = m.k_mos * np.abs(np.asarray(v1, dtype=float)) * (np.asarray(v2, dtype=float) / m.A) ** 2
    return p if p.ndim else float(p)


@dataclass(frozen=True)
class SmRouting:
    """2-bit control word S[1:0]."""

    s: int

    def __post_init__(self):
        if self.s not in (0, 1, 2, 3):
            raise ValueError(f"S[1:0] must be a 2-bit value, got {self.s}")

    @classmethod
    def from_bits(cls, bits: str) -> "SmRouting":
        return cls(int(bits, 2))

    def __str__(self) -> str:
        return format(self.s, "02b")


FEEDFORWARD = SmRouting(0b01)
WEIGHT_UPDATE = SmRouting(0b10)
BACKPROP = SmRouting(0b11)


def sm_route(s: SmRouting, a_in, w, delta, eta: float):
    """Select operands (v1, v2), output gain and destination for control word ``s``.

    Gradients always drive the drain-side input v2, so their small values see
    only the second-order v2^2/(2A) error rather than being squashed.
    """
    if s.s == 0b01:
        return (a_in, w), 1.0, Destination.ACTIVATION
    if s.s == 0b10:
        return (a_in, delta), eta, Destination.WEIGHT_UPDATE
    if s.s == 0b11:
        return (w, delta), eta, Destination.BACKPROP
    raise ForbiddenStateError("S[1:0] = 00 is a forbidden state")


def sm_multiply(m: MultiplierModel, s: SmRouting, *, a_in=0.0, w=0.0, delta=0.0, eta: float = 1.0):
    """Run one SM unit: route, multiply and apply the output gain.

    Non-ideal multipliers see their operands saturated at the supply rail,
    as the pre-processing block cannot drive beyond it.
    """
    (v1, v2), gain, dest = sm_route(s, a_in, w, delta, eta)
    if not m.ideal:
        v1 = np.clip(v1, -m.v_max, m.v_max)
        v2 = np.clip(v2, -m.v_max, m.v_max)
    return gain * np.asarray(multiply(m, v1, v2)), dest, (v1, v2)


def current_sum(terms, axis: int = -1):
    """Current-mode summation of product voltages through a unit-calibrated load.

    Terms are accumulated in ascending index order along ``axis``.
    """
    arr = np.asarray(terms, dtype=float)
    if arr.ndim == 0 or arr.shape[axis] == 0:
        raise ValueError("current_sum needs at least one term")
    arr = np.moveaxis(arr, axis, 0)
    total = arr[0].copy()
    for term in arr[1:]:
        total = total + term
    return total if total.ndim else float(total)
