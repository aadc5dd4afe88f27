"""Banked SRAM bit-cell array with multi-row functional read (FR).

Weights live column-major in the last B_W rows of every column. A functional
read pulses all B_W word lines at once with binary-weighted widths
T_i = 2^i * T_0, discharging BLB in proportion to the stored value w and BL
in proportion to its 1's complement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SimConfig, WeightCode


class UninitializedCellError(RuntimeError):
    pass


@dataclass(frozen=True)
class BitlinePair:
    """Bitline discharges in volts. Fields may be scalars or equal-shape arrays."""

    dV_BL: float | np.ndarray
    dV_BLB: float | np.ndarray


def full_scale(cfg: SimConfig) -> float:
    """Discharge of an all-ones word, (2^B_W - 1) * dV_lsb."""
    return (2**cfg.B_W - 1) * cfg.delta_V_lsb


def discharge(x, cfg: SimConfig, nonlinear: bool | None = None):
    """Bitline discharge for an unsigned word value ``x`` (0 .. 2^B_W - 1).

    The linear model holds for T_i << R_BL*C_BL. The nonlinear model
    V_PRE*(1 - exp(-alpha_nl*x)) is rescaled so both models agree at x = 0
    and at full scale.
    """
    if nonlinear is None:
        nonlinear = cfg.nonlinear_fr
    x = np.asarray(x, dtype=float)
    if not nonlinear or cfg.alpha_nl == 0.0:
        out = x * cfg.delta_V_lsb
    else:
        n_max = 2**cfg.B_W - 1
        shape = -np.expm1(-cfg.alpha_nl * x) / -np.expm1(-cfg.alpha_nl * n_max)
        out = full_scale(cfg) * shape
    return out if out.ndim else float(out)


def fr_deviation_lsb(alpha: float, n_bits: int = 4) -> float:
    """Worst endpoint-calibrated deviation of the exponential discharge, in LSB."""
    x = np.arange(2**n_bits, dtype=float)
    n_max = x[-1]
    if alpha == 0.0:
        return 0.0
    dv = -np.expm1(-alpha * x)
    lsb = dv[-1] / n_max
    return float(np.max(np.abs(dv - x * lsb)) / lsb)


def fr_energy_of(w, cfg: SimConfig):
    """Energy of one column read for unsigned word ``w``.

    E(w) = C_BL*V_PRE*[(1 - e^{-alpha_E w}) + (1 - e^{-alpha_E w_bar})]. This is a
    stand-in for the unspecified coefficients of the published energy fit; it
    is symmetric in w <-> w_bar and smallest for the all-zero/all-one words.
    """
    w = np.asarray(w, dtype=float)
    n_max = 2**cfg.B_W - 1
    e = cfg.C_BL * cfg.V_PRE * (-np.expm1(-cfg.alpha_E * w) + -np.expm1(-cfg.alpha_E * (n_max - w)))
    return e if e.ndim else float(e)


def fr_delay(B_W: int = 4, T_0: float = 0.3e-9) -> float:
    """FR latency: the MSB word-line pulse, 2^(B_W-1) * T_0."""
    return 2 ** (B_W - 1) * T_0


class BitCellArray:
    """``n_bank`` banks of ``n_col`` columns by ``n_row`` rows of bits.

    For a layer with M inputs and N outputs: one bank per output neuron and one
    column per input. Only the weight region (last B_W rows) is modeled.
    """

    def __init__(self, n_bank: int, n_col: int, cfg: SimConfig, n_row: int | None = None):
        if n_bank < 1 or n_col < 1:
            raise ValueError("array needs at least one bank and one column")
        n_row = cfg.B_W if n_row is None else n_row
        if n_row < cfg.B_W:
            raise ValueError(f"n_row={n_row} cannot hold {cfg.B_W} weight bits")
        self.cfg = cfg
        self.n_bank = n_bank
        self.n_col = n_col
        self.n_row = n_row
        self.cells = np.zeros((n_bank, n_col, n_row), dtype=np.uint8)
        self.written = np.zeros((n_bank, n_col), dtype=bool)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_bank, self.n_col

    @property
    def weight_rows(self) -> slice:
        # first weight row carries the T_0 pulse (LSB)
        return slice(self.n_row - self.cfg.B_W, self.n_row)

    def _check(self, bank: int, col: int) -> None:
        if not (0 <= bank < self.n_bank and 0 <= col < self.n_col):
            raise IndexError(f"cell (bank={bank}, col={col}) outside {self.n_bank}x{self.n_col} array")

    def write_weight(self, bank: int, col: int, c: WeightCode) -> None:
        self._check(bank, col)
        if c.n_bits != self.cfg.B_W:
            raise ValueError(f"expected a {self.cfg.B_W}-bit code, got {c}")
        self.cells[bank, col, self.weight_rows] = c.lsb_first()
        self.written[bank, col] = True

    def read_code(self, bank: int, col: int) -> WeightCode:
        self._check(bank, col)
        if not self.written[bank, col]:
            raise UninitializedCellError(f"weight (bank={bank}, col={col}) read before write")
        return WeightCode(tuple(int(b) for b in self.cells[bank, col, self.weight_rows][::-1]))

    def stored_values(self) -> np.ndarray:
        """Unsigned word value of every column, shape (n_bank, n_col)."""
        if not self.written.all():
            bank, col = np.argwhere(~self.written)[0]
            raise UninitializedCellError(f"weight (bank={bank}, col={col}) read before write")
        bits = self.cells[:, :, self.weight_rows].astype(np.int64)
        return (bits << np.arange(self.cfg.B_W)).sum(axis=-1)

    def functional_read(self, bank: int, col: int) -> BitlinePair:
        w = self.read_code(bank, col).unsigned
        w_bar = 2**self.cfg.B_W - 1 - w
        return BitlinePair(dV_BL=discharge(w_bar, self.cfg), dV_BLB=discharge(w, self.cfg))

    def functional_read_all(self) -> BitlinePair:
        """Read every column at once; arrays of shape (n_bank, n_col)."""
        w = self.stored_values()
        w_bar = 2**self.cfg.B_W - 1 - w
        return BitlinePair(dV_BL=discharge(w_bar, self.cfg), dV_BLB=discharge(w, self.cfg))

    def fr_energy(self, bank: int, col: int) -> float:
        return fr_energy_of(self.read_code(bank, col).unsigned, self.cfg)

    def fr_energy_all(self) -> np.ndarray:
        return fr_energy_of(self.stored_values(), self.cfg)

    def codes(self) -> list[list[WeightCode]]:
        return [[self.read_code(b, c) for c in range(self.n_col)] for b in range(self.n_bank)]
