"""4-bit signed flash ADC producing 1's-complement weight codes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SimConfig, WeightCode, decode_weight, encode_weight, max_magnitude
from .sram import BitCellArray


@dataclass(frozen=True)
class AdcTransfer:
    V_REF: float = 0.496
    n_bits: int = 4

    @classmethod
    def from_config(cls, cfg: SimConfig) -> "AdcTransfer":
        return cls(V_REF=cfg.V_REF, n_bits=cfg.B_W)

    @property
    def m_max(self) -> int:
        return max_magnitude(self.n_bits)

    @property
    def V_res(self) -> float:
        return self.V_REF / self.m_max

    @property
    def thresholds(self) -> np.ndarray:
        """Ladder taps (m - 1/2) V_res, m = 1..m_max."""
        return (np.arange(1, self.m_max + 1) - 0.5) * self.V_res

    def magnitude(self, v) -> np.ndarray:
        """Signed magnitude index for each input, in [-m_max, m_max].

        b_3 goes high only below -V_res/2; only that side's priority encoder is
        enabled. An input exactly on a magnitude tap takes the larger magnitude;
        one exactly on the sign boundary stays on the positive path (code 0).
        """
        v = np.asarray(v, dtype=float)
        taps = self.thresholds
        negative = v < -taps[0]
        drive = np.where(negative, -v, v)
        m = (drive[..., None] >= taps).sum(axis=-1)
        return np.where(negative, -m, m)

    def quantize(self, v):
        m = self.magnitude(v)
        if m.ndim == 0:
            return encode_weight(int(m), self.n_bits)
        return [encode_weight(int(x), self.n_bits) for x in m.ravel()]

    def transfer_curve(self) -> list[tuple[float, WeightCode]]:
        """Breakpoints (lower edge volts, code) ascending; the first edge is -inf."""
        taps = self.thresholds
        edges = [-np.inf] + [-t for t in taps[::-1]] + list(taps)
        codes = [encode_weight(m, self.n_bits) for m in range(-self.m_max, self.m_max + 1)]
        return [(float(e), c) for e, c in zip(edges, codes)]


def quantize(v, cfg: SimConfig | None = None):
    return AdcTransfer.from_config(cfg or SimConfig()).quantize(v)


def code_voltage(c: WeightCode, cfg: SimConfig | None = None) -> float:
    """Nominal analog voltage of a code, decode(c) * V_res."""
    cfg = cfg or SimConfig()
    return decode_weight(c) * cfg.V_res


def writeback(array: BitCellArray, weights) -> np.ndarray:
    """Quantize a (n_bank, n_col) grid of weight voltages into the array.

    Returns the signed integer grid that was stored.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != array.shape:
        raise ValueError(f"weight grid {w.shape} does not match array layout {array.shape}")
    adc = AdcTransfer.from_config(array.cfg)
    m = adc.magnitude(w)
    for bank in range(array.n_bank):
        for col in range(array.n_col):
            array.write_weight(bank, col, encode_weight(int(m[bank, col]), array.cfg.B_W))
    return m
