"""Signed weight calculation (SWC) and the capacitor-based weight-update (WU) unit."""

from __future__ import annotations

import numpy as np

from .config import SimConfig
from .sram import BitlinePair


class SwitchProtocolError(RuntimeError):
    """A sampling switch was operated out of the phi_S / phi_B / phi_L order."""


def swc_sign(p: BitlinePair):
    """S_W = 0 when V_BLB >= V_BL (the BLB line discharged no more than BL)."""
    s = np.where(np.asarray(p.dV_BLB) <= np.asarray(p.dV_BL), 0, 1)
    return s if s.ndim else int(s)


def swc_signed_weight(p: BitlinePair):
    """Signed weight voltage from a bitline pair.

    The MUX picks whichever line holds |w| (BLB for S_W = 0, BL otherwise); the
    follower or inverting OPAMP stage then restores the sign.
    """
    s = np.asarray(swc_sign(p))
    dv_mux = np.where(s == 0, p.dV_BLB, p.dV_BL)
    v = np.where(s == 0, dv_mux, -dv_mux)
    return v if v.ndim else float(v)


class WeightUpdateUnit:
    """Sample/hold datapath computing w + dw on capacitors.

    C_S holds the current weight, C_B the pending change. Closing phi_L latches
    V_U = (C_S + C_B)/2 from the equal-resistor divider onto C_L; a gain-2 stage
    restores w + dw, which is clipped to +/-V_REF and re-sampled onto C_S.

    State may be scalar or an array (one entry per synapse of a layer); every
    entry shares the same switch controls, as on chip.
    """

    def __init__(self, cfg: SimConfig, shape: tuple[int, ...] = ()):
        self.cfg = cfg
        self.C_S_voltage = np.zeros(shape)
        self.C_B_voltage = np.zeros(shape)
        self.C_L_voltage = np.zeros(shape)
        self.phi = {"S": False, "B": False, "L": False}
        self.last_update_time = 0.0
        self._sampled_s = False
        self._sampled_b = False

    def _leak(self, t: float) -> None:
        if t < self.last_update_time:
            raise SwitchProtocolError(f"time went backwards: {t} < {self.last_update_time}")
        if self.cfg.leak_rate > 0.0:
            droop = np.exp(-self.cfg.leak_rate * (t - self.last_update_time))
            self.C_S_voltage = self.C_S_voltage * droop
            self.C_B_voltage = self.C_B_voltage * droop
            self.C_L_voltage = self.C_L_voltage * droop
        self.last_update_time = t

    def _close(self, name: str) -> None:
        busy = [k for k, closed in self.phi.items() if closed and k != name]
        if busy:
            raise SwitchProtocolError(f"cannot close phi_{name} while phi_{busy[0]} is closed")
        self.phi[name] = True

    def _open(self, name: str) -> None:
        self.phi[name] = False

    def read(self, t: float | None = None):
        """Buffered C_S voltage, with leakage applied up to ``t``."""
        if t is not None:
            self._leak(t)
        v = self.C_S_voltage
        return v if v.ndim else float(v)

    def sample_weight(self, w, t: float = 0.0) -> None:
        self._leak(t)
        self._close("S")
        self.C_S_voltage = np.array(w, dtype=float) + np.zeros_like(self.C_S_voltage)
        self._open("S")
        self._sampled_s = True

    def sample_delta(self, dw, t: float = 0.0) -> None:
        self._leak(t)
        self._close("B")
        self.C_B_voltage = np.array(dw, dtype=float) + np.zeros_like(self.C_B_voltage)
        self._open("B")
        self._sampled_b = True

    def commit(self, t: float = 0.0):
        if not (self._sampled_s and self._sampled_b):
            raise SwitchProtocolError("commit requires both C_S and C_B to be sampled this iteration")
        self._leak(t)
        self._close("L")
        self.C_L_voltage = (self.C_S_voltage + self.C_B_voltage) / 2.0
        self._open("L")
        gain = 2.0 * (1.0 + self.cfg.opamp_gain_error)
        updated = np.clip(gain * self.C_L_voltage, -self.cfg.V_REF, self.cfg.V_REF)
        self.C_S_voltage = updated
        # C_S is re-sampled from the amplifier output; the next iteration only needs a fresh dw
        self._sampled_b = False
        return updated if updated.ndim else float(updated)


def wu_sample_weight(u: WeightUpdateUnit, w, t: float = 0.0) -> None:
    u.sample_weight(w, t)


def wu_sample_delta(u: WeightUpdateUnit, dw, t: float = 0.0) -> None:
    u.sample_delta(dw, t)


def wu_commit(u: WeightUpdateUnit, t: float = 0.0):
    return u.commit(t)
