"""Sum-of-squares error readout built from complementary saturated MOSFETs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ErrorReadout:
    per_output_errors: np.ndarray
    V_E: float
    I_total: float


def per_output_error(t_l, y_l, V_Tn: float = 0.4, V_Tp: float = -0.4):
    """e = t - y and the gate drives V_Gn = V_Tn - e, V_Gp = -|V_Tp| - e."""
    e = np.asarray(t_l, dtype=float) - np.asarray(y_l, dtype=float)
    v_gn = V_Tn - e
    v_gp = -abs(V_Tp) - e
    if e.ndim == 0:
        return float(e), float(v_gn), float(v_gp)
    return e, v_gn, v_gp


def branch_currents(e_l, k_mos: float = 1e-3, V_Tn: float = 0.4, V_Tp: float = -0.4):
    """NMOS and PMOS drain currents for error(s) ``e_l``.

    The source sits at 0 V with drain tied to it, so each device is in
    saturation whenever it conducts. NMOS: V_GS = V_Tn - e, on for e < 0.
    PMOS: V_SG = |V_Tp| + e, on for e > 0.
    """
    e = np.asarray(e_l, dtype=float)
    vov_n = (V_Tn - e) - V_Tn
    vov_p = (abs(V_Tp) + e) - abs(V_Tp)
    i_n = np.where(e < 0, 0.5 * k_mos * vov_n**2, 0.0)
    i_p = np.where(e > 0, 0.5 * k_mos * vov_p**2, 0.0)
    return i_n, i_p


def square_current(e_l, k_mos: float = 1e-3):
    """(1/2) k e^2, delivered by whichever branch conducts."""
    e = np.asarray(e_l, dtype=float)
    i = 0.5 * k_mos * e * e
    return i if i.ndim else float(i)


def sum_squares_voltage(errors, k_mos: float = 1e-3, R_1: float = 1e3) -> ErrorReadout:
    """I = (1/2) k sum e^2 summed by an OPAMP, V_E = -I R_1."""
    e = np.atleast_1d(np.asarray(errors, dtype=float))
    if e.size == 0:
        raise ValueError("error block needs at least one output")
    i_total = float(np.sum(square_current(e, k_mos)))
    return ErrorReadout(per_output_errors=e, V_E=-i_total * R_1, I_total=i_total)


def error_energy(v_e: float, R_1: float, delay: float) -> float:
    """Resistor-dominated dissipation V_E^2/R_1 over the block delay."""
    return v_e * v_e / R_1 * delay
