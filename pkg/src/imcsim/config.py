"""Simulation configuration, physical defaults and the 1's-complement weight codec."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    """Raised for unparsable or invalid configuration files."""


@dataclass(frozen=True)
class WeightCode:
    """A B_W-bit weight code, ``bits`` ordered MSB first (b_{B_W-1} ... b_0)."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if not self.bits or any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"invalid weight code bits {self.bits!r}")

    @classmethod
    def from_string(cls, s: str) -> "WeightCode":
        return cls(tuple(int(ch) for ch in s.strip()))

    @classmethod
    def from_unsigned(cls, value: int, n_bits: int = 4) -> "WeightCode":
        if not 0 <= value < 2**n_bits:
            raise ValueError(f"unsigned value {value} does not fit in {n_bits} bits")
        return cls(tuple((value >> i) & 1 for i in reversed(range(n_bits))))

    @property
    def n_bits(self) -> int:
        return len(self.bits)

    @property
    def unsigned(self) -> int:
        """Natural-binary value sum(2^i * b_i)."""
        v = 0
        for b in self.bits:
            v = (v << 1) | b
        return v

    @property
    def sign_bit(self) -> int:
        return self.bits[0]

    def lsb_first(self) -> tuple[int, ...]:
        return tuple(reversed(self.bits))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


def max_magnitude(n_bits: int = 4) -> int:
    return 2 ** (n_bits - 1) - 1


def encode_weight(v: int, n_bits: int = 4) -> WeightCode:
    """Encode a signed integer in 1's complement. Zero always encodes to all-zeros."""
    v = int(v)
    vmax = max_magnitude(n_bits)
    if abs(v) > vmax:
        raise ValueError(f"weight {v} outside representable range [-{vmax}, +{vmax}]")
    code = WeightCode.from_unsigned(abs(v), n_bits)
    return ones_complement(code) if v < 0 else code


def decode_weight(c: WeightCode) -> int:
    if c.sign_bit == 0:
        return c.unsigned
    # 1111 -> -0 -> 0
    return -ones_complement(c).unsigned or 0


def ones_complement(c: WeightCode) -> WeightCode:
    return WeightCode(tuple(1 - b for b in c.bits))


@dataclass(frozen=True)
class SimConfig:
    """Simulator parameters in SI units.

    Defaults follow the published design point (V_PRE = 1 V, T_0 = 0.3 ns,
    B_W = 4, V_REF = 0.496 V, eta = 0.1, R_1 = 1 kOhm). Values the source
    design leaves open are documented placeholders.
    """

    # functional read
    V_PRE: float = 1.0
    T_0: float = 0.3e-9
    B_W: int = 4
    V_REF: float = 0.496
    alpha_nl: float = 0.0238
    nonlinear_fr: bool = False
    C_BL: float = 50e-15
    alpha_E: float = 0.2
    # multiplier
    A: float = 100.0
    K_i: float = 250.0
    R_load: float = 1e3
    k_mos: float = 1e-3
    ideal: bool = False
    v_rail: float = 1.0
    # weight update / error block
    R_1: float = 1e3
    eta: float = 0.1
    leak_rate: float = 0.0
    opamp_gain_error: float = 0.0
    # activation
    output_activation: str = "softmax"
    softmax_gain: float = 0.0
    softmax_bits: int = 0
    relu_charge: float = 1e-15
    # training
    rng_seed: int = 0
    epochs: int = 500
    patience: int = 50
    bias: bool = True
    init_code_max: int = 7
    # per-block delays (s)
    delay_swc: float = 1e-9
    delay_sm: float = 1e-9
    delay_wu: float = 1e-9
    delay_adc: float = 1e-9
    delay_relu: float = 300e-12
    delay_err: float = 340e-9
    # per-block energies (J)
    energy_adc: float = 50e-15

    def __post_init__(self):
        self.validate()

    @property
    def V_res(self) -> float:
        """ADC resolution, volts per step; full scale code 0111 lands on V_REF."""
        return self.V_REF / max_magnitude(self.B_W)

    @property
    def delta_V_lsb(self) -> float:
        return self.V_res

    @property
    def min_delta(self) -> float:
        """Early-stopping improvement threshold on mean |V_E|."""
        return 1e-4 * self.V_REF

    @property
    def logit_gain(self) -> float:
        """Volts-to-digital scale applied before softmax; 0 selects 1/V_res (ADC codes)."""
        return self.softmax_gain if self.softmax_gain > 0 else 1.0 / self.V_res

    @property
    def delay_fr(self) -> float:
        return 2 ** (self.B_W - 1) * self.T_0

    @property
    def delay_table(self) -> dict[str, float]:
        return {
            "fr": self.delay_fr,
            "swc": self.delay_swc,
            "sm": self.delay_sm,
            "wu": self.delay_wu,
            "adc": self.delay_adc,
            "relu": self.delay_relu,
            "err": self.delay_err,
        }

    @property
    def energy_table(self) -> dict[str, float]:
        return {"adc": self.energy_adc, "relu_charge": self.relu_charge, "C_BL": self.C_BL}

    def validate(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not math.isfinite(v):
                raise ConfigError(f"{f.name} must be finite, got {v}")
        if self.B_W != 4:
            raise ConfigError("B_W must be 4 (sub-ranged reads for wider weights are not simulated)")
        checks = [
            (self.A >= 1, "A >= 1"),
            (self.eta > 0, "eta > 0"),
            (self.V_PRE > 0, "V_PRE > 0"),
            (self.V_REF > 0, "V_REF > 0"),
            (self.T_0 > 0, "T_0 > 0"),
            (self.K_i > 0, "K_i > 0"),
            (self.R_load > 0, "R_load > 0"),
            (self.R_1 > 0, "R_1 > 0"),
            (self.k_mos > 0, "k_mos > 0"),
            (self.C_BL > 0, "C_BL > 0"),
            (self.alpha_nl >= 0, "alpha_nl >= 0"),
            (self.alpha_E > 0, "alpha_E > 0"),
            (self.leak_rate >= 0, "leak_rate >= 0"),
            (self.v_rail > 0, "v_rail > 0"),
            (self.softmax_bits >= 0, "softmax_bits >= 0"),
            (self.softmax_gain >= 0, "softmax_gain >= 0"),
            (self.output_activation in ("softmax", "linear"), "output_activation in {softmax, linear}"),
            (0 <= self.init_code_max <= max_magnitude(self.B_W), "0 <= init_code_max <= 7"),
            (self.relu_charge >= 0, "relu_charge >= 0"),
            (self.epochs >= 1, "epochs >= 1"),
            (self.patience >= 1, "patience >= 1"),
            (self.energy_adc >= 0, "energy_adc >= 0"),
        ]
        for ok, rule in checks:
            if not ok:
                raise ConfigError(f"invalid configuration: violates {rule}")
        for name in ("delay_swc", "delay_sm", "delay_wu", "delay_adc", "delay_relu", "delay_err"):
            if getattr(self, name) < 0:
                raise ConfigError(f"invalid configuration: violates {name} >= 0")

    def replace(self, **changes: Any) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


_DERIVED = {"V_res", "delta_V_lsb", "delay_fr", "min_delta", "logit_gain"}


def _parse_value(name: str, raw: str, kind: type, lineno: int) -> Any:
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is str:
            return raw.strip("'\"")
        return float(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: cannot parse {raw!r} as {kind.__name__} for {name}") from None


def parse_config(text: str) -> SimConfig:
    """Parse ``key = value`` lines ('#' starts a comment) into a validated config."""
    types = {f.name: type(f.default) for f in fields(SimConfig)}
    values: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key in _DERIVED:
            raise ConfigError(f"line {lineno}: {key} is derived from V_REF/B_W/T_0 and cannot be set")
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if not raw:
            raise ConfigError(f"line {lineno}: missing value for {key}")
        values[key] = _parse_value(key, raw, types[key], lineno)
    return SimConfig(**values)


def load_config(path: str | Path) -> SimConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def dump_config(cfg: SimConfig) -> str:
    lines = []
    for k, v in cfg.as_dict().items():
        lines.append(f"{k} = {v}\n" if isinstance(v, str) else f"{k} = {v!r}\n")
    return "".join(lines)
