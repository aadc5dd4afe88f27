"""Behavioral simulator of an SRAM in-memory-computing MLP with on-chip training."""

from .config import SimConfig, WeightCode, decode_weight, encode_weight, load_config, parse_config
from .ledger import EnergyDelayLedger, LedgerEntry, Phase
from .network import InMemoryNetwork, NetworkTopology, PhaseError, build_network, evaluate, train

__all__ = [
    "EnergyDelayLedger",
    "InMemoryNetwork",
    "LedgerEntry",
    "NetworkTopology",
    "Phase",
    "PhaseError",
    "SimConfig",
    "WeightCode",
    "build_network",
    "decode_weight",
    "encode_weight",
    "evaluate",
    "load_config",
    "parse_config",
    "train",
]
__version__ = "0.1.0"
