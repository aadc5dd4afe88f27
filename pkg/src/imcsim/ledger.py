"""Energy/delay accounting shared by all simulated blocks."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum


class Phase(str, Enum):
    FR = "FR"
    SWC = "SWC"
    FF = "FF"
    ERR = "ERR"
    BP = "BP"
    WU = "WU"
    ADC = "ADC"


_PHASE_ORDER = {p: i for i, p in enumerate(Phase)}


@dataclass(frozen=True)
class LedgerEntry:
    block: str
    phase: Phase
    energy: float = 0.0
    delay: float = 0.0
    count: int = 1
    modeled: bool = True

    def __post_init__(self):
        if self.energy < 0 or self.delay < 0 or self.count < 0:
            raise ValueError(f"ledger entry for {self.block} has a negative field: {self}")
        object.__setattr__(self, "phase", Phase(self.phase))


@dataclass(frozen=True)
class DecisionSummary:
    energy: float
    delay: float
    edp: float
    throughput: float


class EnergyDelayLedger:
    """Accumulates entries per (block, phase).

    Entries recorded under the same key are merged into one running entry, so
    long training runs stay small. Totals are always recomputed from the
    entries in sorted order.
    """

    def __init__(self):
        self._acc: dict[tuple[str, Phase], list] = {}

    def record(self, entry: LedgerEntry) -> None:
        key = (entry.block, entry.phase)
        slot = self._acc.get(key)
        if slot is None:
            self._acc[key] = [entry.energy, entry.delay, entry.count, entry.modeled]
        else:
            slot[0] += entry.energy
            slot[1] += entry.delay
            slot[2] += entry.count
            slot[3] = slot[3] and entry.modeled

    def add(self, block: str, phase: Phase, energy: float = 0.0, delay: float = 0.0,
            count: int = 1, modeled: bool = True) -> None:
        self.record(LedgerEntry(block, Phase(phase), energy, delay, count, modeled))

    def entries(self) -> list[LedgerEntry]:
        keys = sorted(self._acc, key=lambda k: (k[0], _PHASE_ORDER[k[1]]))
        return [LedgerEntry(b, p, *self._acc[(b, p)]) for b, p in keys]

    def __len__(self) -> int:
        return len(self._acc)

    def total_energy(self) -> float:
        total = 0.0
        for e in self.entries():
            total += e.energy
        return total

    def total_delay(self) -> float:
        total = 0.0
        for e in self.entries():
            total += e.delay
        return total

    def by_phase(self) -> dict[str, dict[str, float]]:
        out = {p.value: {"energy": 0.0, "delay": 0.0, "count": 0} for p in Phase}
        for e in self.entries():
            slot = out[e.phase.value]
            slot["energy"] += e.energy
            slot["delay"] += e.delay
            slot["count"] += e.count
        return out

    def unmodeled_blocks(self) -> list[str]:
        return sorted({e.block for e in self.entries() if not e.modeled})

    def merge(self, other: "EnergyDelayLedger") -> "EnergyDelayLedger":
        merged = EnergyDelayLedger()
        for src in (self, other):
            for e in src.entries():
                merged.record(e)
        return merged

    def per_decision_summary(self, n_decisions: int) -> DecisionSummary:
        if n_decisions < 1:
            raise ValueError("per-decision summary needs at least one decision")
        energy = self.total_energy() / n_decisions
        delay = self.total_delay() / n_decisions
        throughput = 1.0 / delay if delay > 0 else float("inf")
        return DecisionSummary(energy=energy, delay=delay, edp=energy * delay, throughput=throughput)

    def totals(self) -> dict:
        return {
            "energy_J": self.total_energy(),
            "delay_s": self.total_delay(),
            "by_phase": self.by_phase(),
            "unmodeled": self.unmodeled_blocks(),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["block", "phase", "energy_J", "delay_s", "count", "modeled"])
        for e in self.entries():
            w.writerow([e.block, e.phase.value, repr(e.energy), repr(e.delay), e.count, int(e.modeled)])
        return buf.getvalue()


def summarize(energy: float, delay: float) -> DecisionSummary:
    """Table-style per-decision identities from raw energy and delay."""
    return DecisionSummary(energy=energy, delay=delay, edp=energy * delay, throughput=1.0 / delay)
