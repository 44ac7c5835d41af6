"""Structured event traces shared by the ledgers, engines, and harness.

Every ledger and engine in one simulation world writes into a single
TraceRecorder. Events carry the emitting chain's logical time plus a
global sequence number, so a finished trace can be ordered by
(time, seq) into one coherent timeline across chains.

Trace files are line-delimited JSON with sorted keys and no whitespace,
which makes equal-seed runs byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    time: int
    chain: str  # chain id, or a pseudo-chain such as "swap" / "channel"
    kind: str  # broadcast | confirm | evict | phase | reveal | channel | note
    tx_id: str | None = None  # hex digest
    phase: str | None = None
    revealed_digest: str | None = None
    author: str | None = None
    fee: int | None = None
    detail: str | None = None

    def to_record(self) -> dict:
        record = {"seq": self.seq, "time": self.time, "chain": self.chain, "kind": self.kind}
        for key in ("tx_id", "phase", "revealed_digest", "author", "fee", "detail"):
            value = getattr(self, key)
            if value is not None:
                record[key] = value
        return record


class TraceRecorder:
    """Assigns sequence numbers and accumulates events for one world."""

    def __init__(self) -> None:
        self.events: list[TraceEvent] = []

    def emit(self, time: int, chain: str, kind: str, **fields) -> TraceEvent:
        event = TraceEvent(seq=len(self.events), time=time, chain=chain, kind=kind, **fields)
        self.events.append(event)
        return event


SWAP_COMPLETED = "SwapCompleted"
BOTH_REFUNDED = "BothRefunded"
UNSAFE = "Unsafe"


@dataclass(frozen=True)
class Verdict:
    kind: str
    detail: str | None = None

    def is_safe(self) -> bool:
        return self.kind != UNSAFE

    def __str__(self) -> str:
        return self.kind if self.detail is None else f"{self.kind}({self.detail})"


# Balance maps are nested dicts: party name -> chain id -> base units.
BalanceMap = dict


@dataclass
class ScenarioTrace:
    """Everything one simulation run produced.

    ``events`` are sorted by (time, seq). The verdict is also derivable
    from the events alone: balance deltas and the verdict are appended as
    trailing records when the trace is emitted.
    """

    events: list[TraceEvent] = field(default_factory=list)
    initial_balances: BalanceMap = field(default_factory=dict)
    final_balances: BalanceMap = field(default_factory=dict)
    deltas: BalanceMap = field(default_factory=dict)
    fees_scheduled: BalanceMap = field(default_factory=dict)
    verdict: Verdict = Verdict(BOTH_REFUNDED)
    deviant: str | None = None  # party that owned the first skipped step

    def records(self) -> list[dict]:
        """All trace lines as JSON-ready records, events first."""
        out = [event.to_record() for event in self.events]
        for party in sorted(self.deltas):
            for chain in sorted(self.deltas[party]):
                out.append(
                    {
                        "kind": "balance",
                        "party": party,
                        "chain": chain,
                        "final": self.final_balances[party][chain],
                        "delta": self.deltas[party][chain],
                    }
                )
        verdict_record = {"kind": "verdict", "verdict": self.verdict.kind}
        if self.verdict.detail is not None:
            verdict_record["detail"] = self.verdict.detail
        if self.deviant is not None:
            verdict_record["deviant"] = self.deviant
        out.append(verdict_record)
        return out


def render_trace(trace: ScenarioTrace) -> str:
    lines = [json.dumps(r, sort_keys=True, separators=(",", ":")) for r in trace.records()]
    return "\n".join(lines) + "\n"


def emit_trace(trace: ScenarioTrace, path) -> None:
    """Write one record per line; byte-identical across equal-seed runs."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_trace(trace))


def compute_deltas(initial: BalanceMap, final: BalanceMap) -> BalanceMap:
    return {
        party: {chain: final[party][chain] - initial[party][chain] for chain in initial[party]}
        for party in initial
    }
