"""Deterministic single-chain simulator.

A Ledger is a UTXO set plus a mempool and an absolute logical clock.
Broadcasting validates a transaction against confirmed state (witnesses,
value conservation, locktime support); confirmation happens when the
clock passes the transaction's eligibility time, which is the broadcast
time plus a fixed per-chain confirmation delay, or the locktime if that
is later. There is no mining, no forks, and no randomness: two runs with
the same inputs produce byte-identical logs.

Mempool conflicts cannot normally arise because broadcast rejects a
double spend against both confirmed state and the mempool. advance_time
still resolves conflicts defensively (first by eligibility time, then by
lexicographic tx id) and evicts the losers, so directly constructed race
states settle deterministically too.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .conditions import KeyRegistry, SignedBy, Witness, _sha256
from .trace import TraceRecorder
from .tx import Outpoint, Transaction, TxOutput, evaluate

# Convenience time constants (logical seconds).
MINUTE = 60
HOUR = 3600
DAY = 24 * HOUR


class ChainError(Exception):
    """Base for ledger-level rejections."""


class UnknownOutpoint(ChainError):
    """Input refers to an output that never existed on this chain."""


class DoubleSpend(ChainError):
    """Input refers to an output already spent or claimed in the mempool."""


class WitnessRejected(ChainError):
    """An input witness does not satisfy the output's spend condition."""


class ValueCreated(ChainError):
    """Transaction outputs exceed its inputs."""


class LocktimeNotSupported(ChainError):
    """Locktimed transaction broadcast on a chain without timelock support."""


class DuplicateChain(ChainError):
    """Chain id already taken within this simulation world."""


@dataclass(frozen=True)
class ChainFeatures:
    """Capability flags compared by the swap compatibility gate."""

    hash_algo_id: str = "sha256"
    supports_timelock: bool = True
    supports_scripts: bool = True


@dataclass
class PendingTx:
    tx: Transaction
    tx_id: bytes
    eligible_at: int
    broadcast_at: int
    author: str | None = None


@dataclass
class ConfirmedTx:
    tx: Transaction
    tx_id: bytes
    confirmed_at: int
    broadcast_at: int
    fee: int
    author: str | None = None


class Ledger:
    """One simulated chain. Single-threaded; never share mutably.

    Use :func:`create_ledger` or :meth:`World.create_ledger` instead of
    constructing directly, so the genesis transaction is set up.
    """

    def __init__(
        self,
        chain_id: str,
        *,
        confirmation_delay: int = 0,
        features: ChainFeatures | None = None,
        keys: KeyRegistry | None = None,
        recorder: TraceRecorder | None = None,
    ) -> None:
        if not chain_id or not chain_id.isascii():
            raise ValueError("chain_id must be a non-empty ASCII tag")
        if confirmation_delay < 0:
            raise ValueError("confirmation_delay must be non-negative")
        self.chain_id = chain_id
        self.confirmation_delay = confirmation_delay
        self.features = features or ChainFeatures()
        self.keys = keys or KeyRegistry()
        self.recorder = recorder or TraceRecorder()
        self.clock = 0
        self.utxo_set: dict[Outpoint, TxOutput] = {}
        self.confirmed: list[ConfirmedTx] = []
        self.mempool: list[PendingTx] = []
        self.genesis_total = 0
        self.cumulative_fees = 0
        self._spent: dict[Outpoint, bytes] = {}  # outpoint -> spending tx id
        self._confirmed_ids: dict[bytes, ConfirmedTx] = {}

    # -- queries ----------------------------------------------------------

    def query_balance(self, public: bytes) -> int:
        """Sum of unspent outputs owned outright by ``public``.

        Only plain single-signature outputs count; contract outputs
        (anything composite) belong to no one until spent.
        """
        owned = SignedBy(public)
        return sum(out.amount for out in self.utxo_set.values() if out.condition == owned)

    def scan_witnesses(self, digest: bytes) -> bytes | None:
        """Return a confirmed preimage of ``digest``, if one was ever revealed.

        This is the public observation channel: once a claim confirms, its
        hashlock opening is visible to everyone on the chain.
        """
        from .conditions import DIGEST_SIZE, hash_commit

        for entry in self.confirmed:
            for txin in entry.tx.inputs:
                for preimage in sorted(txin.witness.preimages):
                    if len(preimage) == DIGEST_SIZE and hash_commit(preimage) == digest:
                        return preimage
        return None

    def get_confirmed(self, tx_id: bytes) -> ConfirmedTx | None:
        return self._confirmed_ids.get(tx_id)

    def in_mempool(self, tx_id: bytes) -> bool:
        return any(p.tx_id == tx_id for p in self.mempool)

    def is_unspent(self, outpoint: Outpoint) -> bool:
        return outpoint in self.utxo_set

    def output(self, outpoint: Outpoint) -> TxOutput | None:
        return self.utxo_set.get(outpoint)

    # -- mutation ---------------------------------------------------------

    def broadcast(self, tx: Transaction, author: str | None = None) -> bytes:
        """Validate ``tx`` and queue it for confirmation. Returns the tx id.

        Rebroadcasting a transaction already known (mempool or confirmed)
        is a no-op that returns the same id.
        """
        tx_id = tx.tx_id()
        if tx_id in self._confirmed_ids or self.in_mempool(tx_id):
            return tx_id
        if tx.locktime > 0 and not self.features.supports_timelock:
            raise LocktimeNotSupported(f"{self.chain_id} does not support locktimes")

        seen: set[Outpoint] = set()
        input_total = 0
        for txin in tx.inputs:
            op = txin.outpoint
            if op in seen:
                raise DoubleSpend(f"input {op.tx_id.hex()}:{op.index} used twice in one tx")
            seen.add(op)
            out = self.utxo_set.get(op)
            if out is None:
                spender = self._spent.get(op)
                if spender is not None:
                    raise DoubleSpend(
                        f"output {op.tx_id.hex()}:{op.index} already spent by {spender.hex()}"
                    )
                raise UnknownOutpoint(f"no such output {op.tx_id.hex()}:{op.index}")
            for pending in self.mempool:
                if any(other.outpoint == op for other in pending.tx.inputs):
                    raise DoubleSpend(
                        f"output {op.tx_id.hex()}:{op.index} contested by mempool tx "
                        f"{pending.tx_id.hex()}"
                    )
            input_total += out.amount

        output_total = sum(out.amount for out in tx.outputs)
        if output_total > input_total:
            raise ValueCreated(f"outputs {output_total} exceed inputs {input_total}")

        for index, txin in enumerate(tx.inputs):
            condition = self.utxo_set[txin.outpoint].condition
            if not evaluate(condition, txin.witness, tx, self.keys):
                raise WitnessRejected(f"witness for input {index} does not satisfy condition")

        eligible_at = max(self.clock + self.confirmation_delay, tx.locktime)
        self.mempool.append(
            PendingTx(tx=tx, tx_id=tx_id, eligible_at=eligible_at, broadcast_at=self.clock, author=author)
        )
        self.recorder.emit(
            self.clock,
            self.chain_id,
            "broadcast",
            tx_id=tx_id.hex(),
            author=author,
            fee=input_total - output_total,
        )
        return tx_id

    def advance_time(self, dt: int) -> list[bytes]:
        """Move the clock forward and confirm everything that became eligible.

        Eligible transactions confirm in (eligible_at, tx id) order; any
        mempool transaction sharing an input with a newly confirmed one is
        evicted and reported as an "evict" trace event.
        """
        if dt < 0:
            raise ValueError("dt must be non-negative")
        self.clock += dt
        confirmed_ids: list[bytes] = []
        while True:
            eligible = [p for p in self.mempool if p.eligible_at <= self.clock]
            if not eligible:
                break
            pending = min(eligible, key=lambda p: (p.eligible_at, p.tx_id))
            self.mempool.remove(pending)
            if all(txin.outpoint in self.utxo_set for txin in pending.tx.inputs):
                self._confirm(pending)
                confirmed_ids.append(pending.tx_id)
                self._evict_conflicts(pending)
            else:
                self._evict(pending, reason="input spent before eligibility")
        return confirmed_ids

    def assert_invariants(self) -> None:
        """Conservation, double-spend freedom, and locktime soundness."""
        utxo_total = sum(out.amount for out in self.utxo_set.values())
        if utxo_total + self.cumulative_fees != self.genesis_total:
            raise AssertionError(
                f"{self.chain_id}: value not conserved "
                f"({utxo_total} + fees {self.cumulative_fees} != {self.genesis_total})"
            )
        spent_once: set[Outpoint] = set()
        for entry in self.confirmed:
            for txin in entry.tx.inputs:
                if txin.outpoint in spent_once:
                    raise AssertionError(f"{self.chain_id}: double spend in confirmed log")
                spent_once.add(txin.outpoint)
            if entry.tx.locktime and entry.confirmed_at < entry.tx.locktime:
                raise AssertionError(f"{self.chain_id}: locktime violated in confirmed log")
            if entry.tx.inputs and entry.confirmed_at < entry.broadcast_at + self.confirmation_delay:
                raise AssertionError(f"{self.chain_id}: confirmation delay violated")

    # -- internals --------------------------------------------------------

    def _confirm(self, pending: PendingTx) -> None:
        confirmed_at = max(pending.eligible_at, pending.broadcast_at)
        input_total = 0
        for txin in pending.tx.inputs:
            input_total += self.utxo_set.pop(txin.outpoint).amount
            self._spent[txin.outpoint] = pending.tx_id
        output_total = 0
        for index, out in enumerate(pending.tx.outputs):
            self.utxo_set[Outpoint(pending.tx_id, index)] = out
            output_total += out.amount
        fee = input_total - output_total if pending.tx.inputs else 0
        self.cumulative_fees += fee
        entry = ConfirmedTx(
            tx=pending.tx,
            tx_id=pending.tx_id,
            confirmed_at=confirmed_at,
            broadcast_at=pending.broadcast_at,
            fee=fee,
            author=pending.author,
        )
        self.confirmed.append(entry)
        self._confirmed_ids[pending.tx_id] = entry
        self.recorder.emit(
            confirmed_at,
            self.chain_id,
            "confirm",
            tx_id=pending.tx_id.hex(),
            author=pending.author,
            fee=fee,
        )

    def _evict_conflicts(self, confirmed: PendingTx) -> None:
        taken = {txin.outpoint for txin in confirmed.tx.inputs}
        conflicting = [
            p for p in self.mempool if any(txin.outpoint in taken for txin in p.tx.inputs)
        ]
        for pending in conflicting:
            self.mempool.remove(pending)
            self._evict(pending, reason=f"conflicts with {confirmed.tx_id.hex()}")

    def _evict(self, pending: PendingTx, reason: str) -> None:
        self.recorder.emit(
            self.clock,
            self.chain_id,
            "evict",
            tx_id=pending.tx_id.hex(),
            author=pending.author,
            detail=reason,
        )


def create_ledger(
    chain_id: str,
    genesis: list[tuple[bytes, int]],
    confirmation_delay: int = 0,
    features: ChainFeatures | None = None,
    *,
    keys: KeyRegistry | None = None,
    recorder: TraceRecorder | None = None,
) -> Ledger:
    """Create a ledger whose genesis grants each (public key, amount) entry.

    Pass a shared ``keys`` registry when the same parties act on several
    chains, otherwise their signatures cannot be verified here.
    """
    for public, amount in genesis:
        if amount <= 0:
            raise ValueError(f"zero or negative genesis amount for {public.hex()}")
    ledger = Ledger(
        chain_id,
        confirmation_delay=confirmation_delay,
        features=features,
        keys=keys,
        recorder=recorder,
    )
    outputs = tuple(TxOutput(amount, SignedBy(public)) for public, amount in genesis)
    nonce = int.from_bytes(_sha256(b"genesis", chain_id.encode("ascii"))[:8], "big")
    genesis_tx = Transaction(inputs=(), outputs=outputs, locktime=0, nonce=nonce)
    tx_id = genesis_tx.tx_id()
    for index, out in enumerate(outputs):
        ledger.utxo_set[Outpoint(tx_id, index)] = out
    entry = ConfirmedTx(
        tx=genesis_tx, tx_id=tx_id, confirmed_at=0, broadcast_at=0, fee=0, author=None
    )
    ledger.confirmed.append(entry)
    ledger._confirmed_ids[tx_id] = entry
    ledger.genesis_total = sum(amount for _, amount in genesis)
    return ledger


class World:
    """A set of ledgers sharing one clock discipline, key registry, and trace.

    Ledgers advance in lockstep through :meth:`advance`; engines may then
    compare times across chains meaningfully. A world is confined to one
    thread; run independent worlds for parallel scenarios.
    """

    def __init__(self) -> None:
        self.keys = KeyRegistry()
        self.recorder = TraceRecorder()
        self.ledgers: dict[str, Ledger] = {}

    def create_ledger(
        self,
        chain_id: str,
        genesis: list[tuple[bytes, int]],
        confirmation_delay: int = 0,
        features: ChainFeatures | None = None,
    ) -> Ledger:
        if chain_id in self.ledgers:
            raise DuplicateChain(f"chain id {chain_id!r} already exists in this world")
        ledger = create_ledger(
            chain_id,
            genesis,
            confirmation_delay,
            features,
            keys=self.keys,
            recorder=self.recorder,
        )
        if self.ledgers:
            sibling_clock = self.clock()
            ledger.clock = sibling_clock
        self.ledgers[chain_id] = ledger
        return ledger

    def clock(self) -> int:
        clocks = {ledger.clock for ledger in self.ledgers.values()}
        if not clocks:
            return 0
        if len(clocks) != 1:
            raise AssertionError(f"world clocks diverged: {sorted(clocks)}")
        return clocks.pop()

    def advance(self, dt: int) -> dict[str, list[bytes]]:
        """Advance every ledger by the same dt; returns confirmations per chain."""
        return {chain_id: ledger.advance_time(dt) for chain_id, ledger in self.ledgers.items()}

    def advance_to(self, target: int) -> dict[str, list[bytes]]:
        now = self.clock()
        return self.advance(max(0, target - now))

    def assert_invariants(self) -> None:
        for ledger in self.ledgers.values():
            ledger.assert_invariants()
