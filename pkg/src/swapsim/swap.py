"""Two-party cross-chain swap as an explicit state machine over two ledgers.

The protocol escrows Alice's coins on chain A behind a hashlock that only
Bob can claim by presenting her secret, and symmetrically escrows Bob's
coins on chain B behind the same digest for Alice. Refund transactions
are co-signed before anything is broadcast, with Alice's refund locked
further in the future than Bob's (48 h vs 24 h by default), so the party
who reveals the secret always leaves the counterparty a non-empty claim
window.

Transactions:
    tx1  Alice's escrow on A:  claim = (preimage AND Bob) OR (Alice AND Bob)
    tx2  Alice's refund of tx1, locktime now + timelock_a, needs both sigs
    tx3  Bob's escrow on B:    claim = (preimage AND Alice) OR (Alice AND Bob)
    tx4  Bob's refund of tx3,  locktime now + timelock_b, needs both sigs

Everything in a session except ``secret`` is information the parties
exchanged or can read on-chain. Operations acting for Bob only ever use
``announced_digest`` (the value Alice messaged him) and confirmed chain
state, never Alice's private fields, which is what lets a dishonest
announcement be caught by the on-chain cross-check.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .chain import DAY, DoubleSpend, Ledger
from .conditions import (
    And,
    KeyPair,
    Or,
    PreimageOf,
    SignedBy,
    SpendCondition,
    Witness,
    gen_secret,
    hash_commit,
)
from .trace import TraceRecorder
from .tx import Outpoint, Transaction, TxInput, TxOutput, sign

TIMELOCK_A_DEFAULT = 2 * DAY  # 172800 s: Alice's refund delay
TIMELOCK_B_DEFAULT = 1 * DAY  # 86400 s: Bob's refund delay


class SwapError(Exception):
    """Base for protocol-level rejections."""


class WrongPhase(SwapError):
    """Operation called out of protocol order; nothing was mutated."""


class IncompatibleChains(SwapError):
    def __init__(self, violations: list[str]) -> None:
        super().__init__("; ".join(violations))
        self.violations = violations


class InsufficientFunds(SwapError):
    pass


class TimelockOrderingViolation(SwapError):
    pass


class Tx1NotConfirmed(SwapError):
    pass


class Tx3NotConfirmed(SwapError):
    pass


class TooEarly(SwapError):
    """Refund attempted before its locktime."""


class TooLate(SwapError):
    """Claim attempted inside the counterparty's refund window."""


class AlreadySpent(SwapError):
    """Refund attempted after the counterparty's claim took the output."""


class PreimageNotRevealed(SwapError):
    pass


class DigestMismatch(SwapError):
    """On-chain escrow does not match the digest Alice announced."""


class Phase(enum.Enum):
    INIT = "Init"
    REFUND_A_COSIGNED = "RefundACosigned"
    TX1_BROADCAST = "Tx1Broadcast"
    TX3_BUILT = "Tx3Built"
    REFUND_B_COSIGNED = "RefundBCosigned"
    TX3_BROADCAST = "Tx3Broadcast"
    ALICE_CLAIMED = "AliceClaimed"
    BOB_CLAIMED = "BobClaimed"
    REFUNDED_A = "RefundedA"
    REFUNDED_B = "RefundedB"
    COMPLETED = "Completed"
    ABORTED = "Aborted"


@dataclass(frozen=True)
class SwapParams:
    chain_a: str
    chain_b: str
    n1: int  # Alice gives this much on chain A
    n2: int  # Bob gives this much on chain B
    alice: KeyPair
    bob: KeyPair
    timelock_a: int = TIMELOCK_A_DEFAULT
    timelock_b: int = TIMELOCK_B_DEFAULT
    seed: int = 0
    claim_margin: int | None = None  # None: 2 x confirmation delay per chain
    fee: int = 0  # flat fee deducted from every protocol transaction

    def __post_init__(self) -> None:
        if self.n1 <= 0 or self.n2 <= 0:
            raise ValueError("swap amounts must be positive")
        if self.chain_a == self.chain_b:
            raise ValueError("swap requires two distinct chains")
        if self.fee < 0:
            raise ValueError("fee must be non-negative")


def htlc_script(digest: bytes, claimant: bytes, refund_a: bytes, refund_b: bytes) -> SpendCondition:
    """Escrow script: hashlocked claim by one party, or a co-signed refund."""
    return Or(
        (
            And((PreimageOf(digest), SignedBy(claimant))),
            And((SignedBy(refund_a), SignedBy(refund_b))),
        )
    )


def check_compatibility(ledger_a: Ledger, ledger_b: Ledger) -> list[str]:
    """Return every compatibility violation between two chains (empty = ok).

    The swap needs the same commitment hash on both chains, timelock
    support on both, and contract-script support on both.
    """
    violations = []
    fa, fb = ledger_a.features, ledger_b.features
    if fa.hash_algo_id != fb.hash_algo_id:
        violations.append(
            f"hash function: {ledger_a.chain_id} uses {fa.hash_algo_id}, "
            f"{ledger_b.chain_id} uses {fb.hash_algo_id}"
        )
    for ledger in (ledger_a, ledger_b):
        if not ledger.features.supports_timelock:
            violations.append(f"timelock: {ledger.chain_id} does not support time locked contracts")
    for ledger in (ledger_a, ledger_b):
        if not ledger.features.supports_scripts:
            violations.append(f"scripts: {ledger.chain_id} does not support contract scripts")
    return violations


@dataclass
class SwapSession:
    """Mutable protocol state for one swap attempt.

    ``secret`` is Alice-private. ``announced_digest`` is the commitment
    Alice messaged to Bob; it equals ``commitment`` unless she lied.
    """

    params: SwapParams
    secret: bytes
    commitment: bytes
    announced_digest: bytes
    margin_a: int
    margin_b: int
    phase: Phase = Phase.INIT
    tx1: Transaction | None = None
    tx2: Transaction | None = None
    tx3: Transaction | None = None
    tx4: Transaction | None = None
    alice_claim_tx: Transaction | None = None
    bob_claim_tx: Transaction | None = None
    revealed: bytes | None = None
    tx2_cosigned: bool = False
    tx4_cosigned: bool = False
    refund_a_submitted: bool = False
    refund_b_submitted: bool = False
    refunded_a: bool = False
    refunded_b: bool = False
    _tx2_alice_sig: bytes = b""
    _tx4_bob_sig: bytes = b""
    _recorder: TraceRecorder = field(default_factory=TraceRecorder)
    _reveal_emitted: bool = False

    def _require(self, *phases: Phase) -> None:
        if self.phase not in phases:
            expected = "/".join(p.value for p in phases)
            raise WrongPhase(f"operation requires phase {expected}, session is {self.phase.value}")

    def _enter(self, phase: Phase, time: int) -> None:
        self.phase = phase
        self._recorder.emit(time, "swap", "phase", phase=phase.value)


def _fund(ledger: Ledger, owner: KeyPair, needed: int) -> tuple[tuple[TxInput, ...], int]:
    """Pick the owner's unspent outputs covering ``needed``; returns change."""
    owned = SignedBy(owner.public)
    candidates = sorted(
        (op for op, out in ledger.utxo_set.items() if out.condition == owned),
        key=lambda op: (op.tx_id, op.index),
    )
    picked: list[TxInput] = []
    total = 0
    for op in candidates:
        picked.append(TxInput(op))
        total += ledger.utxo_set[op].amount
        if total >= needed:
            return tuple(picked), total - needed
    raise InsufficientFunds(
        f"{ledger.chain_id}: need {needed} base units, own {total} in simple outputs"
    )


def _signed_by_owner(tx: Transaction, owner: KeyPair) -> Transaction:
    witness = Witness(signatures=frozenset({(owner.public, sign(owner, tx))}))
    return tx.with_witness_all(witness)


def setup(
    params: SwapParams,
    ledger_a: Ledger,
    ledger_b: Ledger,
    *,
    announced_digest: bytes | None = None,
) -> SwapSession:
    """Run the set-up phase: derive the secret, build tx1 and tx2, sign tx2.

    Nothing is broadcast. ``announced_digest`` overrides the digest Alice
    messages to Bob and exists for adversarial tests; honest sessions
    leave it None.
    """
    violations = check_compatibility(ledger_a, ledger_b)
    if violations:
        raise IncompatibleChains(violations)

    margin = params.claim_margin
    margin_a = margin if margin is not None else 2 * ledger_a.confirmation_delay
    margin_b = margin if margin is not None else 2 * ledger_b.confirmation_delay
    if params.timelock_b >= params.timelock_a:
        raise TimelockOrderingViolation(
            f"timelock_b ({params.timelock_b}) must be strictly below "
            f"timelock_a ({params.timelock_a})"
        )
    if params.timelock_b <= margin_b + ledger_b.confirmation_delay:
        raise TimelockOrderingViolation(
            f"timelock_b ({params.timelock_b}) leaves no claim window beyond the "
            f"safety margin ({margin_b}) and confirmation delay"
        )

    if ledger_a.query_balance(params.alice.public) < params.n1 + params.fee:
        raise InsufficientFunds(f"alice holds less than {params.n1 + params.fee} on {ledger_a.chain_id}")
    if ledger_b.query_balance(params.bob.public) < params.n2 + params.fee:
        raise InsufficientFunds(f"bob holds less than {params.n2 + params.fee} on {ledger_b.chain_id}")

    secret = gen_secret(params.seed)
    commitment = hash_commit(secret)
    announced = announced_digest if announced_digest is not None else commitment

    inputs, change = _fund(ledger_a, params.alice, params.n1 + params.fee)
    outputs = [
        TxOutput(
            params.n1,
            htlc_script(commitment, params.bob.public, params.alice.public, params.bob.public),
        )
    ]
    if change > 0:
        outputs.append(TxOutput(change, SignedBy(params.alice.public)))
    tx1 = _signed_by_owner(Transaction(inputs=inputs, outputs=tuple(outputs)), params.alice)

    tx2 = Transaction(
        inputs=(TxInput(Outpoint(tx1.tx_id(), 0)),),
        outputs=(TxOutput(params.n1 - params.fee, SignedBy(params.alice.public)),),
        locktime=ledger_a.clock + params.timelock_a,
    )

    session = SwapSession(
        params=params,
        secret=secret,
        commitment=commitment,
        announced_digest=announced,
        margin_a=margin_a,
        margin_b=margin_b,
        tx1=tx1,
        tx2=tx2,
        _tx2_alice_sig=sign(params.alice, tx2),
        _recorder=ledger_a.recorder,
    )
    session._enter(Phase.INIT, ledger_a.clock)
    return session


def bob_cosign_refund_a(session: SwapSession) -> SwapSession:
    """Bob countersigns Alice's refund; no ledger is touched."""
    session._require(Phase.INIT)
    params = session.params
    witness = Witness(
        signatures=frozenset(
            {
                (params.alice.public, session._tx2_alice_sig),
                (params.bob.public, sign(params.bob, session.tx2)),
            }
        )
    )
    session.tx2 = session.tx2.with_witness(0, witness)
    session.tx2_cosigned = True
    session._enter(Phase.REFUND_A_COSIGNED, 0)
    return session


def alice_commit(session: SwapSession, ledger_a: Ledger) -> SwapSession:
    """Alice broadcasts her escrow on chain A."""
    session._require(Phase.REFUND_A_COSIGNED)
    ledger_a.broadcast(session.tx1, author="alice")
    session._enter(Phase.TX1_BROADCAST, ledger_a.clock)
    return session


def bob_build_escrow(session: SwapSession, ledger_a: Ledger, ledger_b: Ledger) -> SwapSession:
    """Bob verifies Alice's confirmed escrow, then builds tx3 and tx4.

    Bob cross-checks that the on-chain escrow commits to exactly the
    digest Alice announced and to the agreed amount; a mismatch means a
    dishonest announcement and the swap must be abandoned (his coins
    never leave his wallet).
    """
    session._require(Phase.TX1_BROADCAST)
    params = session.params
    entry = ledger_a.get_confirmed(session.tx1.tx_id())
    if entry is None:
        raise Tx1NotConfirmed("alice's escrow has not confirmed on chain A")
    expected = htlc_script(
        session.announced_digest, params.bob.public, params.alice.public, params.bob.public
    )
    escrow = entry.tx.outputs[0]
    if escrow.condition != expected or escrow.amount != params.n1:
        raise DigestMismatch(
            "confirmed escrow does not match the announced digest and amount"
        )

    inputs, change = _fund(ledger_b, params.bob, params.n2 + params.fee)
    outputs = [
        TxOutput(
            params.n2,
            htlc_script(
                session.announced_digest, params.alice.public, params.alice.public, params.bob.public
            ),
        )
    ]
    if change > 0:
        outputs.append(TxOutput(change, SignedBy(params.bob.public)))
    session.tx3 = _signed_by_owner(Transaction(inputs=inputs, outputs=tuple(outputs)), params.bob)

    session.tx4 = Transaction(
        inputs=(TxInput(Outpoint(session.tx3.tx_id(), 0)),),
        outputs=(TxOutput(params.n2 - params.fee, SignedBy(params.bob.public)),),
        locktime=ledger_b.clock + params.timelock_b,
    )
    session._tx4_bob_sig = sign(params.bob, session.tx4)
    session._enter(Phase.TX3_BUILT, ledger_b.clock)
    return session


def alice_cosign_refund_b(session: SwapSession) -> SwapSession:
    """Alice countersigns Bob's refund; no ledger is touched."""
    session._require(Phase.TX3_BUILT)
    params = session.params
    witness = Witness(
        signatures=frozenset(
            {
                (params.alice.public, sign(params.alice, session.tx4)),
                (params.bob.public, session._tx4_bob_sig),
            }
        )
    )
    session.tx4 = session.tx4.with_witness(0, witness)
    session.tx4_cosigned = True
    session._enter(Phase.REFUND_B_COSIGNED, 0)
    return session


def bob_commit_escrow(session: SwapSession, ledger_b: Ledger) -> SwapSession:
    """Bob broadcasts his escrow on chain B."""
    session._require(Phase.REFUND_B_COSIGNED)
    ledger_b.broadcast(session.tx3, author="bob")
    session._enter(Phase.TX3_BROADCAST, ledger_b.clock)
    return session


def bob_build_and_commit(session: SwapSession, ledger_a: Ledger, ledger_b: Ledger) -> SwapSession:
    """Bob's whole commitment turn: verify tx1, build tx3/tx4, get the
    refund countersigned, broadcast tx3."""
    bob_build_escrow(session, ledger_a, ledger_b)
    alice_cosign_refund_b(session)
    return bob_commit_escrow(session, ledger_b)


def alice_claim(session: SwapSession, ledger_b: Ledger) -> SwapSession:
    """Alice spends Bob's escrow, revealing the secret on chain B.

    Refused once the current time is within the safety margin of Bob's
    refund locktime: claiming so late could confirm after the refund
    becomes broadcastable, and the margin keeps the two paths disjoint.
    """
    session._require(Phase.TX3_BROADCAST)
    params = session.params
    if ledger_b.get_confirmed(session.tx3.tx_id()) is None:
        raise Tx3NotConfirmed("bob's escrow has not confirmed on chain B")
    if ledger_b.clock + session.margin_b >= session.tx4.locktime:
        raise TooLate(
            f"refund window opens at {session.tx4.locktime}; "
            f"claiming at {ledger_b.clock} is inside the safety margin"
        )
    claim = Transaction(
        inputs=(TxInput(Outpoint(session.tx3.tx_id(), 0)),),
        outputs=(TxOutput(params.n2 - params.fee, SignedBy(params.alice.public)),),
    )
    witness = Witness(
        signatures=frozenset({(params.alice.public, sign(params.alice, claim))}),
        preimages=frozenset({session.secret}),
    )
    claim = claim.with_witness(0, witness)
    ledger_b.broadcast(claim, author="alice")
    session.alice_claim_tx = claim
    session.revealed = session.secret
    session._enter(Phase.ALICE_CLAIMED, ledger_b.clock)
    return session


def bob_claim(session: SwapSession, ledger_a: Ledger, ledger_b: Ledger) -> SwapSession:
    """Bob spends Alice's escrow using the secret scanned from chain B.

    Bob's knowledge of the secret comes exclusively from the confirmed
    witness on chain B; the session's private fields are never consulted.
    """
    session._require(Phase.ALICE_CLAIMED)
    params = session.params
    preimage = ledger_b.scan_witnesses(session.announced_digest)
    if preimage is None:
        raise PreimageNotRevealed("no confirmed witness on chain B opens the commitment")
    if ledger_a.clock + session.margin_a >= session.tx2.locktime:
        raise TooLate(
            f"alice's refund window opens at {session.tx2.locktime}; "
            f"claiming at {ledger_a.clock} is inside the safety margin"
        )
    claim = Transaction(
        inputs=(TxInput(Outpoint(session.tx1.tx_id(), 0)),),
        outputs=(TxOutput(params.n1 - params.fee, SignedBy(params.bob.public)),),
    )
    witness = Witness(
        signatures=frozenset({(params.bob.public, sign(params.bob, claim))}),
        preimages=frozenset({preimage}),
    )
    claim = claim.with_witness(0, witness)
    ledger_a.broadcast(claim, author="bob")
    session.bob_claim_tx = claim
    session._enter(Phase.BOB_CLAIMED, ledger_a.clock)
    return session


def _refund(
    session: SwapSession,
    ledger: Ledger,
    refund_tx: Transaction,
    funding_tx: Transaction,
    cosigned: bool,
    submitted_flag: str,
    author: str,
) -> None:
    if refund_tx is None or not cosigned:
        raise WrongPhase("refund transaction is not co-signed")
    if getattr(session, submitted_flag):
        raise WrongPhase("refund already submitted")
    escrow = Outpoint(funding_tx.tx_id(), 0)
    if ledger.get_confirmed(funding_tx.tx_id()) is None and not ledger.in_mempool(funding_tx.tx_id()):
        raise WrongPhase("escrow was never broadcast; nothing to refund")
    if ledger.get_confirmed(funding_tx.tx_id()) is not None and not ledger.is_unspent(escrow):
        raise AlreadySpent("escrow output was already claimed")
    if ledger.clock < refund_tx.locktime:
        raise TooEarly(
            f"refund locked until {refund_tx.locktime}, chain time is {ledger.clock}"
        )
    try:
        ledger.broadcast(refund_tx, author=author)
    except DoubleSpend as exc:
        raise AlreadySpent(str(exc)) from exc
    setattr(session, submitted_flag, True)


def refund_alice(session: SwapSession, ledger_a: Ledger) -> SwapSession:
    """Broadcast Alice's timelocked refund of her escrow on chain A."""
    _refund(session, ledger_a, session.tx2, session.tx1, session.tx2_cosigned,
            "refund_a_submitted", "alice")
    return session


def refund_bob(session: SwapSession, ledger_b: Ledger) -> SwapSession:
    """Broadcast Bob's timelocked refund of his escrow on chain B."""
    _refund(session, ledger_b, session.tx4, session.tx3, session.tx4_cosigned,
            "refund_b_submitted", "bob")
    return session


def poll(session: SwapSession, ledger_a: Ledger, ledger_b: Ledger) -> SwapSession:
    """Fold confirmed chain state back into the session phase.

    Call after advancing time: flips the phase to Completed once Bob's
    claim confirms, to RefundedA/RefundedB when a refund confirms (and to
    Aborted once both escrows were refunded), and emits the reveal event
    the first time the secret is publicly visible on chain B.
    """
    if session.alice_claim_tx is not None and not session._reveal_emitted:
        entry = ledger_b.get_confirmed(session.alice_claim_tx.tx_id())
        if entry is not None:
            session._reveal_emitted = True
            session._recorder.emit(
                entry.confirmed_at,
                ledger_b.chain_id,
                "reveal",
                revealed_digest=session.announced_digest.hex(),
            )
    if session.bob_claim_tx is not None and session.phase is not Phase.COMPLETED:
        if ledger_a.get_confirmed(session.bob_claim_tx.tx_id()) is not None:
            session._enter(Phase.COMPLETED, ledger_a.clock)
            return session
    if session.refund_a_submitted and not session.refunded_a:
        if ledger_a.get_confirmed(session.tx2.tx_id()) is not None:
            session.refunded_a = True
            session._enter(Phase.REFUNDED_A, ledger_a.clock)
    if session.refund_b_submitted and not session.refunded_b:
        if ledger_b.get_confirmed(session.tx4.tx_id()) is not None:
            session.refunded_b = True
            session._enter(Phase.REFUNDED_B, ledger_b.clock)
    if session.refunded_a and session.refunded_b and session.phase is not Phase.ABORTED:
        session._enter(Phase.ABORTED, max(ledger_a.clock, ledger_b.clock))
    return session
