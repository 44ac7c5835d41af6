"""Illustrative model of the 2012-era escrow-and-prove swap.

This is NOT a faithful reconstruction of the original proposal, whose
exact message sequence was never fully specified; it is the smallest
model that makes the known asymmetry concrete. Alice's leg is
irreversible: she escrows her coins on chain A into an output releasable
to Bob only against proof of his chain-B payment, and the escrow has no
refund branch. An honest Bob pays, proves, and collects; a denying Bob
simply walks away, leaving Alice's escrow stranded past the proof
deadline while his own balance never moved.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

from .chain import Ledger
from .conditions import And, KeyPair, SignedBy, Witness
from .trace import TraceRecorder
from .tx import Outpoint, Transaction, TxInput, TxOutput, sign

HONEST = "honest"
DENY = "deny"


@dataclass(frozen=True)
class TradeXOffer:
    alice_amount: int  # escrowed by Alice on chain A
    bob_amount: int  # owed by Bob on chain B
    proof_deadline: int  # latest chain-B time an acceptable payment may confirm

    def __post_init__(self) -> None:
        if self.alice_amount <= 0 or self.bob_amount <= 0:
            raise ValueError("trade amounts must be positive")


def _simple_payment(ledger: Ledger, payer: KeyPair, payee: bytes, amount: int) -> Transaction:
    owned = SignedBy(payer.public)
    picked: list[TxInput] = []
    total = 0
    for op in sorted(
        (op for op, out in ledger.utxo_set.items() if out.condition == owned),
        key=lambda op: (op.tx_id, op.index),
    ):
        picked.append(TxInput(op))
        total += ledger.utxo_set[op].amount
        if total >= amount:
            break
    if total < amount:
        raise ValueError(f"{ledger.chain_id}: payer owns {total}, needs {amount}")
    outputs = [TxOutput(amount, SignedBy(payee))]
    if total > amount:
        outputs.append(TxOutput(total - amount, SignedBy(payer.public)))
    tx = Transaction(inputs=tuple(picked), outputs=tuple(outputs))
    witness = Witness(signatures=frozenset({(payer.public, sign(payer, tx))}))
    return tx.with_witness_all(witness)


def _payment_proof_valid(
    ledger_b: Ledger, proof_tx_id: bytes, payee: bytes, amount: int, deadline: int
) -> bool:
    """Check the claimed chain-B payment: confirmed, in time, enough, to Alice."""
    entry = ledger_b.get_confirmed(proof_tx_id)
    if entry is None or entry.confirmed_at > deadline:
        return False
    paid = sum(
        out.amount for out in entry.tx.outputs if out.condition == SignedBy(payee)
    )
    return paid >= amount


def run_p2ptradex(
    offer: TradeXOffer,
    bob_strategy: str,
    ledger_a: Ledger,
    ledger_b: Ledger,
    alice: KeyPair,
    bob: KeyPair,
    recorder: TraceRecorder | None = None,
) -> dict[str, dict[str, int]]:
    """Run the baseline swap and return per-party, per-chain balance deltas.

    Operates on deep copies; the input ledgers are left untouched.
    ``bob_strategy`` is "honest" or "deny".
    """
    if bob_strategy not in (HONEST, DENY):
        raise ValueError(f"unknown strategy {bob_strategy!r}")
    la = copy.deepcopy(ledger_a)
    lb = copy.deepcopy(ledger_b)
    rec = recorder or TraceRecorder()
    la.recorder = rec
    lb.recorder = rec

    parties = {"alice": alice.public, "bob": bob.public}
    chains = {la.chain_id: la, lb.chain_id: lb}

    def snapshot() -> dict[str, dict[str, int]]:
        return {
            name: {cid: ledger.query_balance(pub) for cid, ledger in chains.items()}
            for name, pub in parties.items()
        }

    initial = snapshot()

    # Alice's irreversible leg: escrow with no refund branch. The single-key
    # And wrapper keeps it a contract output rather than Bob's plain balance;
    # release is gated below on a verified payment proof, not by the script.
    escrow_condition = And((SignedBy(bob.public),))
    owned = SignedBy(alice.public)
    picked: list[TxInput] = []
    total = 0
    for op in sorted(
        (op for op, out in la.utxo_set.items() if out.condition == owned),
        key=lambda op: (op.tx_id, op.index),
    ):
        picked.append(TxInput(op))
        total += la.utxo_set[op].amount
        if total >= offer.alice_amount:
            break
    if total < offer.alice_amount:
        raise ValueError("alice cannot fund the escrow")
    outputs = [TxOutput(offer.alice_amount, escrow_condition)]
    if total > offer.alice_amount:
        outputs.append(TxOutput(total - offer.alice_amount, SignedBy(alice.public)))
    escrow_tx = Transaction(inputs=tuple(picked), outputs=tuple(outputs))
    escrow_tx = escrow_tx.with_witness_all(
        Witness(signatures=frozenset({(alice.public, sign(alice, escrow_tx))}))
    )
    escrow_id = la.broadcast(escrow_tx, author="alice")
    la.advance_time(la.confirmation_delay)
    lb.advance_time(la.confirmation_delay)

    if bob_strategy == HONEST:
        payment = _simple_payment(lb, bob, alice.public, offer.bob_amount)
        proof_id = lb.broadcast(payment, author="bob")
        lb.advance_time(lb.confirmation_delay)
        la.advance_time(lb.confirmation_delay)
        if not _payment_proof_valid(lb, proof_id, alice.public, offer.bob_amount, offer.proof_deadline):
            raise AssertionError("honest payment failed its own proof check")
        release = Transaction(
            inputs=(TxInput(Outpoint(escrow_id, 0)),),
            outputs=(TxOutput(offer.alice_amount, SignedBy(bob.public)),),
        )
        release = release.with_witness(
            0, Witness(signatures=frozenset({(bob.public, sign(bob, release))}))
        )
        la.broadcast(release, author="bob")
        la.advance_time(la.confirmation_delay)
        lb.advance_time(la.confirmation_delay)
    else:
        # Bob denies: no payment, no proof, and the escrow has no refund
        # path, so it stays stranded past the deadline.
        past_deadline = max(0, offer.proof_deadline + 1 - la.clock)
        la.advance_time(past_deadline)
        lb.advance_time(past_deadline)
        rec.emit(
            lb.clock,
            lb.chain_id,
            "note",
            detail="proof deadline passed with no payment; escrow stranded",
        )

    final = snapshot()
    return {
        name: {cid: final[name][cid] - initial[name][cid] for cid in chains}
        for name in parties
    }
