"""Transactions, outpoints, and the canonical byte serialization.

The byte layout is length-prefixed big-endian concatenation in field
declaration order (documented in the README so digests are reproducible):

    tx        := u32 n_inputs  input*
                 u32 n_outputs output*
                 u64 locktime  u64 nonce
    input     := outpoint witness
    outpoint  := bytes32 tx_id  u32 index
    witness   := u32 n_sigs  (u32 len pub, pub, u32 len sig, sig)*  sorted
                 u32 n_pre   (u32 len, preimage)*                   sorted
    output    := u64 amount  condition
    condition := u8 tag  payload
                 tag 1 SignedBy:   bytes32 key
                 tag 2 PreimageOf: bytes32 digest
                 tag 3 And, 4 Or:  u32 n  condition*

``tx_id`` is the SHA-256 of the full serialization including witnesses.
``sighash`` is the SHA-256 of the serialization with every witness
replaced by an empty one, so a co-signer can sign a transaction before
any witness exists and the signature stays valid once witnesses are
attached.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .conditions import (
    And,
    EMPTY_WITNESS,
    KeyPair,
    KeyRegistry,
    Or,
    PreimageOf,
    SignedBy,
    SpendCondition,
    Witness,
    _sha256,
    evaluate_condition,
    sign_digest,
    verify_digest,
)

MAX_AMOUNT = 2**63  # fits u64 with headroom; amounts are checked on construction
COIN = 10**8  # base units per whole coin


def _u8(v: int) -> bytes:
    return v.to_bytes(1, "big")


def _u32(v: int) -> bytes:
    return v.to_bytes(4, "big")


def _u64(v: int) -> bytes:
    return v.to_bytes(8, "big")


def _blob(b: bytes) -> bytes:
    return _u32(len(b)) + b


@dataclass(frozen=True)
class Outpoint:
    """Reference to one output of a confirmed transaction."""

    tx_id: bytes
    index: int

    def __post_init__(self) -> None:
        if len(self.tx_id) != 32:
            raise ValueError("outpoint tx_id must be 32 bytes")
        if self.index < 0:
            raise ValueError("outpoint index must be non-negative")


@dataclass(frozen=True)
class TxOutput:
    amount: int
    condition: SpendCondition

    def __post_init__(self) -> None:
        if not isinstance(self.amount, int) or isinstance(self.amount, bool):
            raise ValueError("amount must be an integer in base units")
        if self.amount <= 0:
            raise ValueError("output amount must be positive")
        if self.amount >= MAX_AMOUNT:
            raise ValueError("output amount overflows the checked range")


@dataclass(frozen=True)
class TxInput:
    outpoint: Outpoint
    witness: Witness = EMPTY_WITNESS


@dataclass(frozen=True)
class Transaction:
    inputs: tuple[TxInput, ...] = ()
    outputs: tuple[TxOutput, ...] = ()
    locktime: int = 0  # absolute time; 0 means no locktime
    nonce: int = 0  # uniquifier for otherwise identical transactions

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if self.locktime < 0:
            raise ValueError("locktime must be non-negative")
        if self.nonce < 0:
            raise ValueError("nonce must be non-negative")

    def tx_id(self) -> bytes:
        return _sha256(serialize_tx(self, include_witnesses=True))

    def with_witness(self, index: int, witness: Witness) -> "Transaction":
        """Return a copy with ``witness`` attached to input ``index``."""
        inputs = list(self.inputs)
        inputs[index] = dataclasses.replace(inputs[index], witness=witness)
        return dataclasses.replace(self, inputs=tuple(inputs))

    def with_witness_all(self, witness: Witness) -> "Transaction":
        inputs = tuple(dataclasses.replace(i, witness=witness) for i in self.inputs)
        return dataclasses.replace(self, inputs=inputs)


def serialize_condition(cond: SpendCondition) -> bytes:
    if isinstance(cond, SignedBy):
        return _u8(1) + cond.key
    if isinstance(cond, PreimageOf):
        return _u8(2) + cond.digest
    if isinstance(cond, And):
        return _u8(3) + _u32(len(cond.clauses)) + b"".join(map(serialize_condition, cond.clauses))
    if isinstance(cond, Or):
        return _u8(4) + _u32(len(cond.clauses)) + b"".join(map(serialize_condition, cond.clauses))
    raise TypeError(f"unserializable condition {cond!r}")


def serialize_witness(witness: Witness) -> bytes:
    sigs = sorted(witness.signatures)
    pres = sorted(witness.preimages)
    out = _u32(len(sigs))
    for public, signature in sigs:
        out += _blob(public) + _blob(signature)
    out += _u32(len(pres))
    for preimage in pres:
        out += _blob(preimage)
    return out


def serialize_tx(tx: Transaction, include_witnesses: bool = True) -> bytes:
    out = _u32(len(tx.inputs))
    for txin in tx.inputs:
        out += txin.outpoint.tx_id + _u32(txin.outpoint.index)
        out += serialize_witness(txin.witness if include_witnesses else EMPTY_WITNESS)
    out += _u32(len(tx.outputs))
    for txout in tx.outputs:
        out += _u64(txout.amount) + serialize_condition(txout.condition)
    out += _u64(tx.locktime) + _u64(tx.nonce)
    return out


def sighash(tx: Transaction) -> bytes:
    """Digest a signature commits to: the tx with all witnesses zeroed."""
    return _sha256(serialize_tx(tx, include_witnesses=False))


def sign(key: KeyPair, tx: Transaction) -> bytes:
    return sign_digest(key, sighash(tx))


def verify(public: bytes, tx: Transaction, signature: bytes, keys: KeyRegistry) -> bool:
    """Verify a signature over ``tx``. Raises UnknownKey for foreign keys."""
    return verify_digest(public, sighash(tx), signature, keys)


def evaluate(cond: SpendCondition, witness: Witness, tx: Transaction, keys: KeyRegistry) -> bool:
    """Evaluate a spend condition against a witness for a spending tx."""
    return evaluate_condition(cond, witness, sighash(tx), keys)
