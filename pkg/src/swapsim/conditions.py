"""Hashlock and signature primitives plus the spend-condition predicate tree.

A spend condition is a small predicate over a witness: either a signature
check against a public key, a hash-preimage check against a committed
digest, or an And/Or composition of those. Evaluating a condition is pure
and never raises; a malformed witness simply evaluates to false.

Signatures here are deliberately a toy scheme for simulation only. A
"signature" is the SHA-256 of a domain tag, the signer's secret, and the
message digest, and verification recomputes it by looking the secret up in
a key registry. This is NOT cryptographically secure and must never leave
a simulation: it preserves exactly the properties the protocol logic needs
(a signature binds one key to one message) while staying deterministic and
dependency free.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

DIGEST_SIZE = 32
MAX_CONDITION_DEPTH = 8


class ConditionError(Exception):
    """Malformed condition tree or key material."""


class UnknownKey(ConditionError):
    """A public key was verified against a registry that never issued it."""


class KeyCollision(ConditionError):
    """Two distinct secrets mapped to the same public key."""


def _sha256(*parts: bytes) -> bytes:
    h = hashlib.sha256()
    for part in parts:
        h.update(part)
    return h.digest()


def hash_commit(preimage: bytes) -> bytes:
    """SHA-256 commitment digest of a 32-byte preimage.

    Both simulated chains use this same function, which is what makes a
    preimage revealed on one chain usable on the other.
    """
    if len(preimage) != DIGEST_SIZE:
        raise ValueError(f"preimage must be {DIGEST_SIZE} bytes, got {len(preimage)}")
    return _sha256(preimage)


def gen_secret(seed: int) -> bytes:
    """Derive a 32-byte secret from a 64-bit seed.

    Derivation is SHA-256 over the tag ``b"xseed"`` and the big-endian
    seed, so runs are reproducible across platforms and sessions without
    any global RNG state.
    """
    return _sha256(b"xseed", seed.to_bytes(8, "big"))


@dataclass(frozen=True)
class KeyPair:
    """A toy keypair: ``public`` is a hash of ``secret``."""

    secret: bytes
    public: bytes


class KeyRegistry:
    """Issues keypairs and resolves public keys back to secrets.

    The registry is what stands in for real asymmetric verification: only
    keys issued (or registered) here can be verified against. One registry
    is shared by all ledgers of a simulation world.
    """

    def __init__(self) -> None:
        self._secrets: dict[bytes, bytes] = {}

    def register(self, secret: bytes) -> KeyPair:
        if len(secret) != DIGEST_SIZE:
            raise ConditionError(f"secret must be {DIGEST_SIZE} bytes")
        public = _sha256(b"pk", secret)
        known = self._secrets.get(public)
        if known is not None and known != secret:
            raise KeyCollision(f"public key collision for {public.hex()}")
        self._secrets[public] = secret
        return KeyPair(secret=secret, public=public)

    def generate(self, seed: int) -> KeyPair:
        """Deterministically derive and register a keypair from a seed."""
        return self.register(_sha256(b"kseed", seed.to_bytes(8, "big")))

    def secret_for(self, public: bytes) -> bytes:
        try:
            return self._secrets[public]
        except KeyError:
            raise UnknownKey(f"unregistered public key {public.hex()}") from None

    def knows(self, public: bytes) -> bool:
        return public in self._secrets


def sign_digest(key: KeyPair, digest: bytes) -> bytes:
    """Toy signature over a message digest."""
    return _sha256(b"sig", key.secret, digest)


def verify_digest(public: bytes, digest: bytes, signature: bytes, keys: KeyRegistry) -> bool:
    """Check a toy signature by recomputing it from the registered secret.

    Raises UnknownKey for a public key the registry never issued.
    """
    secret = keys.secret_for(public)
    return _sha256(b"sig", secret, digest) == signature


@dataclass(frozen=True)
class SignedBy:
    """Satisfied by a verifying signature from ``key`` over the spending tx."""

    key: bytes


@dataclass(frozen=True)
class PreimageOf:
    """Satisfied by a 32-byte value whose commitment equals ``digest``."""

    digest: bytes


@dataclass(frozen=True)
class And:
    clauses: tuple["SpendCondition", ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "clauses", tuple(self.clauses))
        _check_composite(self)


@dataclass(frozen=True)
class Or:
    clauses: tuple["SpendCondition", ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "clauses", tuple(self.clauses))
        _check_composite(self)


SpendCondition = SignedBy | PreimageOf | And | Or


def condition_depth(cond: SpendCondition) -> int:
    if isinstance(cond, (SignedBy, PreimageOf)):
        return 1
    return 1 + max(condition_depth(c) for c in cond.clauses)


def _check_composite(cond: And | Or) -> None:
    if not cond.clauses:
        raise ConditionError("And/Or requires at least one clause")
    if condition_depth(cond) > MAX_CONDITION_DEPTH:
        raise ConditionError(f"condition tree deeper than {MAX_CONDITION_DEPTH}")


@dataclass(frozen=True)
class Witness:
    """Claim data attached to a transaction input.

    ``signatures`` holds (public key, signature) pairs and ``preimages``
    holds candidate hashlock openings. Sets are unordered; canonical
    serialization sorts them. Malformed entries are representable on
    purpose so that evaluation can reject them as false instead of
    trapping.
    """

    signatures: frozenset[tuple[bytes, bytes]] = field(default_factory=frozenset)
    preimages: frozenset[bytes] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "signatures", frozenset(self.signatures))
        object.__setattr__(self, "preimages", frozenset(self.preimages))


EMPTY_WITNESS = Witness()


def evaluate_condition(
    cond: SpendCondition, witness: Witness, sighash: bytes, keys: KeyRegistry
) -> bool:
    """Evaluate a condition against a witness and the spending tx's sighash.

    Pure: mutates nothing, never raises. Unknown keys, wrong-size
    preimages, and bogus signatures all evaluate to false.
    """
    if isinstance(cond, SignedBy):
        for public, signature in witness.signatures:
            if public != cond.key:
                continue
            try:
                if verify_digest(public, sighash, signature, keys):
                    return True
            except UnknownKey:
                continue
        return False
    if isinstance(cond, PreimageOf):
        for preimage in witness.preimages:
            if len(preimage) == DIGEST_SIZE and hash_commit(preimage) == cond.digest:
                return True
        return False
    if isinstance(cond, And):
        return all(evaluate_condition(c, witness, sighash, keys) for c in cond.clauses)
    if isinstance(cond, Or):
        return any(evaluate_condition(c, witness, sighash, keys) for c in cond.clauses)
    raise ConditionError(f"unknown condition node {cond!r}")
