"""Two-party payment channels and the cross-channel swap.

A channel locks capacity on-chain under a 2-of-2 output and then evolves
entirely off-chain through numbered, co-signed balance states. A hashlock
can be carved out of one side's balance (add), then either paid over on
presentation of the preimage (fulfill) or returned after expiry (fail).
Only the funding transaction and the final settlement ever touch the
ledger, however many state updates happen in between.

Swapping across two channels reuses the on-chain escrow idea in channel
form: the same digest locks an offer in each channel, with the offer
toward the secret holder expiring sooner, so revealing the preimage to
collect one side hands the counterparty exactly what it needs to collect
the other.
"""

from __future__ import annotations

from dataclasses import dataclass

from .chain import DAY, Ledger
from .conditions import And, DIGEST_SIZE, KeyPair, SignedBy, Witness, _sha256, hash_commit
from .conditions import gen_secret, sign_digest, verify_digest
from .tx import Outpoint, Transaction, TxInput, TxOutput, _u32, _u64, sign


class ChannelError(Exception):
    pass


class ZeroCapacity(ChannelError):
    pass


class InsufficientChannelBalance(ChannelError):
    pass


class HtlcAlreadyPending(ChannelError):
    pass


class NoPendingHtlc(ChannelError):
    pass


class WrongPreimage(ChannelError):
    pass


class HtlcNotExpired(ChannelError):
    pass


class HtlcExpired(ChannelError):
    pass


class PendingHtlc(ChannelError):
    """Close refused while an HTLC is unresolved."""


class StaleState(ChannelError):
    """Replay of an old (or otherwise non-successor) channel state."""


class ChannelClosed(ChannelError):
    pass


A_TO_B = "a_to_b"
B_TO_A = "b_to_a"


@dataclass(frozen=True)
class Htlc:
    digest: bytes
    amount: int
    direction: str  # A_TO_B: party a offers; B_TO_A: party b offers
    expiry: int

    def __post_init__(self) -> None:
        if self.amount <= 0:
            raise ChannelError("htlc amount must be positive")
        if self.direction not in (A_TO_B, B_TO_A):
            raise ChannelError(f"unknown htlc direction {self.direction!r}")


@dataclass(frozen=True)
class ChannelState:
    seq: int
    balance_a: int
    balance_b: int
    htlc: Htlc | None
    sig_a: bytes = b""
    sig_b: bytes = b""


def _state_digest(chain_id: str, funding: Outpoint, state: ChannelState) -> bytes:
    payload = chain_id.encode("ascii") + funding.tx_id + _u32(funding.index)
    payload += _u64(state.seq) + _u64(state.balance_a) + _u64(state.balance_b)
    if state.htlc is None:
        payload += b"\x00"
    else:
        payload += (
            b"\x01"
            + state.htlc.digest
            + _u64(state.htlc.amount)
            + state.htlc.direction.encode("ascii")
            + _u64(state.htlc.expiry)
        )
    return _sha256(b"chanstate", payload)


class Channel:
    """One funded two-party channel; a single-threaded state machine."""

    def __init__(
        self,
        chain_id: str,
        funding_outpoint: Outpoint,
        party_a: KeyPair,
        party_b: KeyPair,
        balance_a: int,
        balance_b: int,
    ) -> None:
        self.chain_id = chain_id
        self.funding_outpoint = funding_outpoint
        self.party_a = party_a
        self.party_b = party_b
        self.capacity = balance_a + balance_b
        self.closed = False
        self.revealed_preimage: bytes | None = None
        self.current = self._cosign(
            ChannelState(seq=0, balance_a=balance_a, balance_b=balance_b, htlc=None)
        )

    # -- views --------------------------------------------------------------

    @property
    def state_seq(self) -> int:
        return self.current.seq

    @property
    def balances(self) -> tuple[int, int]:
        return (self.current.balance_a, self.current.balance_b)

    @property
    def pending_htlc(self) -> Htlc | None:
        return self.current.htlc

    def parties(self) -> tuple[bytes, bytes]:
        return (self.party_a.public, self.party_b.public)

    # -- state machine --------------------------------------------------------

    def _cosign(self, state: ChannelState) -> ChannelState:
        digest = _state_digest(self.chain_id, self.funding_outpoint, state)
        return ChannelState(
            seq=state.seq,
            balance_a=state.balance_a,
            balance_b=state.balance_b,
            htlc=state.htlc,
            sig_a=sign_digest(self.party_a, digest),
            sig_b=sign_digest(self.party_b, digest),
        )

    def apply_state(self, state: ChannelState, keys=None) -> None:
        """Adopt a proposed successor state after validating it.

        Rejects anything but the direct successor (strictly increasing
        seq), a balance sheet that breaks conservation, or missing or
        invalid co-signatures.
        """
        if self.closed:
            raise ChannelClosed("channel already settled on-chain")
        if state.seq != self.current.seq + 1:
            raise StaleState(
                f"state seq {state.seq} is not the successor of {self.current.seq}"
            )
        pending = state.htlc.amount if state.htlc is not None else 0
        if state.balance_a < 0 or state.balance_b < 0:
            raise ChannelError("negative channel balance")
        if state.balance_a + state.balance_b + pending != self.capacity:
            raise ChannelError("channel state does not conserve capacity")
        digest = _state_digest(self.chain_id, self.funding_outpoint, state)
        if keys is not None:
            if not verify_digest(self.party_a.public, digest, state.sig_a, keys):
                raise ChannelError("party a signature invalid")
            if not verify_digest(self.party_b.public, digest, state.sig_b, keys):
                raise ChannelError("party b signature invalid")
        else:
            if sign_digest(self.party_a, digest) != state.sig_a:
                raise ChannelError("party a signature invalid")
            if sign_digest(self.party_b, digest) != state.sig_b:
                raise ChannelError("party b signature invalid")
        self.current = state


def open_channel(
    ledger: Ledger,
    party_a: KeyPair,
    party_b: KeyPair,
    contrib_a: int,
    contrib_b: int,
) -> Channel:
    """Fund a channel on-chain from both parties' simple outputs.

    Broadcasts exactly one funding transaction; the caller advances the
    ledger to confirm it. Initial balances equal the contributions.
    """
    capacity = contrib_a + contrib_b
    if capacity <= 0:
        raise ZeroCapacity("channel needs a positive capacity")

    inputs: list[TxInput] = []
    owners: list[KeyPair] = []
    change: list[TxOutput] = []
    for party, contrib in ((party_a, contrib_a), (party_b, contrib_b)):
        if contrib == 0:
            continue
        owned = SignedBy(party.public)
        picked = []
        total = 0
        for op in sorted(
            (op for op, out in ledger.utxo_set.items() if out.condition == owned),
            key=lambda op: (op.tx_id, op.index),
        ):
            picked.append(op)
            total += ledger.utxo_set[op].amount
            if total >= contrib:
                break
        if total < contrib:
            raise InsufficientChannelBalance(
                f"{ledger.chain_id}: contribution {contrib} exceeds on-chain funds {total}"
            )
        for op in picked:
            inputs.append(TxInput(op))
            owners.append(party)
        if total > contrib:
            change.append(TxOutput(total - contrib, SignedBy(party.public)))

    funding_condition = And((SignedBy(party_a.public), SignedBy(party_b.public)))
    funding = Transaction(
        inputs=tuple(inputs),
        outputs=tuple([TxOutput(capacity, funding_condition)] + change),
    )
    for index, owner in enumerate(owners):
        witness = Witness(signatures=frozenset({(owner.public, sign(owner, funding))}))
        funding = funding.with_witness(index, witness)
    funding_id = ledger.broadcast(funding, author="channel")
    return Channel(
        chain_id=ledger.chain_id,
        funding_outpoint=Outpoint(funding_id, 0),
        party_a=party_a,
        party_b=party_b,
        balance_a=contrib_a,
        balance_b=contrib_b,
    )


def _emit(channel: Channel, ledger: Ledger | None, now: int, op: str) -> None:
    if ledger is not None:
        ledger.recorder.emit(
            now,
            channel.chain_id,
            "channel",
            detail=f"{op} seq={channel.state_seq}",
        )


def add_htlc(
    channel: Channel,
    digest: bytes,
    amount: int,
    expiry: int,
    direction: str = A_TO_B,
    *,
    now: int = 0,
    ledger: Ledger | None = None,
) -> Channel:
    """Carve ``amount`` out of the offerer's balance behind a hashlock."""
    if channel.pending_htlc is not None:
        raise HtlcAlreadyPending("one pending hashlock per channel")
    if len(digest) != DIGEST_SIZE:
        raise ChannelError("digest must be 32 bytes")
    bal_a, bal_b = channel.balances
    htlc = Htlc(digest=digest, amount=amount, direction=direction, expiry=expiry)
    if direction == A_TO_B:
        if bal_a < amount:
            raise InsufficientChannelBalance(f"offerer holds {bal_a}, needs {amount}")
        bal_a -= amount
    else:
        if bal_b < amount:
            raise InsufficientChannelBalance(f"offerer holds {bal_b}, needs {amount}")
        bal_b -= amount
    state = channel._cosign(
        ChannelState(seq=channel.state_seq + 1, balance_a=bal_a, balance_b=bal_b, htlc=htlc)
    )
    channel.apply_state(state)
    _emit(channel, ledger, now, "add_htlc")
    return channel


def fulfill_htlc(
    channel: Channel, preimage: bytes, now: int, *, ledger: Ledger | None = None
) -> Channel:
    """Pay the pending hashlock to its recipient against the right preimage.

    The revealed preimage becomes visible to both parties (it is part of
    the co-signed state update), which is what links two channels into an
    all-or-nothing swap.
    """
    htlc = channel.pending_htlc
    if htlc is None:
        raise NoPendingHtlc("nothing to fulfill")
    if len(preimage) != DIGEST_SIZE or hash_commit(preimage) != htlc.digest:
        raise WrongPreimage("preimage does not open the hashlock")
    if now >= htlc.expiry:
        raise HtlcExpired(f"hashlock expired at {htlc.expiry}, now {now}")
    bal_a, bal_b = channel.balances
    if htlc.direction == A_TO_B:
        bal_b += htlc.amount
    else:
        bal_a += htlc.amount
    state = channel._cosign(
        ChannelState(seq=channel.state_seq + 1, balance_a=bal_a, balance_b=bal_b, htlc=None)
    )
    channel.apply_state(state)
    channel.revealed_preimage = preimage
    _emit(channel, ledger, now, "fulfill_htlc")
    return channel


def fail_htlc(channel: Channel, now: int, *, ledger: Ledger | None = None) -> Channel:
    """Return an expired hashlock to its offerer (allowed exactly at expiry)."""
    htlc = channel.pending_htlc
    if htlc is None:
        raise NoPendingHtlc("nothing to fail")
    if now < htlc.expiry:
        raise HtlcNotExpired(f"hashlock live until {htlc.expiry}, now {now}")
    bal_a, bal_b = channel.balances
    if htlc.direction == A_TO_B:
        bal_a += htlc.amount
    else:
        bal_b += htlc.amount
    state = channel._cosign(
        ChannelState(seq=channel.state_seq + 1, balance_a=bal_a, balance_b=bal_b, htlc=None)
    )
    channel.apply_state(state)
    _emit(channel, ledger, now, "fail_htlc")
    return channel


def swap_across_channels(
    chan_a: Channel,
    chan_b: Channel,
    n1: int,
    n2: int,
    seed: int,
    *,
    now: int = 0,
    expiry_long: int | None = None,
    expiry_short: int | None = None,
) -> tuple[Channel, Channel]:
    """Atomically swap n1 in ``chan_a`` for n2 in ``chan_b``, all off-chain.

    One secret locks both offers; the offer toward the secret holder
    (party a) expires sooner, mirroring the on-chain timelock asymmetry.
    Zero ledger transactions are produced.
    """
    if set(chan_a.parties()) != set(chan_b.parties()):
        raise ChannelError("cross-channel swap requires the same two parties")
    long_expiry = expiry_long if expiry_long is not None else now + 2 * DAY
    short_expiry = expiry_short if expiry_short is not None else now + 1 * DAY
    if short_expiry >= long_expiry:
        raise ChannelError("the secret holder's inbound offer must expire first")
    secret = gen_secret(seed)
    digest = hash_commit(secret)
    add_htlc(chan_a, digest, n1, long_expiry, A_TO_B, now=now)
    add_htlc(chan_b, digest, n2, short_expiry, B_TO_A, now=now)
    fulfill_htlc(chan_b, secret, now)
    learned = chan_b.revealed_preimage
    fulfill_htlc(chan_a, learned, now)
    return chan_a, chan_b


def close_channel(channel: Channel, ledger: Ledger, fee: int = 0) -> bytes:
    """Settle the latest co-signed balances in one on-chain transaction.

    Refused while a hashlock is pending; resolve or expire it first. Any
    configured fee comes out of the larger payout.
    """
    if channel.closed:
        raise ChannelClosed("channel already settled on-chain")
    if channel.pending_htlc is not None:
        raise PendingHtlc("resolve the pending hashlock before closing")
    bal_a, bal_b = channel.balances
    if fee:
        if bal_a >= bal_b:
            bal_a -= fee
        else:
            bal_b -= fee
    outputs = []
    if bal_a > 0:
        outputs.append(TxOutput(bal_a, SignedBy(channel.party_a.public)))
    if bal_b > 0:
        outputs.append(TxOutput(bal_b, SignedBy(channel.party_b.public)))
    settlement = Transaction(inputs=(TxInput(channel.funding_outpoint),), outputs=tuple(outputs))
    witness = Witness(
        signatures=frozenset(
            {
                (channel.party_a.public, sign(channel.party_a, settlement)),
                (channel.party_b.public, sign(channel.party_b, settlement)),
            }
        )
    )
    settlement = settlement.with_witness(0, witness)
    tx_id = ledger.broadcast(settlement, author="channel")
    channel.closed = True
    return tx_id
