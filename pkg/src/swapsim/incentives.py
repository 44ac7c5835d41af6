"""Deposit, spam-fee, and reputation bookkeeping around a swap.

Mirrors the incentive layer of early swap marketplaces: each party posts
a security deposit of 112.5% of the amount it trades, pays an optional
flat anti-spam fee at initiation, and carries a running reputation score.
Deposits come back on honest completion; a deviating party forfeits its
deposit to the counterparty and loses a reputation point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .trace import SWAP_COMPLETED, ScenarioTrace

DEPOSIT_NUMERATOR = 1125
DEPOSIT_DENOMINATOR = 1000
MAX_DEPOSIT = 2**64


def compute_deposit(trade: int) -> int:
    """Security deposit for a trade: 112.5% of the amount, rounded up.

    Ceiling rounding protects the counterparty. Integer arithmetic only.
    """
    if trade < 0:
        raise ValueError("trade amount must be non-negative")
    deposit = -(-trade * DEPOSIT_NUMERATOR // DEPOSIT_DENOMINATOR)
    if deposit >= MAX_DEPOSIT:
        raise OverflowError("deposit exceeds the representable amount range")
    return deposit


@dataclass
class PartyIncentives:
    deposit_held: int = 0  # posted and not yet settled
    deposit_posted: int = 0  # lifetime total posted
    deposit_returned: int = 0
    forfeit_received: int = 0
    fees_paid: int = 0
    reputation: int = 0


@dataclass
class IncentiveLedger:
    parties: dict[str, PartyIncentives] = field(default_factory=dict)

    @classmethod
    def open_swap(cls, trades: dict[str, int]) -> "IncentiveLedger":
        """Post each party's deposit for the amount it is trading."""
        ledger = cls()
        for party, amount in trades.items():
            deposit = compute_deposit(amount)
            ledger.parties[party] = PartyIncentives(
                deposit_held=deposit, deposit_posted=deposit
            )
        return ledger

    def conservation_gap(self) -> int:
        """Posted minus (returned + forfeited + still held); zero when sound."""
        posted = sum(p.deposit_posted for p in self.parties.values())
        settled = sum(
            p.deposit_returned + p.forfeit_received + p.deposit_held
            for p in self.parties.values()
        )
        return posted - settled


def charge_spam_fee(incentives: IncentiveLedger, party: str, fee: int) -> IncentiveLedger:
    """Debit the flat anti-spam fee at swap initiation (zero is a no-op)."""
    if fee < 0:
        raise ValueError("fee must be non-negative")
    if fee:
        incentives.parties.setdefault(party, PartyIncentives()).fees_paid += fee
    return incentives


def settle_incentives(incentives: IncentiveLedger, trace: ScenarioTrace) -> IncentiveLedger:
    """Resolve deposits and reputation from a finished trace.

    Completion returns both deposits and awards +1 reputation to each
    party. Otherwise, the party that owned the first skipped step (the
    trace's ``deviant``) forfeits its deposit to the counterparty and
    drops one reputation point; the counterparty's deposit is returned.
    """
    names = list(incentives.parties)
    if trace.verdict.kind == SWAP_COMPLETED:
        for entry in incentives.parties.values():
            entry.deposit_returned += entry.deposit_held
            entry.deposit_held = 0
            entry.reputation += 1
        return incentives
    deviant = trace.deviant
    for name in names:
        entry = incentives.parties[name]
        if name == deviant:
            counterparties = [n for n in names if n != name]
            share = entry.deposit_held // len(counterparties) if counterparties else 0
            for other in counterparties:
                incentives.parties[other].forfeit_received += share
            entry.deposit_held -= share * len(counterparties)
            # any indivisible remainder goes back to the deviant
            entry.deposit_returned += entry.deposit_held
            entry.deposit_held = 0
            entry.reputation -= 1
        else:
            entry.deposit_returned += entry.deposit_held
            entry.deposit_held = 0
    return incentives
