"""swapsim: a deterministic simulator for cross-chain atomic swaps.

Two toy UTXO ledgers with logical clocks, the hashlock-and-timelock swap
protocol as an explicit state machine, an exhaustive abandonment-point
harness that checks the all-or-nothing property, a deliberately flawed
escrow-only baseline for contrast, and a payment-channel variant where
only funding and settlement touch the chains.
"""

from .chain import (
    ChainError,
    ChainFeatures,
    DoubleSpend,
    DuplicateChain,
    Ledger,
    LocktimeNotSupported,
    UnknownOutpoint,
    ValueCreated,
    WitnessRejected,
    World,
    create_ledger,
)
from .channels import (
    Channel,
    ChannelError,
    add_htlc,
    close_channel,
    fail_htlc,
    fulfill_htlc,
    open_channel,
    swap_across_channels,
)
from .conditions import (
    And,
    KeyPair,
    KeyRegistry,
    Or,
    PreimageOf,
    SignedBy,
    SpendCondition,
    UnknownKey,
    Witness,
    gen_secret,
    hash_commit,
)
from .harness import (
    AbortAfterStep,
    AdversaryStrategy,
    ChainConfig,
    DelayStep,
    Honest,
    RefuseCosign,
    Scenario,
    ScenarioError,
    WrongDigest,
    check_atomicity,
    enumerate_abort_points,
    load_scenario,
    parse_scenario,
    run_scenario,
)
from .incentives import (
    IncentiveLedger,
    charge_spam_fee,
    compute_deposit,
    settle_incentives,
)
from .p2ptradex import TradeXOffer, run_p2ptradex
from .swap import (
    AlreadySpent,
    DigestMismatch,
    IncompatibleChains,
    InsufficientFunds,
    Phase,
    PreimageNotRevealed,
    SwapError,
    SwapParams,
    SwapSession,
    TimelockOrderingViolation,
    TooEarly,
    TooLate,
    WrongPhase,
    alice_claim,
    alice_commit,
    alice_cosign_refund_b,
    bob_build_and_commit,
    bob_build_escrow,
    bob_claim,
    bob_commit_escrow,
    bob_cosign_refund_a,
    check_compatibility,
    poll,
    refund_alice,
    refund_bob,
    setup,
)
from .trace import ScenarioTrace, TraceEvent, TraceRecorder, Verdict, emit_trace
from .tx import Outpoint, Transaction, TxInput, TxOutput, evaluate, sighash, sign, verify

__version__ = "0.1.0"
