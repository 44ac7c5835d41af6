"""Scenario runner: declarative configs, adversary strategies, verdicts.

A scenario names an engine (on-chain swap, the flawed baseline, or the
channel variant), two chain configurations, the swap parameters, an
adversary strategy, and a seed. Running one builds a fresh simulation
world, drives the engine's step schedule under the strategy, finalizes
(rational unilateral claims while their windows are open, then every
eligible refund after the timelocks), and classifies the final balance
deltas into a verdict.

The finalization rule matters: abandonment cuts off cooperation, but a
party still takes actions that need nothing from the counterparty, such
as claiming with a secret already public on-chain. Without that, "walk
away after the reveal" would look like a protocol failure when it is
only a self-inflicted one, and with it every abandonment point lands on
one of the two safe outcomes.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import Callable

from . import channels as ch
from . import swap
from .chain import ChainFeatures, Ledger, World
from .conditions import KeyPair, _sha256, gen_secret, hash_commit
from .p2ptradex import DENY, HONEST, TradeXOffer, run_p2ptradex
from .swap import Phase, SwapError, SwapParams, SwapSession
from .trace import (
    BOTH_REFUNDED,
    SWAP_COMPLETED,
    UNSAFE,
    ScenarioTrace,
    Verdict,
    compute_deltas,
)

ENGINES = ("htlc_onchain", "p2ptradex", "channel_offchain")
STEP_COUNT = 8  # protocol steps per engine schedule (htlc and channel alike)
PARTIES = ("alice", "bob")


class ScenarioError(Exception):
    """Invalid scenario configuration; the message carries the field path."""


# -- adversary strategies -----------------------------------------------------


@dataclass(frozen=True)
class Honest:
    pass


@dataclass(frozen=True)
class AbortAfterStep:
    """Cooperation stops once ``step`` protocol steps have run (0 = none)."""

    step: int


@dataclass(frozen=True)
class DelayStep:
    """Both chains idle for ``delay`` seconds before step ``step`` runs."""

    step: int
    delay: int


@dataclass(frozen=True)
class WrongDigest:
    """Alice announces a digest that does not match her on-chain escrow."""


@dataclass(frozen=True)
class RefuseCosign:
    """The counterparty refuses to countersign refund "a" or "b"."""

    refund: str


AdversaryStrategy = Honest | AbortAfterStep | DelayStep | WrongDigest | RefuseCosign


# -- scenario configuration ---------------------------------------------------


@dataclass(frozen=True)
class ChainConfig:
    chain_id: str
    confirmation_delay: int = 0
    hash_algo: str = "sha256"
    supports_timelock: bool = True
    supports_scripts: bool = True
    genesis: dict[str, int] = field(default_factory=dict)  # party name -> amount

    def features(self) -> ChainFeatures:
        return ChainFeatures(
            hash_algo_id=self.hash_algo,
            supports_timelock=self.supports_timelock,
            supports_scripts=self.supports_scripts,
        )


@dataclass(frozen=True)
class Scenario:
    engine: str
    seed: int
    chain_a: ChainConfig
    chain_b: ChainConfig
    amount_a: int  # alice gives on chain A
    amount_b: int  # bob gives on chain B
    timelock_a: int = swap.TIMELOCK_A_DEFAULT
    timelock_b: int = swap.TIMELOCK_B_DEFAULT
    claim_margin: int | None = None
    strategy: AdversaryStrategy = Honest()
    per_tx_fee: int = 0
    spam_fee: int = 0
    trace_out: str | None = None


def _expect(mapping: dict, key: str, kind, path: str, default=_sha256):
    # default sentinel reuses a module object never passed by callers
    if key not in mapping:
        if default is not _sha256:
            return default
        raise ScenarioError(f"{path}.{key}: required field is missing")
    value = mapping[key]
    if kind is int and isinstance(value, bool):
        raise ScenarioError(f"{path}.{key}: expected an integer")
    if not isinstance(value, kind):
        raise ScenarioError(f"{path}.{key}: expected {kind.__name__}")
    return value


def _parse_chain(data: dict, path: str) -> ChainConfig:
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: expected an object")
    genesis = _expect(data, "genesis", dict, path, default={})
    for party, amount in genesis.items():
        if party not in PARTIES:
            raise ScenarioError(f"{path}.genesis.{party}: unknown party")
        if not isinstance(amount, int) or isinstance(amount, bool) or amount <= 0:
            raise ScenarioError(f"{path}.genesis.{party}: expected a positive integer")
    delay = _expect(data, "confirmation_delay", int, path, default=0)
    if delay < 0:
        raise ScenarioError(f"{path}.confirmation_delay: must be non-negative")
    return ChainConfig(
        chain_id=_expect(data, "id", str, path),
        confirmation_delay=delay,
        hash_algo=_expect(data, "hash_algo", str, path, default="sha256"),
        supports_timelock=_expect(data, "supports_timelock", bool, path, default=True),
        supports_scripts=_expect(data, "supports_scripts", bool, path, default=True),
        genesis=dict(genesis),
    )


def _parse_strategy(data: dict, path: str) -> AdversaryStrategy:
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: expected an object")
    name = _expect(data, "strategy", str, path)
    if name == "honest":
        return Honest()
    if name == "abort_after_step":
        step = _expect(data, "step", int, path)
        if not 0 <= step <= STEP_COUNT:
            raise ScenarioError(f"{path}.step: must be between 0 and {STEP_COUNT}")
        return AbortAfterStep(step)
    if name == "delay_step":
        step = _expect(data, "step", int, path)
        if not 1 <= step <= STEP_COUNT:
            raise ScenarioError(f"{path}.step: must be between 1 and {STEP_COUNT}")
        delay = _expect(data, "delay", int, path)
        if delay < 0:
            raise ScenarioError(f"{path}.delay: must be non-negative")
        return DelayStep(step, delay)
    if name == "wrong_digest":
        return WrongDigest()
    if name == "refuse_cosign":
        which = _expect(data, "refund", str, path)
        if which not in ("a", "b"):
            raise ScenarioError(f'{path}.refund: must be "a" or "b"')
        return RefuseCosign(which)
    raise ScenarioError(f"{path}.strategy: unknown strategy {name!r}")


def parse_scenario(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario: expected a JSON object")
    engine = _expect(data, "engine", str, "scenario")
    if engine not in ENGINES:
        raise ScenarioError(f"scenario.engine: must be one of {', '.join(ENGINES)}")
    seed = _expect(data, "seed", int, "scenario")
    chains = _expect(data, "chains", dict, "scenario")
    for side in ("a", "b"):
        if side not in chains:
            raise ScenarioError(f"scenario.chains.{side}: required field is missing")
    chain_a = _parse_chain(chains["a"], "scenario.chains.a")
    chain_b = _parse_chain(chains["b"], "scenario.chains.b")
    if chain_a.chain_id == chain_b.chain_id:
        raise ScenarioError("scenario.chains: the two chains must have distinct ids")
    swap_cfg = _expect(data, "swap", dict, "scenario")
    amount_a = _expect(swap_cfg, "amount_a", int, "scenario.swap")
    amount_b = _expect(swap_cfg, "amount_b", int, "scenario.swap")
    if amount_a <= 0 or amount_b <= 0:
        raise ScenarioError("scenario.swap: amounts must be positive")
    timelock_a = _expect(swap_cfg, "timelock_a", int, "scenario.swap", default=swap.TIMELOCK_A_DEFAULT)
    timelock_b = _expect(swap_cfg, "timelock_b", int, "scenario.swap", default=swap.TIMELOCK_B_DEFAULT)
    claim_margin = swap_cfg.get("claim_margin")
    if claim_margin is not None and (not isinstance(claim_margin, int) or claim_margin < 0):
        raise ScenarioError("scenario.swap.claim_margin: expected a non-negative integer")
    strategy = _parse_strategy(
        _expect(data, "adversary", dict, "scenario", default={"strategy": "honest"}),
        "scenario.adversary",
    )
    fees = _expect(data, "fees", dict, "scenario", default={})
    per_tx = _expect(fees, "per_tx", int, "scenario.fees", default=0)
    spam = _expect(fees, "spam_fee", int, "scenario.fees", default=0)
    if per_tx < 0 or spam < 0:
        raise ScenarioError("scenario.fees: fees must be non-negative")
    trace_out = data.get("trace_out")
    if trace_out is not None and not isinstance(trace_out, str):
        raise ScenarioError("scenario.trace_out: expected a path string")
    return Scenario(
        engine=engine,
        seed=seed,
        chain_a=chain_a,
        chain_b=chain_b,
        amount_a=amount_a,
        amount_b=amount_b,
        timelock_a=timelock_a,
        timelock_b=timelock_b,
        claim_margin=claim_margin,
        strategy=strategy,
        per_tx_fee=per_tx,
        spam_fee=spam,
        trace_out=trace_out,
    )


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario: invalid JSON ({exc})") from exc
    return parse_scenario(data)


def party_seed(seed: int, name: str) -> int:
    return int.from_bytes(_sha256(b"party", name.encode(), seed.to_bytes(8, "big"))[:8], "big")


WRONG_DIGEST_SEED_MASK = 0x5CE7A9B1D3F00D11


# -- verdict classification ---------------------------------------------------


def _classify(deltas, amount_a, amount_b, chain_a, chain_b, fees) -> Verdict:
    swap_outcome = {
        "alice": {chain_a: -amount_a, chain_b: amount_b},
        "bob": {chain_a: amount_a, chain_b: -amount_b},
    }
    null_outcome = {p: {chain_a: 0, chain_b: 0} for p in PARTIES}

    def matches(expected) -> bool:
        for party in PARTIES:
            for chain in (chain_a, chain_b):
                fee = fees.get(party, {}).get(chain, 0)
                if deltas[party][chain] != expected[party][chain] - fee:
                    return False
        return True

    if matches(swap_outcome):
        return Verdict(SWAP_COMPLETED)
    if matches(null_outcome):
        return Verdict(BOTH_REFUNDED)
    summary = "; ".join(
        f"{party} {chain}: {deltas[party][chain]:+d}"
        for party in PARTIES
        for chain in (chain_a, chain_b)
        if deltas[party][chain] != 0
    )
    return Verdict(UNSAFE, detail=summary or "no deltas matched either outcome")


def check_atomicity(trace: ScenarioTrace, params: SwapParams, fees=None) -> Verdict:
    """Classify a trace's deltas as the swap outcome, the null outcome, or Unsafe.

    ``fees`` defaults to the fees the trace scheduled; with a zero fee
    configuration the match is exact.
    """
    fee_map = fees if fees is not None else trace.fees_scheduled
    return _classify(trace.deltas, params.n1, params.n2, params.chain_a, params.chain_b, fee_map)


# -- engine runners -----------------------------------------------------------


@dataclass
class _Run:
    scenario: Scenario
    world: World
    ledger_a: Ledger
    ledger_b: Ledger
    alice: KeyPair
    bob: KeyPair
    fees: dict = field(default_factory=dict)
    session: SwapSession | None = None
    chan_a: ch.Channel | None = None
    chan_b: ch.Channel | None = None
    secret: bytes = b""

    def schedule_fee(self, party: str, chain: str) -> None:
        fee = self.scenario.per_tx_fee
        if fee:
            self.fees.setdefault(party, {}).setdefault(chain, 0)
            self.fees[party][chain] += fee


@dataclass(frozen=True)
class _Step:
    index: int
    owner: str
    name: str
    run: Callable[[_Run], None]


def _build_world(scenario: Scenario) -> _Run:
    world = World()
    alice = world.keys.generate(party_seed(scenario.seed, "alice"))
    bob = world.keys.generate(party_seed(scenario.seed, "bob"))
    keys = {"alice": alice, "bob": bob}
    ledgers = []
    for cfg in (scenario.chain_a, scenario.chain_b):
        genesis = [(keys[party].public, cfg.genesis[party]) for party in sorted(cfg.genesis)]
        ledgers.append(
            world.create_ledger(cfg.chain_id, genesis, cfg.confirmation_delay, cfg.features())
        )
    return _Run(
        scenario=scenario,
        world=world,
        ledger_a=ledgers[0],
        ledger_b=ledgers[1],
        alice=alice,
        bob=bob,
    )


def _snapshot(run: _Run) -> dict:
    keys = {"alice": run.alice.public, "bob": run.bob.public}
    return {
        party: {
            ledger.chain_id: ledger.query_balance(public)
            for ledger in (run.ledger_a, run.ledger_b)
        }
        for party, public in keys.items()
    }


def _swap_params(run: _Run) -> SwapParams:
    s = run.scenario
    return SwapParams(
        chain_a=s.chain_a.chain_id,
        chain_b=s.chain_b.chain_id,
        n1=s.amount_a,
        n2=s.amount_b,
        alice=run.alice,
        bob=run.bob,
        timelock_a=s.timelock_a,
        timelock_b=s.timelock_b,
        seed=s.seed,
        claim_margin=s.claim_margin,
        fee=s.per_tx_fee,
    )


def _htlc_schedule(run: _Run) -> list[_Step]:
    s = run.scenario
    wrong = isinstance(s.strategy, WrongDigest)

    def do_setup(r: _Run) -> None:
        announced = None
        if wrong:
            announced = hash_commit(gen_secret(s.seed ^ WRONG_DIGEST_SEED_MASK))
        r.session = swap.setup(_swap_params(r), r.ledger_a, r.ledger_b, announced_digest=announced)

    def do_cosign_a(r: _Run) -> None:
        swap.bob_cosign_refund_a(r.session)

    def do_commit_a(r: _Run) -> None:
        swap.alice_commit(r.session, r.ledger_a)
        r.schedule_fee("alice", r.ledger_a.chain_id)
        r.world.advance(r.ledger_a.confirmation_delay)
        swap.poll(r.session, r.ledger_a, r.ledger_b)

    def do_build_b(r: _Run) -> None:
        swap.bob_build_escrow(r.session, r.ledger_a, r.ledger_b)

    def do_cosign_b(r: _Run) -> None:
        swap.alice_cosign_refund_b(r.session)

    def do_commit_b(r: _Run) -> None:
        swap.bob_commit_escrow(r.session, r.ledger_b)
        r.schedule_fee("bob", r.ledger_b.chain_id)
        r.world.advance(r.ledger_b.confirmation_delay)
        swap.poll(r.session, r.ledger_a, r.ledger_b)

    def do_claim_b(r: _Run) -> None:
        swap.alice_claim(r.session, r.ledger_b)
        r.schedule_fee("alice", r.ledger_b.chain_id)
        r.world.advance(r.ledger_b.confirmation_delay)
        swap.poll(r.session, r.ledger_a, r.ledger_b)

    def do_claim_a(r: _Run) -> None:
        swap.bob_claim(r.session, r.ledger_a, r.ledger_b)
        r.schedule_fee("bob", r.ledger_a.chain_id)
        r.world.advance(r.ledger_a.confirmation_delay)
        swap.poll(r.session, r.ledger_a, r.ledger_b)

    return [
        _Step(1, "alice", "setup", do_setup),
        _Step(2, "bob", "cosign_refund_a", do_cosign_a),
        _Step(3, "alice", "commit_escrow_a", do_commit_a),
        _Step(4, "bob", "build_escrow_b", do_build_b),
        _Step(5, "alice", "cosign_refund_b", do_cosign_b),
        _Step(6, "bob", "commit_escrow_b", do_commit_b),
        _Step(7, "alice", "claim_b", do_claim_b),
        _Step(8, "bob", "claim_a", do_claim_a),
    ]


def _finalize_htlc(run: _Run) -> None:
    """Rational unilateral recovery, then all eligible refunds."""
    session = run.session
    if session is None:
        return
    la, lb = run.ledger_a, run.ledger_b

    if session.phase is Phase.TX3_BROADCAST:
        try:
            swap.alice_claim(session, lb)
            run.schedule_fee("alice", lb.chain_id)
            run.world.advance(lb.confirmation_delay)
            swap.poll(session, la, lb)
        except SwapError:
            pass
    if session.phase is Phase.ALICE_CLAIMED:
        try:
            swap.bob_claim(session, la, lb)
            run.schedule_fee("bob", la.chain_id)
            run.world.advance(la.confirmation_delay)
            swap.poll(session, la, lb)
        except SwapError:
            pass

    locktimes = []
    if session.tx1 is not None and (
        la.get_confirmed(session.tx1.tx_id()) or la.in_mempool(session.tx1.tx_id())
    ):
        locktimes.append(session.tx2.locktime)
    if session.tx3 is not None and (
        lb.get_confirmed(session.tx3.tx_id()) or lb.in_mempool(session.tx3.tx_id())
    ):
        locktimes.append(session.tx4.locktime)
    target = max(locktimes, default=run.world.clock() + max(session.params.timelock_a, session.params.timelock_b))
    run.world.advance_to(target)

    try:
        swap.refund_bob(session, lb)
        run.schedule_fee("bob", lb.chain_id)
    except SwapError:
        pass
    try:
        swap.refund_alice(session, la)
        run.schedule_fee("alice", la.chain_id)
    except SwapError:
        pass
    run.world.advance(max(la.confirmation_delay, lb.confirmation_delay))
    swap.poll(session, la, lb)


def _channel_schedule(run: _Run) -> list[_Step]:
    s = run.scenario

    def do_open_a(r: _Run) -> None:
        r.chan_a = ch.open_channel(r.ledger_a, r.alice, r.bob, s.amount_a, 0)
        r.world.advance(r.ledger_a.confirmation_delay)

    def do_open_b(r: _Run) -> None:
        r.chan_b = ch.open_channel(r.ledger_b, r.alice, r.bob, 0, s.amount_b)
        r.world.advance(r.ledger_b.confirmation_delay)

    def do_offer_a(r: _Run) -> None:
        r.secret = gen_secret(s.seed)
        ch.add_htlc(
            r.chan_a,
            hash_commit(r.secret),
            s.amount_a,
            r.ledger_a.clock + s.timelock_a,
            ch.A_TO_B,
            now=r.ledger_a.clock,
            ledger=r.ledger_a,
        )

    def do_offer_b(r: _Run) -> None:
        # Bob reuses the digest from the offer Alice already placed.
        digest = r.chan_a.pending_htlc.digest
        ch.add_htlc(
            r.chan_b,
            digest,
            s.amount_b,
            r.ledger_b.clock + s.timelock_b,
            ch.B_TO_A,
            now=r.ledger_b.clock,
            ledger=r.ledger_b,
        )

    def do_collect_b(r: _Run) -> None:
        ch.fulfill_htlc(r.chan_b, r.secret, r.ledger_b.clock, ledger=r.ledger_b)

    def do_collect_a(r: _Run) -> None:
        learned = r.chan_b.revealed_preimage
        ch.fulfill_htlc(r.chan_a, learned, r.ledger_a.clock, ledger=r.ledger_a)

    def do_close_a(r: _Run) -> None:
        ch.close_channel(r.chan_a, r.ledger_a)
        r.world.advance(r.ledger_a.confirmation_delay)

    def do_close_b(r: _Run) -> None:
        ch.close_channel(r.chan_b, r.ledger_b)
        r.world.advance(r.ledger_b.confirmation_delay)

    return [
        _Step(1, "alice", "open_channel_a", do_open_a),
        _Step(2, "bob", "open_channel_b", do_open_b),
        _Step(3, "alice", "offer_htlc_a", do_offer_a),
        _Step(4, "bob", "offer_htlc_b", do_offer_b),
        _Step(5, "alice", "collect_b", do_collect_b),
        _Step(6, "bob", "collect_a", do_collect_a),
        _Step(7, "alice", "close_a", do_close_a),
        _Step(8, "bob", "close_b", do_close_b),
    ]


def _finalize_channels(run: _Run) -> None:
    la, lb = run.ledger_a, run.ledger_b
    # Rational completion: the secret revealed in channel B unlocks the
    # matching offer in channel A without any help from the counterparty.
    if (
        run.chan_b is not None
        and run.chan_b.revealed_preimage is not None
        and run.chan_a is not None
        and run.chan_a.pending_htlc is not None
    ):
        try:
            ch.fulfill_htlc(run.chan_a, run.chan_b.revealed_preimage, la.clock, ledger=la)
        except ch.ChannelError:
            pass
    expiries = [
        chan.pending_htlc.expiry
        for chan in (run.chan_a, run.chan_b)
        if chan is not None and chan.pending_htlc is not None
    ]
    if expiries:
        run.world.advance_to(max(expiries))
    for chan, ledger in ((run.chan_a, la), (run.chan_b, lb)):
        if chan is not None and chan.pending_htlc is not None:
            ch.fail_htlc(chan, ledger.clock, ledger=ledger)
    for chan, ledger in ((run.chan_a, la), (run.chan_b, lb)):
        if chan is not None and not chan.closed:
            ch.close_channel(chan, ledger)
    run.world.advance(max(la.confirmation_delay, lb.confirmation_delay))


def _drive_schedule(run: _Run, schedule: list[_Step]) -> str | None:
    """Execute steps under the scenario's strategy; returns the deviant."""
    strategy = run.scenario.strategy
    refused = {"a": "cosign_refund_a", "b": "cosign_refund_b"}.get(
        getattr(strategy, "refund", None)
    )
    for step in schedule:
        if isinstance(strategy, AbortAfterStep) and step.index > strategy.step:
            return step.owner
        if isinstance(strategy, RefuseCosign) and step.name == refused:
            return step.owner
        if isinstance(strategy, DelayStep) and step.index == strategy.step:
            run.world.advance(strategy.delay)
        try:
            step.run(run)
        except (SwapError, ch.ChannelError) as exc:
            if isinstance(strategy, Honest):
                raise
            run.world.recorder.emit(
                run.world.clock(),
                "swap",
                "note",
                detail=f"step {step.index} ({step.name}) failed: {exc}",
            )
            if isinstance(strategy, WrongDigest):
                return "alice"
            return step.owner
    return None


def run_scenario(scenario: Scenario) -> ScenarioTrace:
    """Execute one scenario deterministically and classify the outcome.

    After any non-honest strategy the run is finalized: time advances past
    every relevant locktime and all eligible refunds fire before the final
    balances are read.
    """
    run = _build_world(scenario)
    initial = _snapshot(run)

    if scenario.engine == "p2ptradex":
        bob_strategy = HONEST if isinstance(scenario.strategy, Honest) else DENY
        offer = TradeXOffer(
            alice_amount=scenario.amount_a,
            bob_amount=scenario.amount_b,
            proof_deadline=scenario.timelock_b,
        )
        p2p_deltas = run_p2ptradex(
            offer,
            bob_strategy,
            run.ledger_a,
            run.ledger_b,
            run.alice,
            run.bob,
            recorder=run.world.recorder,
        )
        final = {
            party: {
                chain: initial[party][chain] + p2p_deltas[party][chain]
                for chain in initial[party]
            }
            for party in initial
        }
        deviant = None if bob_strategy == HONEST else "bob"
    else:
        schedule = _htlc_schedule(run) if scenario.engine == "htlc_onchain" else _channel_schedule(run)
        deviant = _drive_schedule(run, schedule)
        completed = (
            run.session is not None and run.session.phase is Phase.COMPLETED
            if scenario.engine == "htlc_onchain"
            else run.chan_a is not None and run.chan_b is not None
            and run.chan_a.closed and run.chan_b.closed
        )
        if not completed:
            if scenario.engine == "htlc_onchain":
                _finalize_htlc(run)
            else:
                _finalize_channels(run)
        run.world.assert_invariants()
        final = _snapshot(run)

    deltas = compute_deltas(initial, final)
    verdict = _classify(
        deltas,
        scenario.amount_a,
        scenario.amount_b,
        scenario.chain_a.chain_id,
        scenario.chain_b.chain_id,
        run.fees,
    )
    events = sorted(run.world.recorder.events, key=lambda e: (e.time, e.seq))
    return ScenarioTrace(
        events=events,
        initial_balances=initial,
        final_balances=final,
        deltas=deltas,
        fees_scheduled=run.fees,
        verdict=verdict,
        deviant=deviant,
    )


def enumerate_abort_points(scenario: Scenario) -> list[tuple[str, ScenarioTrace]]:
    """Run every abandonment point of the scenario's engine.

    Covers abort-after-k for k in 0..step count, plus (for the on-chain
    engine) both cosign refusals and the dishonest-announcement strategy.
    """
    if scenario.engine not in ("htlc_onchain", "channel_offchain"):
        raise ScenarioError(f"scenario.engine: {scenario.engine} has no abort enumeration")
    cases: list[tuple[str, AdversaryStrategy]] = [
        (f"abort_after_{k}", AbortAfterStep(k)) for k in range(STEP_COUNT + 1)
    ]
    if scenario.engine == "htlc_onchain":
        cases.append(("refuse_cosign_a", RefuseCosign("a")))
        cases.append(("refuse_cosign_b", RefuseCosign("b")))
        cases.append(("wrong_digest", WrongDigest()))
    results = []
    for label, strategy in cases:
        variant = dataclasses.replace(scenario, strategy=strategy, trace_out=None)
        results.append((label, run_scenario(variant)))
    return results
