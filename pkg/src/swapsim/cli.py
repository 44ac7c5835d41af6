"""Command line front end for scenario files.

Subcommands:
    run <scenario.json>                one scenario, verdict and deltas
    sweep-aborts <scenario.json>       every abandonment point of the engine
    compare-baselines <scenario.json>  the same offer under the escrow-only
                                       baseline and the hashlock engine

Exit code is 0 only when every verdict produced was safe. Note that
compare-baselines deliberately includes the baseline's denial run, whose
unsafe verdict is the point of the comparison, so it exits non-zero.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .harness import (
    AbortAfterStep,
    Honest,
    Scenario,
    ScenarioError,
    enumerate_abort_points,
    load_scenario,
    run_scenario,
)
from .incentives import IncentiveLedger, charge_spam_fee, settle_incentives
from .trace import ScenarioTrace, emit_trace


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swapsim",
        description="deterministic cross-chain swap simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "run one scenario and print its verdict"),
        ("sweep-aborts", "run every abandonment point and check the outcomes"),
        ("compare-baselines", "contrast the escrow-only baseline with the hashlock engine"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("scenario", help="path to a scenario JSON file")
        cmd.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        cmd.add_argument(
            "--trace-out",
            default=None,
            help="trace file for run, or a directory for sweep-aborts",
        )
        cmd.add_argument("--fee", type=int, default=None, help="override the per-tx fee")
    return parser


def _apply_overrides(scenario: Scenario, args: argparse.Namespace) -> Scenario:
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.fee is not None:
        if args.fee < 0:
            raise ScenarioError("--fee: must be non-negative")
        updates["per_tx_fee"] = args.fee
    if args.trace_out is not None:
        updates["trace_out"] = args.trace_out
    return dataclasses.replace(scenario, **updates) if updates else scenario


def _print_outcome(label: str, trace: ScenarioTrace) -> None:
    deltas = "  ".join(
        f"{party}@{chain}:{trace.deltas[party][chain]:+d}"
        for party in sorted(trace.deltas)
        for chain in sorted(trace.deltas[party])
    )
    print(f"{label:<18} {str(trace.verdict):<14} {deltas}")


def _settled_incentives(scenario: Scenario, trace: ScenarioTrace) -> IncentiveLedger:
    incentives = IncentiveLedger.open_swap(
        {"alice": scenario.amount_a, "bob": scenario.amount_b}
    )
    for party in ("alice", "bob"):
        charge_spam_fee(incentives, party, scenario.spam_fee)
    return settle_incentives(incentives, trace)


def _cmd_run(scenario: Scenario) -> int:
    trace = run_scenario(scenario)
    _print_outcome("run", trace)
    incentives = _settled_incentives(scenario, trace)
    for party in sorted(incentives.parties):
        entry = incentives.parties[party]
        print(
            f"incentives {party}: deposit_returned={entry.deposit_returned} "
            f"forfeit_received={entry.forfeit_received} fees={entry.fees_paid} "
            f"reputation={entry.reputation:+d}"
        )
    if scenario.trace_out:
        emit_trace(trace, scenario.trace_out)
        print(f"trace written to {scenario.trace_out}")
    return 0 if trace.verdict.is_safe() else 1


def _cmd_sweep(scenario: Scenario) -> int:
    results = enumerate_abort_points(scenario)
    trace_dir = Path(scenario.trace_out) if scenario.trace_out else None
    if trace_dir is not None:
        trace_dir.mkdir(parents=True, exist_ok=True)
    all_safe = True
    for label, trace in results:
        _print_outcome(label, trace)
        all_safe &= trace.verdict.is_safe()
        if trace_dir is not None:
            emit_trace(trace, trace_dir / f"{label}.trace")
    print(f"{len(results)} abandonment points, {'all safe' if all_safe else 'UNSAFE OUTCOMES'}")
    return 0 if all_safe else 1


def _cmd_compare(scenario: Scenario) -> int:
    rows = [
        ("p2ptradex/honest", dataclasses.replace(scenario, engine="p2ptradex", strategy=Honest())),
        (
            "p2ptradex/deny",
            dataclasses.replace(scenario, engine="p2ptradex", strategy=AbortAfterStep(3)),
        ),
        ("htlc/honest", dataclasses.replace(scenario, engine="htlc_onchain", strategy=Honest())),
        (
            "htlc/abandoned",
            dataclasses.replace(scenario, engine="htlc_onchain", strategy=AbortAfterStep(3)),
        ),
    ]
    all_safe = True
    for label, variant in rows:
        trace = run_scenario(variant)
        _print_outcome(label, trace)
        all_safe &= trace.verdict.is_safe()
    return 0 if all_safe else 1


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        scenario = _apply_overrides(load_scenario(args.scenario), args)
        if args.command == "run":
            return _cmd_run(scenario)
        if args.command == "sweep-aborts":
            return _cmd_sweep(scenario)
        return _cmd_compare(scenario)
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
