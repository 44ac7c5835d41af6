import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "det",
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("det")

from swapsim.chain import World
from swapsim.swap import SwapParams

COIN_AMOUNT = 12_345_000
DELAY_A = 600
DELAY_B = 5


@pytest.fixture
def world():
    return World()


@pytest.fixture
def parties(world):
    return world.keys.generate(1), world.keys.generate(2)


@pytest.fixture
def two_chains(world, parties):
    """Default two-chain setup: Alice funded on A, Bob funded on B."""
    alice, bob = parties
    ledger_a = world.create_ledger("BTC-sim", [(alice.public, COIN_AMOUNT)], DELAY_A)
    ledger_b = world.create_ledger("XRP-sim", [(bob.public, COIN_AMOUNT)], DELAY_B)
    return ledger_a, ledger_b


@pytest.fixture
def default_params(parties):
    alice, bob = parties
    return SwapParams(
        chain_a="BTC-sim",
        chain_b="XRP-sim",
        n1=COIN_AMOUNT,
        n2=COIN_AMOUNT,
        alice=alice,
        bob=bob,
        seed=42,
    )


def default_scenario_dict(engine="htlc_onchain", seed=42, **overrides):
    data = {
        "engine": engine,
        "seed": seed,
        "chains": {
            "a": {"id": "BTC-sim", "confirmation_delay": DELAY_A, "genesis": {"alice": COIN_AMOUNT}},
            "b": {"id": "XRP-sim", "confirmation_delay": DELAY_B, "genesis": {"bob": COIN_AMOUNT}},
        },
        "swap": {"amount_a": COIN_AMOUNT, "amount_b": COIN_AMOUNT},
    }
    data.update(overrides)
    return data
