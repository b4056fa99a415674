from pathlib import Path

import pytest

from gridtree_core.configuration import GridTreeConfiguration
from gridtree_core.dataset import load_relation, synthetic_relation

DATA = Path(__file__).parent / "data"


@pytest.fixture(autouse=True)
def no_seed_from_env(monkeypatch):
    monkeypatch.delenv("GRIDTREE_SEED", raising=False)


@pytest.fixture()
def data_dir():
    return DATA


@pytest.fixture()
def weather():
    return load_relation(DATA / "weather.csv", "id", "play")


@pytest.fixture()
def banking():
    return load_relation(DATA / "banking.csv", "Cust. nr.", "Fraudulent?")


@pytest.fixture()
def synthetic():
    return synthetic_relation(n_tuples=18, n_attributes=4, n_values=3, seed=7)


@pytest.fixture()
def configuration():
    """Configuration factory; 64-bit keys unless a test needs longer items."""

    def _configuration(**kwargs):
        kwargs.setdefault("key_bits", 64)
        kwargs.setdefault("seed", 1)
        return GridTreeConfiguration(**kwargs)

    return _configuration
