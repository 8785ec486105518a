from pathlib import Path

import pytest

from bridgekit.synth import make_bridge_dataset, make_weather_dataset

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def weather():
    return make_weather_dataset()


@pytest.fixture(scope="session")
def bridges_small():
    """4k-instance synthetic inventory shared by the slower protocol tests."""
    return make_bridge_dataset(4000, seed=11)
