import pytest

from normsim.engine import EngineMode
from normsim.organization import Organization
from normsim.scenario import bundled_path, load_norm_file, load_scenario


@pytest.fixture(scope="session")
def taxi_norm_file():
    return load_norm_file(bundled_path("taxi_norms.json"))


@pytest.fixture(scope="session")
def taxi_config():
    return load_scenario(bundled_path("taxi.scenario"))


@pytest.fixture
def taxi_norms(taxi_norm_file):
    return {n.id: n for n in taxi_norm_file.norms}


@pytest.fixture
def taxi_org(taxi_norm_file):
    return Organization(
        "taxi",
        EngineMode.PROHIBITION_MODE,
        ["DRIVER", "CUSTOMER"],
        taxi_norm_file.schema,
        taxi_norm_file.norms,
        {"PickClients": "PICKING", "Queue": "QUEUE"},
    )
