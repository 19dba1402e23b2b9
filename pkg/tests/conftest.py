import json
from pathlib import Path

import pytest

VECTORS_DIR = Path(__file__).parent / "vectors"

_ACCEPTANCE_RESULTS: dict = {}


def load_vectors(name: str) -> dict:
    return json.loads((VECTORS_DIR / f"{name}.json").read_text())


@pytest.fixture(scope="session")
def keccak_vectors():
    return load_vectors("keccak_vectors")


@pytest.fixture(scope="session")
def address_vectors():
    return load_vectors("address_vectors")["vectors"]


@pytest.fixture(scope="session")
def decompress_vectors():
    return load_vectors("decompress_vectors")


@pytest.fixture(scope="session")
def rlp_vectors():
    return load_vectors("rlp_vectors")["vectors"]


@pytest.fixture(scope="session")
def sig_vectors():
    return load_vectors("sig_vectors")["vectors"]


@pytest.fixture(scope="session")
def ibs_vectors():
    return load_vectors("ibs_vectors")["vectors"]


@pytest.fixture(scope="session")
def geom_band():
    return load_vectors("geom_band")


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): ties a test to one acceptance criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        _ACCEPTANCE_RESULTS[marker.args[0]] = report.passed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, passed in _ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}")
