from importlib import resources
from pathlib import Path

import pytest

from ctrmatch.contract_lang import parse_contract_source


@pytest.fixture(scope="session")
def sample_path() -> Path:
    return Path(str(resources.files("ctrmatch") / "data" / "document_manager.ctr"))


@pytest.fixture(scope="session")
def sample_source(sample_path) -> str:
    return sample_path.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def sample_ast(sample_source):
    return parse_contract_source(sample_source)


# -- acceptance reporting: one line per criterion in the terminal summary

_ACCEPTANCE: list[tuple[str, str, str, float]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title = marker.args
    _ACCEPTANCE.append((number, title, "PASS" if rep.passed else "FAIL", rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, duration in sorted(_ACCEPTANCE, key=lambda r: int(r[0])):
        terminalreporter.write_line(f"AC{number:>2} {status}  {title}  ({duration:.2f}s)")
