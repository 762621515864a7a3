import pytest

from helpers import FIXTURE_DIR

_acceptance_lines = []


@pytest.fixture
def fixture_dir():
    return FIXTURE_DIR


@pytest.fixture
def fixture_config():
    return FIXTURE_DIR / "config.toml"


@pytest.fixture
def criterion(request):
    """Records one PASS/FAIL summary line per acceptance criterion."""
    record = {"label": request.node.function.__doc__.strip().splitlines()[0]}
    yield record
    rep = getattr(request.node, "rep_call", None)
    outcome = "PASS" if rep is not None and rep.passed else "FAIL"
    if rep is not None and rep.skipped:
        outcome = "SKIP"
    detail = record.get("detail", "")
    _acceptance_lines.append(f"{outcome}  {record['label']}" + (f"  [{detail}]" if detail else ""))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" or (rep.when == "setup" and rep.skipped):
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
