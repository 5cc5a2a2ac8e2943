import pytest

from artifact import acceptance

_LINES: list[str] = []


def pytest_addoption(parser):
    parser.addoption("--long-run", action="store_true", default=False,
                     help="run the paper-scale checks (M = 1e8 products, 1.1e7 scan)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--long-run"):
        return
    skip = pytest.mark.skip(reason="needs --long-run")
    for item in items:
        if "longrun" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def record_outcome():
    def record(o: acceptance.Outcome):
        tag = " (known failure)" if o.known and not o.passed else ""
        _LINES.append(o.line() + tag)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _LINES:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def pinned_ledger():
    from artifact.bounds_pipeline import LedgerConfig, build_ledger
    return build_ledger(LedgerConfig(products="pinned"))
