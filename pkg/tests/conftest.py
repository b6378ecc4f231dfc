from __future__ import annotations

from pathlib import Path

import pytest

from cqmine.relational import Instance, Schema, load_instance, load_schema

FIXTURES = Path(__file__).parent / "fixtures"

# Filled by tests/test_acceptance.py; echoed after the run so the per-criterion
# verdict lines are visible even though pytest captures test stdout.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def beer_schema() -> Schema:
    return load_schema(FIXTURES / "beer" / "schema.txt")


@pytest.fixture(scope="session")
def beer_instance(beer_schema: Schema) -> Instance:
    return load_instance(beer_schema, FIXTURES / "beer")
