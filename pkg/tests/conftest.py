import csv
import os

import pytest

from multifrac.regularity import RegularityFunction

HERE = os.path.dirname(os.path.abspath(__file__))


def _load_fixtures():
    with open(os.path.join(HERE, "fixtures", "derived_values.csv"), newline="") as fh:
        return {r["name"]: float(r["value"]) for r in csv.DictReader(fh)}


@pytest.fixture(scope="session")
def derived():
    """Oracle values written by tests/oracles/make_fixtures.py."""
    return _load_fixtures()


@pytest.fixture(scope="session")
def affine_h():
    return RegularityFunction.affine(0.2, 0.1)


@pytest.fixture(scope="session")
def affine_alpha():
    return RegularityFunction.affine(0.3, 0.4)


@pytest.fixture(scope="session")
def sine_alpha():
    return RegularityFunction.sinusoidal(0.5, 0.2, 1.0)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    """Record one pass/fail line per criterion for the terminal summary."""

    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
