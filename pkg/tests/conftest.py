import os

import pytest

from medea.io import load_scenario

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")
TOY_CFG = os.path.join(FIXTURES, "toy", "toy.cfg")
MINI_CFG = os.path.join(FIXTURES, "mini", "mini.cfg")


@pytest.fixture(scope="session")
def toy_scenario():
    return load_scenario(TOY_CFG)


@pytest.fixture(scope="session")
def toy_outcome(toy_scenario):
    """The toy fixture solved once with the bundled simplex (about 13 s)."""
    from medea.engine import run_scenario

    return run_scenario(toy_scenario)


@pytest.fixture(scope="session")
def toy_sweep_runs(tmp_path_factory):
    """Two identical ``medea sweep`` runs on the toy fixture, for determinism and monotonicity."""
    from medea.cli import main

    base = tmp_path_factory.mktemp("toy_sweep")
    dirs, codes = [], []
    for k in range(2):
        out = base / f"run{k}"
        codes.append(main(["sweep", TOY_CFG, "--step", "2.5", "--out", str(out)]))
        dirs.append(out)
    return codes, dirs


# one line per acceptance criterion, collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
