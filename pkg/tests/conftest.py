import time

import pytest

from micropump.config import load_paper_config
from micropump.model import flexural_rigidity, paper_coil, paper_diaphragm, paper_magnet

# (criterion id, title, passed, detail), filled by test_acceptance.py
ACCEPTANCE_LOG = []


@pytest.fixture
def coil():
    return paper_coil()


@pytest.fixture
def magnet():
    return paper_magnet()


@pytest.fixture
def diaphragm():
    return paper_diaphragm()


@pytest.fixture
def rigidity(diaphragm):
    return flexural_rigidity(diaphragm)


@pytest.fixture(scope="session")
def paper_config():
    return load_paper_config()


class Criterion:
    """Collects the checks of one acceptance criterion and logs a pass/fail line."""

    def __init__(self, cid, title):
        self.cid = cid
        self.title = title
        self.checks = []
        self.t0 = time.perf_counter()

    def check(self, label, ok, value=""):
        self.checks.append((label, bool(ok), value))
        return bool(ok)

    def finish(self):
        passed = all(ok for _, ok, _ in self.checks)
        failed = [f"{label} [{value}]" for label, ok, value in self.checks if not ok]
        detail = "; ".join(failed) if failed else "; ".join(f"{label} {value}".strip() for label, _, value in self.checks)
        ACCEPTANCE_LOG.append((self.cid, self.title, passed, detail))
        line = f"criterion {self.cid:>2} {'PASS' if passed else 'FAIL'}  {self.title}: {detail}"
        print(line)
        assert passed, line


@pytest.fixture
def criterion():
    made = []

    def factory(cid, title):
        c = Criterion(cid, title)
        made.append(c)
        return c

    return factory


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for cid, title, passed, detail in sorted(ACCEPTANCE_LOG):
        terminalreporter.write_line(f"criterion {cid:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
