"""Acceptance gate: every reference criterion at its stated tolerance and
runtime budget. Each test prints one PASS/FAIL line, and a summary of all
lines is echoed at the end of the session."""
import pytest

from usam.harness.validation import CHECKS
from usam.model import load_preset

CFG = load_preset()
LINES = {}


@pytest.fixture(scope="module", autouse=True)
def summary():
    yield
    if LINES:
        print("\nacceptance summary:")
        for key in CHECKS:
            if key in LINES:
                print("  " + LINES[key])


@pytest.mark.parametrize("key", list(CHECKS))
def test_criterion(key, capsys):
    res = CHECKS[key](CFG)
    LINES[key] = res.line()
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
