"""The ten acceptance criteria at full size (preset "desk").

Each test prints one PASS/FAIL line; the lines are repeated in the terminal
summary.  Wall-clock budgets are reported on the line, not asserted.
"""
import pytest

from mrsle.suite import run_criterion

SEED = 42


@pytest.mark.slow
@pytest.mark.parametrize("number", range(1, 11))
def test_criterion(number, acceptance_log):
    r = run_criterion(number, "desk", SEED)
    line = r.line()
    print(line)
    acceptance_log.append(line)
    failed = [c for c in r.checks if not c["pass"]]
    assert r.passed, failed
