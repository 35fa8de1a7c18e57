"""Acceptance suite: runs every criterion at its stated tolerance and prints
one pass/fail line per criterion."""

import pytest

from spinlift.acceptance import CHECKS, run_check


@pytest.mark.parametrize("index", range(1, len(CHECKS) + 1),
                         ids=[f"criterion_{i:02d}" for i in range(1, len(CHECKS) + 1)])
def test_acceptance_criterion(index, capsys):
    result = run_check(index)
    with capsys.disabled():
        status = "PASS" if result.passed else "FAIL"
        print(f"\n[{status}] criterion {result.index:2d}: {result.name} "
              f"({result.runtime_s:.1f} s)")
    assert result.passed, f"criterion {result.index} failed: {result.details}"
