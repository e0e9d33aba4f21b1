"""Acceptance criteria at their stated tolerances, one test each.

Every test prints a single PASS/FAIL line (visible with ``pytest -s`` or in
the captured output of a failure).
"""

import pytest

from photonwave import acceptance


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number):
    res = acceptance.run_one(number)
    print(acceptance.format_result(res))
    assert res.passed, acceptance.format_result(res)
