"""Acceptance criteria at their stated resolutions and tolerances.

Each test prints the criterion's verdict line (visible with ``-s`` or in the
captured output of a failure), and the session summary lists them all.
Criteria 3, 6 and 7 take minutes.
"""

import pytest

from conftest import ACCEPTANCE_LINES
from wbcsoc.bench import acceptance


def _check(number):
    result = acceptance.CRITERIA[number]()
    print(result.line())
    ACCEPTANCE_LINES.append(result.line())
    assert result.passed, result.line()


@pytest.mark.parametrize("number", range(1, 10))
def test_criterion(number):
    _check(number)
