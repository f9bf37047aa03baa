"""Every acceptance criterion at its stated size and tolerance.

Each test prints one ``[PASS]``/``[FAIL]`` line; the lines are repeated in
the terminal summary. Run alone with ``pytest -m acceptance -s``.
"""
import pytest
from conftest import ACCEPTANCE_LINES

from bdtree.acceptance import CHECKS

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]


@pytest.mark.parametrize("cid", sorted(CHECKS))
def test_criterion(cid):
    res = CHECKS[cid](seed=0, workers=1)
    line = res.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert res.passed, line
