import numpy as np
import pytest

from bdtree import kernels
from bdtree.exact import DenseInstance

BACKENDS = [kernels.fallback] + ([kernels.compiled] if kernels.compiled is not None else [])


@pytest.fixture(params=BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def backend(request):
    return request.param


@pytest.fixture
def four():
    """Hand-checkable 4-vertex instance."""
    M = np.zeros((4, 4))
    for (a, b), w in {(0, 1): 0.1, (0, 2): 0.5, (0, 3): 0.9, (1, 2): 0.2, (1, 3): 0.8, (2, 3): 0.3}.items():
        M[a, b] = M[b, a] = w
    return DenseInstance(M)


def random_instance(n, seed, m=None):
    return DenseInstance.random(n, np.random.default_rng(seed), m=m)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
