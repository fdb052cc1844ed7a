import numpy as np
import pytest
from scipy.stats import unitary_group

from quasibasis import operators as ops


def random_well_conditioned(N, seed, spread=10.0):
    """Unitary times positive diagonal: cond(T) = spread exactly (1 when N = 1)."""
    rng = np.random.default_rng(seed)
    if N == 1:
        U = np.exp(1j * rng.uniform(0, 2 * np.pi, (1, 1)))
        spread = 1.0
    else:
        U = unitary_group.rvs(N, random_state=rng)
    d = np.exp(np.linspace(0.0, np.log(spread), N))
    rng.shuffle(d)
    return ops.TruncatedOperator(U * d)


def random_operator(N, seed):
    rng = np.random.default_rng(seed)
    return ops.TruncatedOperator(np.eye(N) * 3 + rng.standard_normal((N, N))
                                 + 1j * rng.standard_normal((N, N)))


@pytest.fixture
def well_conditioned():
    return random_well_conditioned


ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
