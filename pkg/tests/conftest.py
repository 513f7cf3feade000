import numpy as np
import pytest

from vasifit.noise import NoiseSpec, sample_increments
from vasifit.simulate import DIAGONAL_EXAMPLE, NONDIAGONAL_EXAMPLE, simulate_path


def random_spd(rng, d, lo=0.5, hi=2.0):
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return (Q * rng.uniform(lo, hi, d)) @ Q.T


def random_antisymmetric(rng, d, scale=1.0):
    A = scale * rng.standard_normal((d, d))
    return A - A.T


def example_path(params=DIAGONAL_EXAMPLE, hurst=0.5, n=10_000, h=0.4, seed=7, replication=0, r0=None):
    spec = NoiseSpec(kind="fbm", d=params.d, hurst=hurst)
    inc = sample_increments(spec, n, h, seed, replication)
    return spec, inc, simulate_path(params, inc, r0)


@pytest.fixture(scope="session")
def diag_path():
    return example_path()


@pytest.fixture(scope="session")
def nondiag_path():
    return example_path(NONDIAGONAL_EXAMPLE)


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


@pytest.fixture
def report_criterion(request):
    """Record one PASS/FAIL line for the terminal summary."""
    lines = request.config.stash[ACCEPTANCE_LINES]

    def report(number, title, passed, detail=""):
        line = f"{'PASS' if passed else 'FAIL'}  [{number}] {title}" + (f": {detail}" if detail else "")
        lines.append((number, line))
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
