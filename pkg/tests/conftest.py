import numpy as np
import pytest

from nonlocal_ftl.dynamics import RingState
from nonlocal_ftl.velocity import WeightProfile, greenshields

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Collects one PASS/FAIL line per acceptance criterion."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def gs():
    return greenshields()


@pytest.fixture
def three_car():
    """ell = 0.5, gaps (0.5, 1.0, 1.5) on a ring of length 3."""
    return RingState(ell=0.5, P=3.0, x=np.array([0.0, 0.5, 1.5]))


def random_weights(rng: np.random.Generator, max_n: int = 6, kappa=None) -> WeightProfile:
    n = int(rng.integers(1, max_n + 1))
    c = np.sort(rng.dirichlet(np.ones(n)))[::-1]
    c = np.append(c / c.sum(), 0.0)
    if kappa is None:
        kappa = float(rng.choice([0.0, 0.5, rng.uniform(0.0, 1.5)]))
    return WeightProfile(tuple(c), kappa)


def random_ring(rng: np.random.Generator, M: int, ell: float, nu: float = 0.1) -> RingState:
    """Spacings uniform in ``[1, 1/nu]``; position origin random."""
    y = rng.uniform(1.0, 1.0 / nu, M)
    return RingState.from_gaps(y * ell, ell, x0=float(rng.uniform(-1, 1)))


def partner_ring(rng: np.random.Generator, state: RingState) -> RingState:
    """Another state on the same ring (same M, ell, P)."""
    M, ell = state.M, state.ell
    excess = state.P / ell - M
    u = rng.uniform(0.05, 1.0, M)
    y = 1.0 + u * excess / u.sum()
    return RingState.from_gaps(y * ell, ell)
