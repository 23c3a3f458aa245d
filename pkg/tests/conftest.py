import numpy as np
import pytest

from pairdiag.pair_model import random_pair_model

# filled by test_acceptance; printed once at the end of the session
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def random_suite(count: int, max_dim: int, max_couplings: int, base_seed: int = 1000):
    """Seeded list of random valid real models with epsilon >= 0.1."""
    models = []
    for i in range(count):
        rng = np.random.default_rng(base_seed + i)
        dim = int(rng.integers(1, max_dim + 1))
        n = int(rng.integers(0, max_couplings + 1))
        models.append(random_pair_model(rng, dim, n, epsilon_min=0.1))
    return models


@pytest.fixture(scope="session")
def model_suite():
    return random_suite(200, 32, 8)


@pytest.fixture(scope="session")
def small_suite():
    return random_suite(50, 4, 3, base_seed=5000)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {detail}")
