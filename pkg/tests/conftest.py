from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from contract_forge.model import MarketParams, TypeProfile

GOLDEN = Path(__file__).parent / "golden"


def random_instance(rng: np.random.Generator, max_n: int = 6):
    """Draw n <= max_n, thetas ascending in (0, 5], betas on the simplex, R in (0, 2], c in [0.5, 10]."""
    n = int(rng.integers(1, max_n + 1))
    while True:
        thetas = np.sort(5.0 - rng.uniform(0.0, 5.0, n))  # (0, 5]
        if np.all(np.diff(thetas) > 0.0):
            break
    betas = rng.dirichlet(np.ones(n))
    betas = betas / betas.sum()
    # renormalize until the float sum is within the profile tolerance
    betas[-1] = 1.0 - betas[:-1].sum()
    R = 2.0 - rng.uniform(0.0, 2.0)
    c = rng.uniform(0.5, 10.0)
    return TypeProfile(tuple(thetas), tuple(betas)), MarketParams(R, c)


def random_instances(count: int = 100, seed: int = 20240601, max_n: int = 6):
    rng = np.random.default_rng(seed)
    return [random_instance(rng, max_n) for _ in range(count)]


@pytest.fixture
def two_type():
    """theta = (1, 2), beta = (0.5, 0.5), R = 1, c = 5."""
    return TypeProfile((1.0, 2.0), (0.5, 0.5)), MarketParams(1.0, 5.0)


@pytest.fixture
def fig_profile():
    """Ten types theta_i = i with uniform prior, R = 0.5, c = 5."""
    return TypeProfile.uniform([float(i) for i in range(1, 11)]), MarketParams(0.5, 5.0)


# one line per acceptance criterion, filled by test_acceptance and echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
