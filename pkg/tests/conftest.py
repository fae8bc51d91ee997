from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from polarce import Backend, density_from_atoms

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_density(rng: np.random.Generator, max_atoms: int = 5, backend: Backend = Backend.FLOAT):
    """Random valid density: a few interior atoms and optional boundary masses."""
    n = int(rng.integers(0, max_atoms + 1))
    use_zero = rng.random() < 0.5
    use_one = rng.random() < 0.5
    if n == 0 and not (use_zero or use_one):
        use_zero = True
    if backend is Backend.RATIONAL:
        positions = sorted({Fraction(int(k), 97) for k in rng.integers(1, 97, size=n)})
        weights = [int(w) for w in rng.integers(1, 20, size=len(positions) + 2)]
        weights[-2] *= use_zero
        weights[-1] *= use_one
        total = sum(weights)
        masses = [Fraction(w, total) for w in weights]
        atoms = list(zip(masses[:-2], positions))
        return density_from_atoms(atoms, masses[-2], masses[-1], backend)
    positions = np.unique(rng.uniform(0.01, 0.99, size=n))
    weights = rng.dirichlet(np.ones(len(positions) + 2))
    weights[-2] *= use_zero
    weights[-1] *= use_one
    weights = weights / weights.sum()
    atoms = list(zip(weights[:-2].tolist(), positions.tolist()))
    a0 = float(weights[-2])
    a1 = 1.0 - a0 - float(np.sum(weights[:-2]))
    return density_from_atoms(atoms, a0, max(a1, 0.0), backend)


@st.composite
def densities(draw, max_atoms: int = 4):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_density(np.random.default_rng(seed), max_atoms)


@st.composite
def rational_densities(draw, max_atoms: int = 3):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_density(np.random.default_rng(seed), max_atoms, Backend.RATIONAL)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
