"""
Shared fixtures: bundled example systems and seeded random systems.
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

# Add repo root to path so ``src`` and ``cjsr_cli`` import
ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from src.automaton import Automaton  # noqa: E402
from src.switched_system import ConstrainedSystem  # noqa: E402
from src.system_io import load_system  # noqa: E402

SYSTEMS = ROOT / "Database" / "systems"

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long numerical runs (controller-failure system, random-system suites)")


@pytest.fixture
def systems_dir() -> Path:
    return SYSTEMS


@pytest.fixture
def scalar_cycle() -> ConstrainedSystem:
    """Scalar two-node cycle: modes 2 and 1/8, CJSR 1/2."""
    return load_system(SYSTEMS / "scalar_cycle.json")


@pytest.fixture
def two_node() -> ConstrainedSystem:
    return load_system(SYSTEMS / "two_node_four_modes.json")


@pytest.fixture
def three_node() -> ConstrainedSystem:
    return load_system(SYSTEMS / "three_node_two_modes.json")


@pytest.fixture
def controller() -> ConstrainedSystem:
    return load_system(SYSTEMS / "controller_failures.json")


@pytest.fixture
def identity_system() -> ConstrainedSystem:
    return load_system(SYSTEMS / "identity_modes.json")


@pytest.fixture
def self_loop():
    """Factory: one node with a single self-loop carrying A."""

    def make(A) -> ConstrainedSystem:
        A = np.atleast_2d(np.asarray(A, dtype=float))
        return ConstrainedSystem.create(Automaton.from_triples(["v"], [("v", "v", 1)]), {1: A})

    return make


@pytest.fixture
def random_system():
    """Factory: complete automaton on ``nodes`` nodes, one mode per edge."""

    def make(seed: int, n: int = 2, nodes: int = 2) -> ConstrainedSystem:
        rng = np.random.default_rng(seed)
        names = [f"v{k}" for k in range(nodes)]
        triples = []
        for v in names:
            for w in names:
                triples.append((v, w, len(triples) + 1))
        matrices = {label: rng.standard_normal((n, n)) for _, _, label in triples}
        return ConstrainedSystem.create(Automaton.from_triples(names, triples), matrices)

    return make


@pytest.fixture
def uniform_random_system():
    """Factory: n = 2, two or three nodes on a ring plus random extra edges.

    Entries are uniform in [-1, 1]; every matrix is divided by the largest
    spectral norm so the largest edge norm is 1.
    """

    def make(seed: int) -> ConstrainedSystem:
        rng = np.random.default_rng(seed)
        count = int(rng.integers(2, 4))
        names = [f"v{k}" for k in range(count)]
        pairs = [(names[k], names[(k + 1) % count]) for k in range(count)]
        for v in names:
            for w in names:
                if (v, w) not in pairs and rng.random() < 0.5:
                    pairs.append((v, w))
        triples = [(v, w, label) for label, (v, w) in enumerate(pairs, start=1)]
        raw = {label: rng.uniform(-1.0, 1.0, size=(2, 2)) for _, _, label in triples}
        top = max(np.linalg.norm(A, 2) for A in raw.values())
        matrices = {label: A / top for label, A in raw.items()}
        return ConstrainedSystem.create(Automaton.from_triples(names, triples), matrices)

    return make
