"""Shared fixtures: the bundled example networks and a seeded RNG."""
from pathlib import Path

import numpy as np
import pytest

from core.crn.parser import load_network
from models import Complex, Reaction, build_matrices
from settings import settings

NETWORK_DIR = Path(__file__).resolve().parent.parent / "networks"


def read_network_text(name: str) -> str:
    return (NETWORK_DIR / f"{name}.crn").read_text(encoding="utf-8")


def load_example(number: int):
    return load_network(read_network_text(f"example{number}"))


@pytest.fixture
def network_dir() -> Path:
    return NETWORK_DIR


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded from CRN_SEED so failures can be replayed"""
    return np.random.default_rng(settings.seed)


@pytest.fixture
def example1():
    return load_example(1)[0]


@pytest.fixture
def example2():
    return load_example(2)[0]


@pytest.fixture
def example3():
    return load_example(3)[0]


@pytest.fixture
def example4():
    return load_example(4)[0]


@pytest.fixture
def example5():
    return load_example(5)[0]


@pytest.fixture
def example6():
    return load_example(6)[0]


def random_network(rng: np.random.Generator, max_species: int = 4, max_reactions: int = 6):
    n = int(rng.integers(2, max_species + 1))
    r = int(rng.integers(1, max_reactions + 1))
    reactions, seen = [], set()
    while len(reactions) < r:
        reactant = Complex.from_dense(rng.integers(0, 3, size=n).tolist())
        product = Complex.from_dense(rng.integers(0, 3, size=n).tolist())
        if reactant == product or (reactant, product) in seen:
            continue
        seen.add((reactant, product))
        reactions.append(Reaction(reactant, product, float(np.round(rng.uniform(0.1, 5.0), 3))))
    return build_matrices([f"X{i + 1}" for i in range(n)], reactions, name="random")


@pytest.fixture
def random_networks(rng):
    return [random_network(rng) for _ in range(100)]
