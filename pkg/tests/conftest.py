"""
Pytest configuration and shared fixtures.
"""

import json
import pytest
import sys
from pathlib import Path

import numpy as np

# Add the project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from chainlab.config.settings import settings  # noqa: E402
from chainlab.core.chain import ConstantChain, GeneratorChain, StaticChain  # noqa: E402
from chainlab.core.stochastic import validate  # noqa: E402
from chainlab.utils.events import event_bus  # noqa: E402


@pytest.fixture(scope="session")
def project_root_dir():
    """Provide the project root directory."""
    return Path(__file__).parent.parent


@pytest.fixture(autouse=True)
def reset_settings():
    """Every test starts from default settings."""
    settings.reset_to_defaults()
    yield settings
    settings.reset_to_defaults()


@pytest.fixture(autouse=True)
def clean_event_bus():
    """No subscribers or history leak between tests."""
    event_bus.clear_subscribers()
    event_bus.clear_history()
    yield event_bus
    event_bus.clear_subscribers()
    event_bus.clear_history()


@pytest.fixture
def averaging_chain():
    """Constant chain [[.5,.5],[.5,.5]]."""
    return ConstantChain(validate([[0.5, 0.5], [0.5, 0.5]]), name="averaging")


@pytest.fixture
def swap_chain():
    """Constant permutation chain [[0,1],[1,0]]."""
    return ConstantChain(validate([[0.0, 1.0], [1.0, 0.0]]), name="swap")


@pytest.fixture
def identity_chain():
    """Three agents that never interact."""
    return ConstantChain(validate(np.eye(3)), name="identity")


@pytest.fixture
def non_balanced_chain():
    """Constant [[.5,.5],[1,0]]."""
    return ConstantChain(validate([[0.5, 0.5], [1.0, 0.0]]), name="non_balanced")


def random_stochastic_chain(rng, order: int, steps: int) -> StaticChain:
    """Dense random row-stochastic chain."""
    matrices = []
    for _ in range(steps):
        raw = rng.random((order, order))
        matrices.append(validate(raw / raw.sum(axis=1, keepdims=True)))
    return StaticChain(matrices, name="random")


def geometric_chain(order: int = 2) -> GeneratorChain:
    """a_ij(n) = 2^-(n+1) spread over the off-diagonal, rest on the diagonal."""
    def producer(n):
        off = 2.0 ** -(n + 1) / (order - 1)
        entries = np.full((order, order), off)
        np.fill_diagonal(entries, 1.0 - off * (order - 1))
        return entries
    return GeneratorChain(order, producer, name="geometric")


@pytest.fixture
def write_manifest(tmp_path):
    """Write a manifest dict to tmp_path and return its path."""
    def _write(manifest, name="scenario.json"):
        path = tmp_path / name
        path.write_text(json.dumps(manifest), encoding="utf-8")
        return path
    return _write
