# tests/conftest.py - Shared fixtures: closed-form chains, measures and input files

import json

import numpy as np
import pytest

from core import measure as msr
from core.symbolic import FiniteMemoryFunction


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def symmetric_chain():
    """Two-state chain that switches with probability .3."""
    return np.array([[0.7, 0.3], [0.3, 0.7]])


@pytest.fixture
def circulant_chain():
    """Column-stochastic: q(i→i+1) = .7, q(i→i−1) = .2, q(i→i) = .1."""
    return np.array([[0.1, 0.2, 0.7],
                     [0.7, 0.1, 0.2],
                     [0.2, 0.7, 0.1]])


@pytest.fixture
def symmetric_jacobian(symmetric_chain):
    return msr.markov_invariant(symmetric_chain).log_irn


@pytest.fixture
def uniform_jacobian():
    return FiniteMemoryFunction(2, 1, np.log([0.5, 0.5]))


@pytest.fixture
def bernoulli_09():
    return msr.bernoulli([0.9, 0.1])


@pytest.fixture
def max_entropy():
    return msr.maximal_entropy(2)


@pytest.fixture
def plus_minus():
    """ξ = (1, −1) on two symbols."""
    return FiniteMemoryFunction(2, 1, [1.0, -1.0])


@pytest.fixture
def write_json(tmp_path):
    """Writes a payload to tmp_path/<name> and returns the path as a string."""
    def _write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)
    return _write
