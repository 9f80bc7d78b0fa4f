"""Shared fixtures: cached spectral operators and coefficients per resolution."""

from functools import lru_cache

import pytest

from bgknet import NodeOperators, NodeTopology, compute_coefficients


@lru_cache(maxsize=16)
def cached_ops(N: int) -> NodeOperators:
    return NodeOperators.build(N)


@lru_cache(maxsize=32)
def cached_coefficients(N: int, n):
    return compute_coefficients(cached_ops(N), NodeTopology.symmetric(n))


@pytest.fixture(scope="session")
def ops_factory():
    return cached_ops


@pytest.fixture(scope="session")
def coeff_factory():
    return cached_coefficients
