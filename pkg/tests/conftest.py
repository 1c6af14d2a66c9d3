"""Shared problems and cached long runs."""

from functools import lru_cache

import pytest

from alphaprk import AlphaSearchPolicy, get_problem, integrate


@pytest.fixture
def pendulum():
    return get_problem("pendulum")


@pytest.fixture
def satellites():
    return get_problem("satellites")


@lru_cache(maxsize=None)
def cached_run(problem, family, h, T, failure="best-effort", fixed_alpha=None):
    """Full trajectory runs shared between test modules."""
    prob, s0 = get_problem(problem)
    policy = AlphaSearchPolicy(failure=failure, fixed_alpha=fixed_alpha)
    return integrate(prob, family, s0, h, T, policy)
