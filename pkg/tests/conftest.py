"""Shared fixtures: generated dead leaves targets are cached per session
because several test modules measure the same targets."""

import numpy as np
import pytest

from acutance_bench import DeadLeavesParams, generate


@pytest.fixture(scope="session")
def dead_leaves():
    """Factory returning (and caching) targets keyed by size/seed/mode."""
    cache = {}

    def make(n: int, seed: int = 0, color_mode: str = "uniform-rgb"):
        key = (n, seed, color_mode)
        if key not in cache:
            cache[key] = generate(
                DeadLeavesParams(width=n, height=n, seed=seed, color_mode=color_mode)
            )
        return cache[key]

    return make


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
