"""Shared fixtures: tiny specs and committees sized so the suite stays fast."""

from contextlib import contextmanager

import numpy as np
import pytest

from staplab.rng import RandomStream
from staplab.solvers import SpatialGrid, State, burgers_spec
from staplab.surrogate import (Architecture, Committee, NormStats,
                               SurrogateModel, make_committee)

UNIT_NORM = NormStats(mean=0.0, std=1.0)


def tiny_architecture(num_points=32, num_layers=1, channels=4, fourier_modes=4):
    return Architecture(num_points=num_points, num_layers=num_layers,
                        channels=channels, fourier_modes=fourier_modes)


def make_diverse_committee(arch, norm=UNIT_NORM, size=2, seed=0, spread=0.05):
    """Committee whose members genuinely disagree.

    Freshly initialized members are exact identity maps (zeroed projection),
    so every disagreement score would be 0. Jittering the full parameter
    vector gives distinct, stable, non-identity operators without training.
    """
    base = make_committee(arch, norm, size, RandomStream(seed))
    members = []
    for i, m in enumerate(base.members):
        noise = RandomStream(seed).child("jitter", i).standard_normal(
            m.parameters.size)
        members.append(SurrogateModel(m.parameters + spread * noise,
                                      arch, norm))
    return Committee(members)


def smooth_states(grid: SpatialGrid, count: int, seed: int = 0,
                  amplitude: float = 1.0, max_mode: int = 3) -> list[State]:
    """Random low-mode periodic profiles; always finite, modest amplitude."""
    gen = RandomStream(seed).child("smooth").generator
    x = grid.points
    states = []
    for _ in range(count):
        u = np.zeros(grid.num_points)
        for k in range(1, max_mode + 1):
            a, b = gen.uniform(-1.0, 1.0, 2)
            u += a * np.sin(2 * np.pi * k * x / grid.domain_length)
            u += b * np.cos(2 * np.pi * k * x / grid.domain_length)
        norm = np.max(np.abs(u))
        states.append(State(amplitude * u / norm, grid))
    return states


@contextmanager
def greedy_acceptance_recorder():
    """Capture the cost-weighted value at every incumbent promotion.

    The greedy search promotes exactly when it accepts a proposal (plus once
    for the all-true start), so the recorded list is the true accepted-score
    sequence, not a reconstruction from the accept rule.
    """
    from staplab.acquisition import PatternScorer, cost_weighted

    recorded: list[float] = []
    last_value: dict[int, float] = {}
    orig_score = PatternScorer.score
    orig_promote = PatternScorer.promote_last

    def score(self, pattern):
        value = orig_score(self, pattern)
        last_value[id(self)] = cost_weighted(value, pattern)
        return value

    def promote_last(self):
        recorded.append(last_value[id(self)])
        return orig_promote(self)

    PatternScorer.score = score
    PatternScorer.promote_last = promote_last
    try:
        yield recorded
    finally:
        PatternScorer.score = orig_score
        PatternScorer.promote_last = orig_promote


@pytest.fixture(scope="session")
def grid32():
    return SpatialGrid(32, 1.0)


@pytest.fixture(scope="session")
def burgers32():
    # short trajectories on a coarse grid keep solver tests near-instant
    return burgers_spec(num_points=32, trajectory_length=5)


@pytest.fixture(scope="session")
def committee32(grid32):
    return make_diverse_committee(tiny_architecture(32))
