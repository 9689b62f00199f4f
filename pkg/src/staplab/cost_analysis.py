"""Closed-form wall-clock cost model for AL versus one-shot acquisition.

Active learning acquires B*M_rounds/E points instead of B*M_rounds, but
pays for retraining after every acquisition round and for the selection
step itself. The training sum runs over dataset sizes D, D+B, ...,
D+B*R_al inclusive: one training per round plus the initial fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import InvalidModel


@dataclass(frozen=True)
class CostModel:
    """Timing and sizing parameters for one experimental setting.

    efficiency_gain is how many times fewer data points AL needs for the
    same error; initial_size, per_round, and rounds are counted in
    transition pairs (D = 32L, B = 8L for the defaults here).
    """

    efficiency_gain: float
    t_acquire: float
    t_train: float
    t_select: float
    initial_size: int
    per_round: int
    rounds: int

    def __post_init__(self):
        if self.efficiency_gain <= 0:
            raise InvalidModel("efficiency gain must be > 0")
        for name in ("t_acquire", "t_train", "t_select"):
            if getattr(self, name) < 0:
                raise InvalidModel(f"{name} must be >= 0")
        for name in ("initial_size", "per_round", "rounds"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise InvalidModel(f"{name} must be a non-negative integer")

    @property
    def al_rounds(self) -> int:
        """Acquisition rounds AL actually runs at equal final error."""
        return math.floor(self.rounds / self.efficiency_gain)


class NonAlCost(NamedTuple):
    acquire: float
    train: float
    total: float


class AlCost(NamedTuple):
    acquire: float
    train: float
    select: float
    total: float


def non_al_cost(cm: CostModel) -> NonAlCost:
    """Acquire everything up front, train once on the final dataset."""
    acquire = cm.per_round * cm.rounds * cm.t_acquire
    train = (cm.initial_size + cm.per_round * cm.rounds) * cm.t_train
    return NonAlCost(acquire, train, acquire + train)


def al_cost(cm: CostModel) -> AlCost:
    """Fewer acquisitions, but a training pass per dataset size plus selection."""
    r_al = cm.al_rounds
    acquire = cm.per_round * cm.rounds / cm.efficiency_gain * cm.t_acquire
    train = sum(cm.initial_size + cm.per_round * r
                for r in range(r_al + 1)) * cm.t_train
    select = r_al * cm.t_select
    return AlCost(acquire, train, select, acquire + train + select)


def al_reduces_cost(cm: CostModel) -> bool:
    return non_al_cost(cm).total > al_cost(cm).total
