"""Batch construction: pick start states, attach sampling patterns.

The batch builder loops base-selection -> pattern -> truncation until the
round budget is met exactly. Per-item random streams are derived from
(round, item) so replays do not depend on evaluation order or threading.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .acquisition import PatternScorer, cost_weighted, qbc_scores
from .errors import EmptyPool, InvalidConfig, PoolExhausted
from .rng import RandomStream
from .rollout import (SamplingPattern, StabilityFilter,
                      default_stability_filter)
from .solvers import State
from .surrogate import Committee

__all__ = [
    "BaseSelector", "PatternMode", "BatchItem", "GreedyConfig",
    "StabilityFilter", "default_stability_filter",
    "select_initial_random", "select_initial_qbc", "select_initial_sbal",
    "optimize_pattern", "truncate_pattern", "bernoulli_pattern",
    "initial_bernoulli_pattern", "build_batch",
]

_MAX_PATTERN_REDRAWS = 10_000


class BaseSelector(enum.Enum):
    RANDOM = "random"
    QBC = "qbc"
    SBAL = "sbal"


@dataclass(frozen=True)
class PatternMode:
    """Which pattern generator a run uses; probability only for Bernoulli kinds."""

    kind: str
    probability: float | None = None

    _KINDS = ("full", "stap", "stap_mf", "bernoulli", "initial_bernoulli")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise InvalidConfig(f"unknown pattern mode {self.kind!r}")
        needs_p = self.kind in ("bernoulli", "initial_bernoulli")
        if needs_p:
            if self.probability is None or not 0.0 < self.probability <= 1.0:
                raise InvalidConfig("Bernoulli modes need probability in (0, 1]")
        elif self.probability is not None:
            raise InvalidConfig(f"{self.kind} takes no probability")

    @classmethod
    def full(cls):
        return cls("full")

    @classmethod
    def stap(cls):
        return cls("stap")

    @classmethod
    def stap_mf(cls):
        return cls("stap_mf")

    @classmethod
    def bernoulli(cls, p: float):
        return cls("bernoulli", p)

    @classmethod
    def initial_bernoulli(cls, p: float):
        return cls("initial_bernoulli", p)


@dataclass(frozen=True)
class GreedyConfig:
    iterations: int = 100
    flip_probability: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 0:
            raise InvalidConfig("iterations must be >= 0")
        if not 0.0 < self.flip_probability < 1.0:
            raise InvalidConfig("flip probability must lie in (0, 1)")


@dataclass(eq=False)
class BatchItem:
    """One acquired start state with its sampling pattern.

    pool_index is the stable id of the start state within the run's
    candidate pool, kept for the run logs and the baseline-equivalence
    checks; it plays no role in acquisition itself.
    """

    initial_condition: State
    pattern: SamplingPattern
    pool_index: int | None = None


def select_initial_random(pool: list[State],
                          rng: RandomStream) -> tuple[int, State]:
    """Uniform pick; returns (index, state) so the caller can pop it."""
    if not pool:
        raise EmptyPool("cannot select from an empty pool")
    idx = int(rng.generator.integers(len(pool)))
    return idx, pool[idx]


def _pick_qbc(scores: np.ndarray) -> int:
    return int(np.argmax(scores))


def _pick_sbal(scores: np.ndarray, rng: RandomStream) -> int:
    weights = np.where(np.isfinite(scores), scores, 0.0)
    weights = np.maximum(weights, 0.0)
    total = weights.sum()
    if total <= 0.0:
        return int(rng.generator.integers(len(scores)))
    return int(rng.generator.choice(len(scores), p=weights / total))


def select_initial_qbc(pool: list[State], committee: Committee,
                       n_steps: int) -> tuple[int, State]:
    """Highest committee-disagreement candidate; ties go to the lowest index."""
    if not pool:
        raise EmptyPool("cannot select from an empty pool")
    scores = qbc_scores(committee, np.stack([s.values for s in pool]), n_steps)
    idx = _pick_qbc(scores)
    return idx, pool[idx]


def select_initial_sbal(pool: list[State], committee: Committee, n_steps: int,
                        rng: RandomStream) -> tuple[int, State]:
    """Stochastic pick proportional to disagreement; uniform when all zero."""
    if not pool:
        raise EmptyPool("cannot select from an empty pool")
    scores = qbc_scores(committee, np.stack([s.values for s in pool]), n_steps)
    idx = _pick_sbal(scores, rng)
    return idx, pool[idx]


def optimize_pattern(committee: Committee, u0: State, n_steps: int,
                     cfg: GreedyConfig, *, rng: RandomStream | None = None,
                     variant: str = "stap") -> SamplingPattern:
    """Greedy bit-flip search for a cost-effective sampling pattern.

    Starts all-true; each iteration XORs in an independent flip mask and
    keeps the proposal iff it still pays for at least one solver step and
    its cost-weighted score does not drop. Ties are accepted, so the
    accepted-score sequence is non-decreasing rather than increasing.
    """
    stream = rng if rng is not None else RandomStream(cfg.seed)
    gen = stream.generator
    scorer = PatternScorer(committee, u0, n_steps, variant=variant)
    bits = np.ones(n_steps, dtype=bool)
    current = cost_weighted(scorer.score(SamplingPattern(bits)),
                            SamplingPattern(bits))
    scorer.promote_last()
    for _ in range(cfg.iterations):
        mask = gen.random(n_steps) < cfg.flip_probability
        proposal = bits ^ mask
        if not proposal.any():
            continue
        candidate = SamplingPattern(proposal)
        value = cost_weighted(scorer.score(candidate), candidate)
        if value >= current:
            bits = proposal
            current = value
            scorer.promote_last()
    return SamplingPattern(bits)


def truncate_pattern(pattern: SamplingPattern,
                     remaining_budget: int) -> SamplingPattern:
    """Keep only the earliest solver steps the leftover budget can pay for."""
    if remaining_budget < 0:
        raise ValueError("remaining budget must be >= 0")
    if pattern.cost <= remaining_budget:
        return pattern
    bits = np.zeros(len(pattern), dtype=bool)
    keep = np.nonzero(pattern.bits)[0][:remaining_budget]
    bits[keep] = True
    return SamplingPattern(bits)


def bernoulli_pattern(p: float, n_steps: int,
                      rng: RandomStream) -> SamplingPattern:
    if not 0.0 <= p <= 1.0:
        raise InvalidConfig("probability must lie in [0, 1]")
    return SamplingPattern(rng.generator.random(n_steps) < p)


def initial_bernoulli_pattern(p: float, n_steps: int,
                              rng: RandomStream) -> SamplingPattern:
    """Bernoulli draw with all true entries moved to a contiguous prefix."""
    drawn = bernoulli_pattern(p, n_steps, rng)
    bits = np.zeros(n_steps, dtype=bool)
    bits[:drawn.cost] = True
    return SamplingPattern(bits)


def _draw_costly_pattern(mode: PatternMode, n_steps: int,
                         rng: RandomStream) -> SamplingPattern:
    # redraw until the pattern pays for at least one solver step
    draw = (bernoulli_pattern if mode.kind == "bernoulli"
            else initial_bernoulli_pattern)
    for _ in range(_MAX_PATTERN_REDRAWS):
        pattern = draw(mode.probability, n_steps, rng)
        if pattern.cost >= 1:
            return pattern
    raise InvalidConfig("Bernoulli pattern draws kept coming up all-false")


def build_batch(pool: list[State], committee: Committee, n_steps: int,
                budget: int, base: BaseSelector, pattern_mode: PatternMode,
                greedy_cfg: GreedyConfig, rng: RandomStream, *,
                pool_ids: list[int] | None = None,
                round_index: int = 0) -> list[BatchItem]:
    """Assemble one acquisition round worth exactly `budget` solver steps.

    Mutates pool (and pool_ids when given) by removing every selected
    start state, which is what makes selection without replacement hold
    across rounds.

    Disagreement scores are computed once for the whole pool: the committee
    is fixed for the round and batched scoring is row-independent, so the
    cached scores of the remaining candidates match what rescoring after
    each removal would produce.
    """
    if budget < 1:
        raise InvalidConfig("budget must be >= 1")
    if pool_ids is not None and len(pool_ids) != len(pool):
        raise InvalidConfig("pool_ids must parallel the pool")
    scores: np.ndarray | None = None
    if base in (BaseSelector.QBC, BaseSelector.SBAL) and pool:
        scores = qbc_scores(committee, np.stack([s.values for s in pool]),
                            n_steps)
    items: list[BatchItem] = []
    total = 0
    item_index = 0
    while total < budget:
        if not pool:
            raise PoolExhausted(
                f"pool emptied with {budget - total} budget unmet")
        stream = rng.child("round", round_index, "item", item_index)
        if base is BaseSelector.RANDOM:
            idx, _ = select_initial_random(pool, stream.child("select"))
        elif base is BaseSelector.QBC:
            idx = _pick_qbc(scores)
        else:
            idx = _pick_sbal(scores, stream.child("select"))
        state = pool.pop(idx)
        if scores is not None:
            scores = np.delete(scores, idx)
        stable_id = pool_ids.pop(idx) if pool_ids is not None else idx
        if pattern_mode.kind == "full":
            pattern = SamplingPattern.full(n_steps)
        elif pattern_mode.kind in ("stap", "stap_mf"):
            pattern = optimize_pattern(committee, state, n_steps, greedy_cfg,
                                       rng=stream.child("greedy"),
                                       variant=pattern_mode.kind)
        else:
            pattern = _draw_costly_pattern(pattern_mode, n_steps,
                                           stream.child("pattern"))
        pattern = truncate_pattern(pattern, budget - total)
        items.append(BatchItem(state, pattern, stable_id))
        total += pattern.cost
        item_index += 1
    return items
