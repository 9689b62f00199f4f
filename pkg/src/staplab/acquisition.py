"""Acquisition scores for initial conditions and sampling patterns.

Two route families on purpose: the plain functions below are direct
transcriptions that propagate rollout failures, while PatternScorer is
the cached search path the greedy optimizer uses (member self-rollouts
computed once, non-finite candidates mapped to -inf so they lose every
comparison). Tests hold the two routes equal on finite inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatch, ZeroCostPattern
from .rollout import (SamplingPattern, rollout_pairwise_values,
                      rollout_surrogate_values)
from .solvers import State, Trajectory
from .surrogate import Committee, forward_values, mean_forward_values


def _require_committee(committee: Committee) -> None:
    if committee.size < 2:
        raise ValueError("disagreement scores need at least two members")


def _sq_norm_after_start(diff: np.ndarray) -> float:
    # sum of squares over grid, summed over steps 1..L (row 0 excluded)
    return float(np.sum(diff[1:] ** 2))


def qbc_score(committee: Committee, u0: State, n_steps: int) -> float:
    """Committee disagreement over full self-rollouts from one start state.

    Mean over members of the summed squared distance to the per-step
    committee-mean trajectory.
    """
    _require_committee(committee)
    rollouts = np.stack([
        rollout_surrogate_values(m, u0.values[None, :], n_steps)[:, 0]
        for m in committee.members])
    center = rollouts.mean(axis=0)
    return float(np.sum((rollouts[:, 1:] - center[1:]) ** 2) / committee.size)


def qbc_scores(committee: Committee, pool_values: np.ndarray, n_steps: int,
               dtype=np.float32) -> np.ndarray:
    """Pool-scan variant of qbc_score: (R, Nx) starts -> (R,) scores.

    Rows whose rollout leaves the finite range score -inf instead of
    raising, so a diverged candidate simply never wins selection.
    """
    _require_committee(committee)
    pool_values = np.asarray(pool_values, dtype=np.float64)
    rollouts = np.stack([
        rollout_surrogate_values(m, pool_values, n_steps, dtype=dtype,
                                 check_finite=False)
        for m in committee.members])  # (M, L+1, R, Nx)
    with np.errstate(over="ignore", invalid="ignore"):
        center = rollouts.mean(axis=0)
        per_row = np.sum((rollouts[:, 1:] - center[None, 1:]) ** 2,
                         axis=(0, 1, 3)) / committee.size
    return np.where(np.isfinite(per_row), per_row, -np.inf)


def variance_reduction(traj_a: Trajectory, traj_b: Trajectory,
                       traj_bsa: Trajectory) -> float:
    """How much substituting one member's steps shrinks pair disagreement.

    traj_bsa is traj_b's rollout with the other member substituted at the
    pattern's solver positions; row 0 is excluded from both sums.
    """
    if not (len(traj_a) == len(traj_b) == len(traj_bsa)):
        raise ShapeMismatch("trajectories differ in length")
    if not (traj_a.grid == traj_b.grid == traj_bsa.grid):
        raise ShapeMismatch("trajectories differ in grid")
    full = _sq_norm_after_start(traj_a.values - traj_b.values)
    residual = _sq_norm_after_start(traj_a.values - traj_bsa.values)
    return full - residual


def stap_acquisition(committee: Committee, u0: State,
                     pattern: SamplingPattern) -> float:
    """Average variance reduction over all ordered member pairs."""
    _require_committee(committee)
    n_steps = len(pattern)
    members = committee.members
    selfs = [rollout_surrogate_values(m, u0.values[None, :], n_steps)[:, 0]
             for m in members]
    total = 0.0
    for a in range(len(members)):
        for b in range(len(members)):
            if a == b:
                continue
            mixed = rollout_pairwise_values(members[a], members[b],
                                            u0.values[None, :], pattern)[:, 0]
            total += (_sq_norm_after_start(selfs[a] - selfs[b])
                      - _sq_norm_after_start(selfs[a] - mixed))
    m = len(members)
    return total / (m * (m - 1))


def stap_mf_acquisition(committee: Committee, u0: State,
                        pattern: SamplingPattern) -> float:
    """Mean-field variant: the committee-mean operator plays the solver side."""
    _require_committee(committee)
    n_steps = len(pattern)
    mean_self = rollout_surrogate_values(committee, u0.values[None, :],
                                         n_steps)[:, 0]
    total = 0.0
    for member in committee.members:
        own = rollout_surrogate_values(member, u0.values[None, :],
                                       n_steps)[:, 0]
        mixed = rollout_pairwise_values(committee, member,
                                        u0.values[None, :], pattern)[:, 0]
        total += (_sq_norm_after_start(mean_self - own)
                  - _sq_norm_after_start(mean_self - mixed))
    return total / committee.size


def cost_weighted(score: float, pattern: SamplingPattern) -> float:
    """Score per solver step paid; undefined on free patterns."""
    cost = pattern.cost
    if cost == 0:
        raise ZeroCostPattern("all-false pattern has no cost to weight against")
    return score / cost


class PatternScorer:
    """Cached pattern scoring for one initial condition.

    Member self-rollouts and the pattern-independent first terms are
    computed once. Candidate patterns reuse the incumbent's two-operator
    rollouts up to the first flipped bit; promote_last() makes the most
    recently scored pattern the new incumbent after a greedy accept.
    Non-finite evaluations score -inf.
    """

    def __init__(self, committee: Committee, u0, n_steps: int,
                 variant: str = "stap", dtype=np.float32):
        _require_committee(committee)
        if variant not in ("stap", "stap_mf"):
            raise ValueError(f"unknown scoring variant {variant!r}")
        values = u0.values if isinstance(u0, State) else np.asarray(u0)
        self._u0 = np.asarray(values, dtype=np.float64)
        if self._u0.ndim != 1:
            raise ShapeMismatch("scorer takes a single start state")
        self._n_steps = n_steps
        self._dtype = dtype
        members = committee.members
        selfs = [rollout_surrogate_values(m, self._u0[None, :], n_steps,
                                          dtype=dtype, check_finite=False)[:, 0]
                 for m in members]
        if variant == "stap":
            self._pairs = [(members[a], members[b], selfs[a])
                           for a in range(len(members))
                           for b in range(len(members)) if a != b]
            first = [(selfs[a], selfs[b])
                     for a in range(len(members))
                     for b in range(len(members)) if a != b]
            self._divisor = len(members) * (len(members) - 1)
        else:
            mean_self = rollout_surrogate_values(
                committee, self._u0[None, :], n_steps,
                dtype=dtype, check_finite=False)[:, 0]
            self._pairs = [(committee, m, mean_self) for m in members]
            first = [(mean_self, s) for s in selfs]
            self._divisor = len(members)
        with np.errstate(over="ignore", invalid="ignore"):
            self._first_terms = [_sq_norm_after_start(ta - tb)
                                 for ta, tb in first]
        self._incumbent_bits: np.ndarray | None = None
        self._incumbent: list[np.ndarray] | None = None
        self._last_bits: np.ndarray | None = None
        self._last: list[np.ndarray] | None = None

    def _mixed_rollout(self, index: int, operator_true, operator_false,
                       bits: np.ndarray) -> np.ndarray:
        n = self._n_steps
        out = np.empty((n + 1, self._u0.size), dtype=np.float64)
        start = 0
        if self._incumbent_bits is not None:
            changed = np.nonzero(bits != self._incumbent_bits)[0]
            start = int(changed[0]) if changed.size else n
            out[:start + 1] = self._incumbent[index][:start + 1]
        else:
            out[0] = self._u0
        for i in range(start + 1, n + 1):
            operator = operator_true if bits[i - 1] else operator_false
            if isinstance(operator, Committee):
                out[i] = mean_forward_values(operator, out[i - 1],
                                             self._dtype, check_finite=False)
            else:
                out[i] = forward_values(operator, out[i - 1],
                                        self._dtype, check_finite=False)
        return out

    def score(self, pattern: SamplingPattern) -> float:
        """Acquisition value for this pattern; -inf when evaluation diverges."""
        if len(pattern) != self._n_steps:
            raise ShapeMismatch("pattern length disagrees with the scorer")
        bits = pattern.bits
        rollouts = []
        total = 0.0
        with np.errstate(over="ignore", invalid="ignore"):
            for idx, (op_true, op_false, traj_a) in enumerate(self._pairs):
                mixed = self._mixed_rollout(idx, op_true, op_false, bits)
                rollouts.append(mixed)
                total += (self._first_terms[idx]
                          - _sq_norm_after_start(traj_a - mixed))
        self._last_bits = bits
        self._last = rollouts
        # divide exactly as the plain functions do so the routes stay bit-equal
        value = total / self._divisor
        return value if np.isfinite(value) else float("-inf")

    def promote_last(self) -> None:
        """Adopt the most recently scored pattern as the reuse baseline."""
        if self._last is None:
            raise RuntimeError("no pattern has been scored yet")
        self._incumbent_bits = self._last_bits
        self._incumbent = self._last
