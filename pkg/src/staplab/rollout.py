"""Trajectory generation by surrogates, solvers, and mixtures of the two.

A sampling pattern is a boolean mask over macro steps: True means the
numerical solver advances the state (producing a training pair), False
means the committee mean does. Pure-surrogate and two-operator rollouts
live here as well because the acquisition scores are built from them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (NonFiniteOutput, NumericalBlowup, ShapeMismatch,
                     StepSizeUnderflow)
from .solvers import PdeKind, PdeSpec, State, Trajectory, step_values
from .surrogate import (Committee, SurrogateModel, TransitionPair,
                        forward_values, mean_forward_values)


@dataclass(eq=False)
class SamplingPattern:
    """Per-step choice of operator: bit i-1 governs macro step i."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.array(self.bits, dtype=bool)
        if bits.ndim != 1 or bits.size == 0:
            raise ValueError("pattern bits must form a non-empty 1-d array")
        bits.setflags(write=False)
        self.bits = bits

    @classmethod
    def full(cls, length: int) -> "SamplingPattern":
        """All-solver pattern; the greedy search starts from this."""
        return cls(np.ones(length, dtype=bool))

    @property
    def cost(self) -> int:
        return int(self.bits.sum())

    def __len__(self) -> int:
        return self.bits.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, SamplingPattern):
            return NotImplemented
        return self.bits.size == other.bits.size and bool(
            np.all(self.bits == other.bits))

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())

    def __repr__(self) -> str:
        return "SamplingPattern(" + "".join(
            "1" if b else "0" for b in self.bits) + ")"


@dataclass(frozen=True)
class StabilityFilter:
    """Drops training pairs whose input amplitude exceeds a threshold.

    Dispersive rollouts can wander into states far outside anything the
    committee was trained on; pairs taken there poison the dataset.
    """

    threshold: float = 10.0

    def passes(self, values: np.ndarray) -> bool:
        return bool(np.max(np.abs(values)) <= self.threshold)


def default_stability_filter(spec: PdeSpec) -> StabilityFilter | None:
    """Amplitude guard for the dispersive equation only."""
    if spec.kind is PdeKind.KDV:
        return StabilityFilter()
    return None


@dataclass(eq=False)
class AcquisitionResult:
    """Everything one interleaved rollout produced.

    The trajectory is truncated when a solver or surrogate step failed;
    aborted_at then holds the failing step index and diagnostic says why.
    """

    trajectory: Trajectory
    acquired_pairs: list[TransitionPair]
    filtered_count: int = 0
    aborted_at: int | None = None
    diagnostic: str | None = None

    @property
    def cost(self) -> int:
        """Solver pairs retained for training."""
        return len(self.acquired_pairs)

    @property
    def solver_invocations(self) -> int:
        """Successful solver macro steps, retained or filtered."""
        return len(self.acquired_pairs) + self.filtered_count


def _advance(operator, u: np.ndarray, dtype, check_finite: bool) -> np.ndarray:
    if isinstance(operator, Committee):
        return mean_forward_values(operator, u, dtype, check_finite)
    return forward_values(operator, u, dtype, check_finite)


def rollout_surrogate_values(model: SurrogateModel | Committee, u: np.ndarray,
                             n_steps: int, *, dtype=np.float32,
                             check_finite: bool = True) -> np.ndarray:
    """Self-rollout on raw rows: (R, Nx) -> (n_steps + 1, R, Nx).

    A committee in the model slot rolls out under the committee mean.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise ShapeMismatch(f"expected (rows, points), got shape {u.shape}")
    out = np.empty((n_steps + 1,) + u.shape, dtype=np.float64)
    out[0] = u
    for i in range(1, n_steps + 1):
        try:
            out[i] = _advance(model, out[i - 1], dtype, check_finite)
        except NonFiniteOutput as err:
            raise NonFiniteOutput(f"step {i}: {err}", step_index=i) from err
    return out


def rollout_surrogate(model: SurrogateModel, u0: State,
                      n_steps: int) -> Trajectory:
    """Repeatedly apply one surrogate; fails loudly on non-finite output."""
    values = rollout_surrogate_values(model, u0.values[None, :], n_steps)
    return Trajectory(values[:, 0], u0.grid)


def rollout_mean(committee: Committee, u0: State, n_steps: int) -> Trajectory:
    """Self-rollout under the committee-mean operator."""
    values = rollout_surrogate_values(committee, u0.values[None, :], n_steps)
    return Trajectory(values[:, 0], u0.grid)


def rollout_pairwise_values(operator_true, operator_false, u: np.ndarray,
                            pattern: SamplingPattern, *, dtype=np.float32,
                            check_finite: bool = True) -> np.ndarray:
    """Two-operator rollout on raw rows, switching per pattern bit.

    Either slot accepts a single model or a whole committee (applied as
    its mean). This is the engine behind the variance-reduction scores.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise ShapeMismatch(f"expected (rows, points), got shape {u.shape}")
    bits = pattern.bits
    out = np.empty((bits.size + 1,) + u.shape, dtype=np.float64)
    out[0] = u
    for i in range(1, bits.size + 1):
        operator = operator_true if bits[i - 1] else operator_false
        try:
            out[i] = _advance(operator, out[i - 1], dtype, check_finite)
        except NonFiniteOutput as err:
            raise NonFiniteOutput(f"step {i}: {err}", step_index=i) from err
    return out


def rollout_pairwise(operator_true, operator_false, u0: State,
                     pattern: SamplingPattern) -> Trajectory:
    values = rollout_pairwise_values(operator_true, operator_false,
                                     u0.values[None, :], pattern)
    return Trajectory(values[:, 0], u0.grid)


def rollout_interleaved(spec: PdeSpec, committee: Committee, u0: State,
                        pattern: SamplingPattern,
                        stability_filter: StabilityFilter | None = None,
                        ) -> AcquisitionResult:
    """Mixed rollout: solver at true bits, committee mean at false bits.

    Every solver step yields a candidate pair (state before, state after);
    the filter can drop a pair whose input is out of range, but the solver
    output still continues the trajectory. A solver failure or a diverged
    surrogate step aborts the rollout, returning what was acquired so far.
    """
    if u0.grid != spec.grid:
        raise ShapeMismatch("initial state grid disagrees with the PDE spec")
    bits = pattern.bits
    grid = spec.grid
    buf = np.empty((bits.size + 1, grid.num_points), dtype=np.float64)
    buf[0] = u0.values
    pairs: list[TransitionPair] = []
    filtered = 0
    for i in range(1, bits.size + 1):
        prev = buf[i - 1]
        if bits[i - 1]:
            try:
                nxt = step_values(prev, spec)
            except (NumericalBlowup, StepSizeUnderflow) as err:
                return AcquisitionResult(
                    Trajectory(buf[:i].copy(), grid, spec), pairs, filtered,
                    aborted_at=i, diagnostic=f"solver failed at step {i}: {err}")
            if stability_filter is None or stability_filter.passes(prev):
                pairs.append(TransitionPair(State(prev.copy(), grid),
                                            State(nxt.copy(), grid)))
            else:
                filtered += 1
        else:
            try:
                nxt = mean_forward_values(committee, prev)
            except NonFiniteOutput as err:
                return AcquisitionResult(
                    Trajectory(buf[:i].copy(), grid, spec), pairs, filtered,
                    aborted_at=i,
                    diagnostic=f"surrogate diverged at step {i}: {err}")
        buf[i] = nxt
    return AcquisitionResult(Trajectory(buf, grid, spec), pairs, filtered)
