"""Rollout error metrics against ground-truth trajectories.

Committee evaluation keeps members separate the whole way: per-trajectory
metrics per member, averaged over trajectories, then over members. The
committee-mean prediction is never scored. Logs are natural logs.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ShapeMismatch, ZeroReference
from .rollout import rollout_surrogate_values
from .solvers import Trajectory
from .surrogate import Committee

# stand-in log error for a rollout that left the finite range; far above
# anything a surviving model produces, keeps averages and quantiles finite
DIVERGED_LOG_ERROR = 20.0

_METRIC_FIELDS = ("rmse", "nrmse", "mae", "log_rmse", "log_nrmse", "log_mae",
                  "q99", "q95", "q50")


def _residual_arrays(predicted: Trajectory, reference: Trajectory):
    if predicted.values.shape != reference.values.shape:
        raise ShapeMismatch(
            f"{predicted.values.shape} vs {reference.values.shape}")
    if predicted.grid != reference.grid:
        raise ShapeMismatch("trajectories live on different grids")
    # row 0 is the shared initial condition, not a prediction
    return predicted.values[1:], reference.values[1:]


def rmse(predicted: Trajectory, reference: Trajectory) -> float:
    pred, ref = _residual_arrays(predicted, reference)
    return float(np.sqrt(np.mean((pred - ref) ** 2)))


def nrmse(predicted: Trajectory, reference: Trajectory) -> float:
    """Root of the residual power over the reference power."""
    pred, ref = _residual_arrays(predicted, reference)
    denom = float(np.sum(ref ** 2))
    if denom == 0.0:
        raise ZeroReference("reference trajectory has zero power")
    return float(np.sqrt(np.sum((pred - ref) ** 2) / denom))


def mae(predicted: Trajectory, reference: Trajectory) -> float:
    pred, ref = _residual_arrays(predicted, reference)
    return float(np.mean(np.abs(pred - ref)))


def quantile(values, q: float) -> float:
    """Empirical quantile with linear interpolation between order statistics."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("quantile of an empty collection")
    return float(np.quantile(arr, q, method="linear"))


@dataclass(frozen=True)
class RoundMetrics:
    round_index: int
    rmse: float
    nrmse: float
    mae: float
    log_rmse: float
    log_nrmse: float
    log_mae: float
    q99: float
    q95: float
    q50: float


@dataclass
class MetricsReport:
    """Per-round records plus round-averaged logs (round 0 excluded).

    Round 0 is the pre-acquisition baseline; the averages follow the
    convention of summarizing only the acquisition rounds.
    """

    rounds: list[RoundMetrics]

    def _average(self, field: str) -> float | None:
        values = [getattr(r, field) for r in self.rounds if r.round_index >= 1]
        if not values:
            return None
        return float(np.mean(values))

    @property
    def averaged_log_rmse(self) -> float | None:
        return self._average("log_rmse")

    @property
    def averaged_log_nrmse(self) -> float | None:
        return self._average("log_nrmse")

    @property
    def averaged_log_mae(self) -> float | None:
        return self._average("log_mae")


def _per_trajectory_metrics(member, truth: np.ndarray, dtype) -> dict:
    """truth: (R, L+1, Nx) ground-truth stack -> per-trajectory metric arrays."""
    n_steps = truth.shape[1] - 1
    rolled = rollout_surrogate_values(member, truth[:, 0], n_steps,
                                      dtype=dtype, check_finite=False)
    pred = rolled[1:].transpose(1, 0, 2)  # (R, L, Nx)
    ref = truth[:, 1:]
    ref_power = np.sum(ref ** 2, axis=(1, 2))
    if np.any(ref_power == 0.0):
        raise ZeroReference("a reference trajectory has zero power")
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        res = pred - ref
        sq = np.mean(res ** 2, axis=(1, 2))
        traj_rmse = np.sqrt(sq)
        traj_nrmse = np.sqrt(np.sum(res ** 2, axis=(1, 2)) / ref_power)
        traj_mae = np.mean(np.abs(res), axis=(1, 2))
        ok = np.isfinite(pred).all(axis=(1, 2))
        cap = np.exp(DIVERGED_LOG_ERROR)
        traj_rmse = np.where(ok, traj_rmse, cap)
        traj_nrmse = np.where(ok, traj_nrmse, cap)
        traj_mae = np.where(ok, traj_mae, cap)
        log_rmse = np.where(ok, np.log(traj_rmse), DIVERGED_LOG_ERROR)
        log_nrmse = np.where(ok, np.log(traj_nrmse), DIVERGED_LOG_ERROR)
        log_mae = np.where(ok, np.log(traj_mae), DIVERGED_LOG_ERROR)
    return {"rmse": traj_rmse, "nrmse": traj_nrmse, "mae": traj_mae,
            "log_rmse": log_rmse, "log_nrmse": log_nrmse, "log_mae": log_mae}


def evaluate_committee(committee: Committee, test_set: list[Trajectory],
                       round_index: int = 0,
                       dtype=np.float32) -> RoundMetrics:
    """Score every member's self-rollout against the ground-truth test set.

    Returns the cross-member average of trajectory-averaged metrics and
    the pooled quantiles of per-trajectory log RMSE. A diverged rollout
    contributes the capped log error instead of propagating non-finites.
    """
    if not test_set:
        raise ValueError("test set must be non-empty")
    grid = test_set[0].grid
    length = len(test_set[0])
    for t in test_set[1:]:
        if t.grid != grid or len(t) != length:
            raise ShapeMismatch("test trajectories must share grid and length")
    truth = np.stack([t.values for t in test_set])  # (R, L+1, Nx)
    per_member = [_per_trajectory_metrics(m, truth, dtype)
                  for m in committee.members]
    means = {name: float(np.mean([mm[name].mean() for mm in per_member]))
             for name in ("rmse", "nrmse", "mae",
                          "log_rmse", "log_nrmse", "log_mae")}
    pooled = np.concatenate([mm["log_rmse"] for mm in per_member])
    return RoundMetrics(round_index=round_index,
                        q99=quantile(pooled, 0.99),
                        q95=quantile(pooled, 0.95),
                        q50=quantile(pooled, 0.50),
                        **means)


def write_metrics_csv(report: MetricsReport, path) -> None:
    """One row per (round, metric, value), rounds ascending."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "metric", "value"])
        for record in report.rounds:
            for name in _METRIC_FIELDS:
                writer.writerow([record.round_index, name,
                                 repr(getattr(record, name))])


def write_metrics_json(report: MetricsReport, path) -> None:
    payload = {
        "log_base": "natural",
        "rounds": [asdict(r) for r in report.rounds],
        "round_averaged": {
            "log_rmse": report.averaged_log_rmse,
            "log_nrmse": report.averaged_log_nrmse,
            "log_mae": report.averaged_log_mae,
        },
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def read_metrics_json(path) -> MetricsReport:
    with open(path) as fh:
        payload = json.load(fh)
    rounds = [RoundMetrics(**r) for r in payload["rounds"]]
    return MetricsReport(rounds)
