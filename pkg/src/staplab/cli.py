"""Command-line front end.

Commands: gen-pool (sample a candidate pool and ground-truth test set),
run (execute a configured experiment), eval (recompute stored metrics
from checkpoints and verify they match), patterns (dump a round's 0/1
sampling grid), cost (evaluate the wall-clock cost model).

Exit codes: 0 success, 2 usage or validation problem, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cost_analysis import CostModel, al_cost, al_reduces_cost, non_al_cost
from .errors import (InvalidArchitecture, InvalidConfig, InvalidModel,
                     StaplabError)
from .experiment import (RunWriter, default_config, last_completed_round,
                         load_committee, load_config, load_test_set,
                         make_pool_and_test, run_experiment)
from .metrics import evaluate_committee, read_metrics_json
from .rng import RandomStream
from .solvers import PdeKind

_METRIC_COLUMNS = ("log_rmse", "log_nrmse", "log_mae", "q99", "q95", "q50")


def _print_metrics_header() -> None:
    print(f"{'round':>5}  " + "  ".join(f"{c:>10}" for c in _METRIC_COLUMNS))


def _print_metrics_row(record) -> None:
    print(f"{record.round_index:>5}  " + "  ".join(
        f"{getattr(record, c):>10.4f}" for c in _METRIC_COLUMNS))


def cmd_gen_pool(args) -> int:
    if args.count < 1:
        raise InvalidConfig("--count must be >= 1")
    if args.test_count < 1:
        raise InvalidConfig("--test-count must be >= 1")
    kind = PdeKind(args.pde)
    cfg = default_config(kind)
    master = RandomStream(args.seed)
    pool, test = make_pool_and_test(cfg.pde, cfg.ic, args.count,
                                    args.test_count, master)
    writer = RunWriter(args.out, force=args.force)
    writer.write_pool(pool, cfg.pde, args.seed)
    writer.write_test(test, cfg.pde, args.seed)
    print(f"pool: {len(pool)} initial conditions")
    print(f"test: {len(test)} trajectories of length "
          f"{cfg.pde.trajectory_length}")
    print(f"seed lineage: RandomStream({args.seed}).child('pool'|'test', i)")
    return 0


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.out is not None:
        cfg.output_dir = str(args.out)
    printed_header = False

    def progress(record):
        nonlocal printed_header
        if not printed_header:
            _print_metrics_header()
            printed_header = True
        _print_metrics_row(record)

    artifacts = run_experiment(cfg, threads=args.threads, force=args.force,
                               progress=progress)
    report = artifacts.metrics
    if report.averaged_log_rmse is not None:
        print(f"round-averaged log RMSE (rounds >= 1): "
              f"{report.averaged_log_rmse:.4f}")
    if artifacts.output_dir is not None:
        print(f"artifacts: {artifacts.output_dir}")
    return 0


def cmd_eval(args) -> int:
    run_dir = Path(args.run_dir)
    if not run_dir.is_dir():
        raise InvalidConfig(f"run directory not found: {run_dir}")
    round_index = (args.round if args.round is not None
                   else last_completed_round(run_dir))
    committee = load_committee(run_dir, round_index)
    test_set = load_test_set(run_dir)
    recomputed = evaluate_committee(committee, test_set,
                                    round_index=round_index)
    report = read_metrics_json(run_dir / "metrics.json")
    stored = next((r for r in report.rounds
                   if r.round_index == round_index), None)
    if stored is None:
        raise InvalidConfig(f"metrics for round {round_index} not stored")
    _print_metrics_header()
    _print_metrics_row(recomputed)
    if stored != recomputed:
        print("stored metrics DIFFER from recomputation:", file=sys.stderr)
        print(f"  stored:     {stored}", file=sys.stderr)
        print(f"  recomputed: {recomputed}", file=sys.stderr)
        return 1
    print(f"round {round_index}: recomputation matches the stored report")
    return 0


def cmd_patterns(args) -> int:
    run_dir = Path(args.run_dir)
    if not run_dir.is_dir():
        raise InvalidConfig(f"run directory not found: {run_dir}")
    round_index = (args.round if args.round is not None
                   else last_completed_round(run_dir))
    if round_index < 1:
        raise InvalidConfig("patterns exist for rounds >= 1 only")
    source = run_dir / f"round_{round_index:03d}" / "patterns.csv"
    if not source.exists():
        raise InvalidConfig(f"no pattern grid stored at {source}")
    content = source.read_text()
    if args.out is not None:
        Path(args.out).write_text(content)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(content)
    return 0


def cmd_cost(args) -> int:
    params_path = Path(args.params)
    if not params_path.exists():
        raise InvalidConfig(f"parameter file not found: {params_path}")
    with open(params_path) as fh:
        doc = json.load(fh)
    try:
        model = CostModel(**doc)
    except TypeError as err:
        raise InvalidConfig(f"bad cost parameters: {err}") from err
    plain = non_al_cost(model)
    al = al_cost(model)
    print(f"non-AL: acquire {plain.acquire:.3f}  train {plain.train:.3f}  "
          f"total {plain.total:.3f}")
    print(f"AL:     acquire {al.acquire:.3f}  train {al.train:.3f}  "
          f"select {al.select:.3f}  total {al.total:.3f}")
    verdict = al_reduces_cost(model)
    print(f"AL reduces total cost: {'yes' if verdict else 'no'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="staplab",
        description="Active-learning laboratory for autoregressive PDE "
                    "surrogates with per-step solver/surrogate scheduling.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-pool", help="sample a candidate pool and test set")
    p.add_argument("--pde", required=True, choices=[k.value for k in PdeKind])
    p.add_argument("--count", type=int, required=True,
                   help="pool size (initial conditions)")
    p.add_argument("--test-count", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--force", action="store_true",
                   help="write into a non-empty directory")
    p.set_defaults(func=cmd_gen_pool)

    p = sub.add_parser("run", help="execute a configured experiment")
    p.add_argument("--config", required=True, help="JSON config path")
    p.add_argument("--out", default=None,
                   help="output directory (overrides the config)")
    p.add_argument("--force", action="store_true",
                   help="write into a non-empty directory")
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap; falls back to STAP_THREADS, then 1")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="recompute and verify stored metrics")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--round", type=int, default=None,
                   help="round to check (default: last completed)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("patterns", help="dump a round's 0/1 sampling grid")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--round", type=int, default=None,
                   help="round to dump (default: last completed)")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_patterns)

    p = sub.add_parser("cost", help="evaluate the wall-clock cost model")
    p.add_argument("--params", required=True,
                   help="JSON file with cost-model fields")
    p.set_defaults(func=cmd_cost)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidConfig, InvalidModel, InvalidArchitecture,
            FileNotFoundError, FileExistsError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except StaplabError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
