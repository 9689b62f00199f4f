"""End-to-end active-learning driver: pool generation, round loop, persistence.

One round = build a batch with the committee trained so far, acquire each
item through the interleaved rollout, extend the dataset, retrain the
committee from fresh initialization, evaluate on the held-out test set,
persist. Round 0 is the pre-acquisition baseline: train on the initial
dataset and evaluate, so learning curves share a common starting point.

Everything on disk is a pure function of (config, master_seed): states
and trajectories as little-endian float64 blobs with JSON sidecars,
metrics as CSV plus a JSON summary, checkpoints as JSON header + blob.
"""

from __future__ import annotations

import dataclasses
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (InvalidConfig, NonFiniteOutput, NumericalBlowup,
                     StepSizeUnderflow)
from .initial_conditions import (IcKind, IcSpec, default_ic_spec,
                                 make_initial_condition, sample_raw)
from .metrics import (MetricsReport, RoundMetrics, evaluate_committee,
                      write_metrics_csv, write_metrics_json)
from .rng import RandomStream
from .rollout import (AcquisitionResult, StabilityFilter,
                      default_stability_filter, rollout_interleaved)
from .selection import (BaseSelector, BatchItem, GreedyConfig, PatternMode,
                        build_batch)
from .acquisition import cost_weighted, stap_acquisition, stap_mf_acquisition
from .solvers import (PdeKind, PdeSpec, SpatialGrid, State, Trajectory,
                      burgers_spec, evolve, evolve_values, kdv_spec, ks_spec,
                      step_values)
from .surrogate import (Architecture, Committee, Dataset, NormStats,
                        SurrogateModel, TrainConfig, TransitionPair,
                        compute_norm_stats, make_committee, train_committee)
from .util import resolve_threads


@dataclass
class ExperimentConfig:
    """Everything one run needs; mirrors the JSON config document."""

    pde: PdeSpec
    ic: IcSpec
    architecture: Architecture
    pool_size: int = 512
    test_size: int = 128
    initial_trajectories: int = 32
    rounds: int = 10
    budget: int | None = None  # None resolves to 8 * trajectory_length
    committee_size: int = 2
    base_selector: BaseSelector = BaseSelector.RANDOM
    pattern_mode: PatternMode = field(default_factory=PatternMode.full)
    greedy: GreedyConfig = field(default_factory=GreedyConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    stability_filter: StabilityFilter | None = None
    master_seed: int = 0
    output_dir: str | None = None

    def __post_init__(self):
        if self.budget is None:
            self.budget = 8 * self.pde.trajectory_length
        if self.budget < 1:
            raise InvalidConfig("budget must be >= 1")
        if self.committee_size < 2:
            raise InvalidConfig("committee size must be >= 2")
        if self.initial_trajectories < 1:
            raise InvalidConfig("initial_trajectories must be >= 1")
        if self.rounds < 0:
            raise InvalidConfig("rounds must be >= 0")
        if self.test_size < 1:
            raise InvalidConfig("test_size must be >= 1")
        if self.architecture.num_points != self.pde.grid.num_points:
            raise InvalidConfig("architecture and PDE grid disagree on size")
        if self.pool_size <= self.initial_trajectories:
            raise InvalidConfig("pool must be larger than the initial dataset")
        # every item costs at most L, so this many picks happen per run at
        # minimum; fewer pool entries guarantee PoolExhausted mid-run
        length = self.pde.trajectory_length
        guaranteed = (self.initial_trajectories
                      + self.rounds * -(-self.budget // length))
        if self.pool_size < guaranteed:
            raise InvalidConfig(
                f"pool_size {self.pool_size} cannot cover "
                f"{self.rounds} rounds (needs at least {guaranteed})")
        worst_case = self.initial_trajectories + self.rounds * self.budget
        if (self.pattern_mode.kind in ("bernoulli", "initial_bernoulli")
                and self.pool_size < worst_case):
            warnings.warn(
                f"pool_size {self.pool_size} can exhaust before round "
                f"{self.rounds} if items keep costing one step "
                f"(worst case {worst_case})", RuntimeWarning, stacklevel=2)


def default_config(kind: PdeKind | str, **overrides) -> ExperimentConfig:
    """Desk-scale defaults for one of the three equations."""
    kind = PdeKind(kind) if isinstance(kind, str) else kind
    spec = {PdeKind.BURGERS: burgers_spec,
            PdeKind.KDV: kdv_spec,
            PdeKind.KS: ks_spec}[kind]()
    cfg = ExperimentConfig(pde=spec, ic=default_ic_spec(kind),
                           architecture=Architecture(spec.grid.num_points),
                           stability_filter=default_stability_filter(spec))
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


# --- config JSON round-trip ------------------------------------------------

def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "pde": {
            "kind": cfg.pde.kind.value,
            "time_horizon": cfg.pde.time_horizon,
            "trajectory_length": cfg.pde.trajectory_length,
            "num_points": cfg.pde.grid.num_points,
            "domain_length": cfg.pde.grid.domain_length,
            "viscosity": cfg.pde.viscosity,
            "substeps": cfg.pde.substeps,
        },
        "ic": {
            "kind": cfg.ic.kind.value,
            "num_terms": cfg.ic.num_terms,
            "wavenumber_set": list(cfg.ic.wavenumber_set),
            "grf_scale": cfg.ic.grf_scale,
            "grf_shift": cfg.ic.grf_shift,
            "warmup_steps": cfg.ic.warmup_steps,
        },
        "architecture": {
            "num_points": cfg.architecture.num_points,
            "num_layers": cfg.architecture.num_layers,
            "channels": cfg.architecture.channels,
            "fourier_modes": cfg.architecture.fourier_modes,
            "activation": cfg.architecture.activation,
        },
        "pool_size": cfg.pool_size,
        "test_size": cfg.test_size,
        "initial_trajectories": cfg.initial_trajectories,
        "rounds": cfg.rounds,
        "budget": cfg.budget,
        "committee_size": cfg.committee_size,
        "base_selector": cfg.base_selector.value,
        "pattern_mode": {"kind": cfg.pattern_mode.kind,
                         "probability": cfg.pattern_mode.probability},
        "greedy": {"iterations": cfg.greedy.iterations,
                   "flip_probability": cfg.greedy.flip_probability,
                   "seed": cfg.greedy.seed},
        "train": {"epochs": cfg.train.epochs,
                  "learning_rate": cfg.train.learning_rate,
                  "batch_size": cfg.train.batch_size,
                  "seed": cfg.train.seed,
                  "dtype": cfg.train.dtype},
        "stability_filter": (None if cfg.stability_filter is None
                             else {"threshold": cfg.stability_filter.threshold}),
        "master_seed": cfg.master_seed,
        "output_dir": cfg.output_dir,
    }


def config_from_dict(doc: dict) -> ExperimentConfig:
    try:
        pde_doc = doc["pde"]
        grid = SpatialGrid(pde_doc["num_points"], pde_doc["domain_length"])
        pde = PdeSpec(PdeKind(pde_doc["kind"]), pde_doc["time_horizon"],
                      pde_doc["trajectory_length"], grid,
                      viscosity=pde_doc.get("viscosity", 0.0),
                      substeps=pde_doc.get("substeps"))
        ic_doc = doc["ic"]
        ic = IcSpec(IcKind(ic_doc["kind"]), ic_doc.get("num_terms", 0),
                    tuple(ic_doc.get("wavenumber_set", ())),
                    ic_doc.get("grf_scale", 25.0), ic_doc.get("grf_shift", 25.0),
                    ic_doc.get("warmup_steps", 4))
        arch_doc = doc["architecture"]
        arch = Architecture(arch_doc["num_points"], arch_doc["num_layers"],
                            arch_doc["channels"], arch_doc["fourier_modes"],
                            arch_doc.get("activation", "sigmoid_gelu"))
        filt_doc = doc.get("stability_filter")
        filt = None if filt_doc is None else StabilityFilter(filt_doc["threshold"])
        mode_doc = doc["pattern_mode"]
        greedy_doc = doc.get("greedy", {})
        train_doc = doc.get("train", {})
        return ExperimentConfig(
            pde=pde, ic=ic, architecture=arch,
            pool_size=doc["pool_size"], test_size=doc["test_size"],
            initial_trajectories=doc.get("initial_trajectories", 32),
            rounds=doc["rounds"], budget=doc.get("budget"),
            committee_size=doc.get("committee_size", 2),
            base_selector=BaseSelector(doc.get("base_selector", "random")),
            pattern_mode=PatternMode(mode_doc["kind"],
                                     mode_doc.get("probability")),
            greedy=GreedyConfig(greedy_doc.get("iterations", 100),
                                greedy_doc.get("flip_probability", 0.1),
                                greedy_doc.get("seed", 0)),
            train=TrainConfig(**train_doc),
            stability_filter=filt,
            master_seed=doc.get("master_seed", 0),
            output_dir=doc.get("output_dir"),
        )
    except KeyError as err:
        raise InvalidConfig(f"config document is missing {err}") from err


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise InvalidConfig(f"config file not found: {path}")
    with open(path) as fh:
        return config_from_dict(json.load(fh))


# --- pool / test / initial dataset ------------------------------------------

def _warmed_states(pde: PdeSpec, ic: IcSpec, master: RandomStream, label: str,
                   count: int) -> list[State]:
    """Per-stream raw draws, then batched warmup with a per-item fallback.

    The batched path is bit-identical to make_initial_condition whenever
    no warmup step blows up (row-independent solvers); on any failure the
    whole group is redone item by item, replaying each stream from its
    start so retries land exactly where the sequential contract puts them.
    """
    grid = pde.grid
    raw = [sample_raw(ic, grid, master.child(label, i)) for i in range(count)]
    steps = ic.warmup_steps
    if steps == 0:
        return raw
    try:
        values = np.stack([s.values for s in raw])
        for _ in range(steps):
            values = step_values(values, pde)
        return [State(row, grid) for row in values]
    except (NumericalBlowup, StepSizeUnderflow):
        return [make_initial_condition(ic, pde, master.child(label, i))
                for i in range(count)]


def make_pool_and_test(pde: PdeSpec, ic: IcSpec, pool_size: int,
                       test_size: int, master: RandomStream,
                       ) -> tuple[list[State], list[Trajectory]]:
    """Warmed-up candidate pool plus fully solved ground-truth test set."""
    pool = _warmed_states(pde, ic, master, "pool", pool_size)
    test_ics = _warmed_states(pde, ic, master, "test", test_size)
    length = pde.trajectory_length
    try:
        stacked = evolve_values(np.stack([s.values for s in test_ics]),
                                pde, length)
        test = [Trajectory(stacked[:, r].copy(), pde.grid, pde)
                for r in range(len(test_ics))]
    except (NumericalBlowup, StepSizeUnderflow):
        test = [evolve(s, pde, length) for s in test_ics]
    return pool, test


def generate_pool_and_test(cfg: ExperimentConfig,
                           master: RandomStream | None = None,
                           ) -> tuple[list[State], list[Trajectory]]:
    if master is None:
        master = RandomStream(cfg.master_seed)
    return make_pool_and_test(cfg.pde, cfg.ic, cfg.pool_size, cfg.test_size,
                              master)


def build_initial_dataset(pool: list[State], cfg: ExperimentConfig,
                          pool_ids: list[int] | None = None,
                          ) -> tuple[Dataset, list[int]]:
    """Consume the first initial_trajectories pool entries as full rollouts.

    All L transition pairs of every trajectory go into the dataset; the
    normalization statistics are computed from these pairs alone and stay
    fixed for the whole run.
    """
    count = cfg.initial_trajectories
    if len(pool) < count:
        raise InvalidConfig("pool is smaller than initial_trajectories")
    taken = pool[:count]
    del pool[:count]
    if pool_ids is not None:
        used_ids = pool_ids[:count]
        del pool_ids[:count]
    else:
        used_ids = list(range(count))
    length = cfg.pde.trajectory_length
    grid = cfg.pde.grid
    stacked = evolve_values(np.stack([s.values for s in taken]), cfg.pde,
                            length)
    pairs = [TransitionPair(State(stacked[i - 1, r].copy(), grid),
                            State(stacked[i, r].copy(), grid))
             for r in range(count) for i in range(1, length + 1)]
    return Dataset(pairs, compute_norm_stats(pairs)), used_ids


# --- persistence -------------------------------------------------------------

def write_f64_blob(path, array: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(np.ascontiguousarray(array, dtype="<f8").tobytes())


def read_f64_blob(path, shape) -> np.ndarray:
    data = np.fromfile(path, dtype="<f8")
    return data.astype(np.float64).reshape(shape)


def save_model(model: SurrogateModel, base_path) -> None:
    """JSON header plus a little-endian float64 parameter blob."""
    base = Path(base_path)
    arch = model.architecture
    header = {
        "architecture": {
            "num_points": arch.num_points, "num_layers": arch.num_layers,
            "channels": arch.channels, "fourier_modes": arch.fourier_modes,
            "activation": arch.activation,
        },
        "norm": {"mean": model.norm.mean, "std": model.norm.std},
        "seed_info": model.seed_info,
        "train_history": model.train_history,
        "parameter_count": int(model.parameters.size),
        "parameters_file": base.with_suffix(".f64").name,
    }
    with open(base.with_suffix(".json"), "w") as fh:
        json.dump(header, fh, indent=2)
        fh.write("\n")
    write_f64_blob(base.with_suffix(".f64"), model.parameters)


def load_model(json_path) -> SurrogateModel:
    json_path = Path(json_path)
    with open(json_path) as fh:
        header = json.load(fh)
    arch = Architecture(**header["architecture"])
    norm = NormStats(**header["norm"])
    params = read_f64_blob(json_path.parent / header["parameters_file"],
                           (header["parameter_count"],))
    return SurrogateModel(params, arch, norm,
                          seed_info=header.get("seed_info", ""),
                          train_history=header.get("train_history"))


class RunWriter:
    """Owns the on-disk layout of one run directory."""

    def __init__(self, out_dir, force: bool = False):
        self.root = Path(out_dir)
        if self.root.exists() and any(self.root.iterdir()) and not force:
            raise FileExistsError(
                f"output directory {self.root} is not empty (use force)")
        self.root.mkdir(parents=True, exist_ok=True)

    def _sidecar(self, path, payload: dict) -> None:
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")

    def write_config(self, cfg: ExperimentConfig) -> None:
        self._sidecar(self.root / "config.json", config_to_dict(cfg))

    def write_pool(self, pool: list[State], pde: PdeSpec,
                   master_seed: int) -> None:
        array = np.stack([s.values for s in pool])
        write_f64_blob(self.root / "pool.f64", array)
        self._sidecar(self.root / "pool.json", {
            "shape": list(array.shape),
            "num_points": pde.grid.num_points,
            "domain_length": pde.grid.domain_length,
            "macro_dt": pde.macro_dt,
            "trajectory_length": pde.trajectory_length,
            "seed_lineage": f"RandomStream({master_seed}).child('pool', i)",
        })

    def write_test(self, test: list[Trajectory], pde: PdeSpec,
                   master_seed: int) -> None:
        array = np.stack([t.values for t in test])
        write_f64_blob(self.root / "test.f64", array)
        self._sidecar(self.root / "test.json", {
            "shape": list(array.shape),
            "num_points": pde.grid.num_points,
            "domain_length": pde.grid.domain_length,
            "macro_dt": pde.macro_dt,
            "trajectory_length": pde.trajectory_length,
            "seed_lineage": f"RandomStream({master_seed}).child('test', i)",
        })

    def write_initial_dataset(self, dataset: Dataset,
                              used_ids: list[int]) -> None:
        array = np.stack([np.stack([p.input.values, p.output.values])
                          for p in dataset.pairs])
        write_f64_blob(self.root / "initial_dataset.f64", array)
        self._sidecar(self.root / "initial_dataset.json", {
            "shape": list(array.shape),
            "pool_indices": used_ids,
            "norm": {"mean": dataset.norm.mean, "std": dataset.norm.std},
        })

    def round_dir(self, round_index: int) -> Path:
        path = self.root / f"round_{round_index:03d}"
        path.mkdir(exist_ok=True)
        return path

    def write_acquisition(self, round_index: int, items: list[BatchItem],
                          results: list[AcquisitionResult],
                          scores: list[float | None]) -> None:
        rdir = self.round_dir(round_index)
        retained = [np.stack([np.stack([p.input.values, p.output.values])
                              for p in res.acquired_pairs])
                    if res.acquired_pairs else
                    np.empty((0, 2, items[0].initial_condition.grid.num_points))
                    for res in results]
        array = (np.concatenate(retained) if retained else
                 np.empty((0, 2, 0)))
        write_f64_blob(rdir / "acquired.f64", array)
        log = {
            "round": round_index,
            "pairs_shape": list(array.shape),
            "items": [{
                "pool_index": item.pool_index,
                "pattern": "".join("1" if b else "0" for b in item.pattern.bits),
                "cost": item.pattern.cost,
                "retained": res.cost,
                "filtered_count": res.filtered_count,
                "solver_invocations": res.solver_invocations,
                "aborted_at": res.aborted_at,
                "diagnostic": res.diagnostic,
                "pattern_score": score,
            } for item, res, score in zip(items, results, scores)],
        }
        self._sidecar(rdir / "acquisition.json", log)
        with open(rdir / "patterns.csv", "w") as fh:
            for item in items:
                fh.write(",".join("1" if b else "0"
                                  for b in item.pattern.bits) + "\n")

    def write_checkpoints(self, round_index: int, committee: Committee) -> None:
        rdir = self.round_dir(round_index)
        for idx, member in enumerate(committee.members):
            save_model(member, rdir / f"member_{idx:02d}")

    def write_metrics(self, report: MetricsReport) -> None:
        write_metrics_csv(report, self.root / "metrics.csv")
        write_metrics_json(report, self.root / "metrics.json")

    def write_manifest(self, cfg: ExperimentConfig, completed_rounds: int,
                       solver_invocations: int) -> None:
        self._sidecar(self.root / "run.json", {
            "completed_rounds": completed_rounds,
            "solver_invocations": solver_invocations,
            "master_seed": cfg.master_seed,
            "pde_kind": cfg.pde.kind.value,
        })


# --- the round loop ----------------------------------------------------------

@dataclass(eq=False)
class RunState:
    """Mutable progress of one experiment between rounds."""

    config: ExperimentConfig
    master: RandomStream
    pool: list[State]
    pool_ids: list[int]
    test_set: list[Trajectory]
    dataset: Dataset
    committee: Committee
    round_index: int
    metrics_rounds: list[RoundMetrics]
    acquisition_logs: list[list[dict]]
    solver_invocations: int
    threads: int = 1
    writer: RunWriter | None = None


@dataclass(eq=False)
class RunArtifacts:
    config: ExperimentConfig
    metrics: MetricsReport
    committee: Committee
    dataset: Dataset
    pool: list[State]
    pool_ids: list[int]
    test_set: list[Trajectory]
    acquisition_logs: list[list[dict]]
    solver_invocations: int
    output_dir: Path | None


def _pattern_score(cfg: ExperimentConfig, committee: Committee,
                   item: BatchItem) -> float | None:
    if cfg.pattern_mode.kind not in ("stap", "stap_mf"):
        return None
    scorer = (stap_acquisition if cfg.pattern_mode.kind == "stap"
              else stap_mf_acquisition)
    try:
        raw = scorer(committee, item.initial_condition, item.pattern)
        return cost_weighted(raw, item.pattern)
    except NonFiniteOutput:
        return None


def run_round(state: RunState) -> RunState:
    """Advance one acquisition round in place and return the same state."""
    cfg = state.config
    r = state.round_index + 1
    items = build_batch(state.pool, state.committee,
                        cfg.pde.trajectory_length, cfg.budget,
                        cfg.base_selector, cfg.pattern_mode, cfg.greedy,
                        state.master.child("select"),
                        pool_ids=state.pool_ids, round_index=r)
    results = [rollout_interleaved(cfg.pde, state.committee,
                                   item.initial_condition, item.pattern,
                                   cfg.stability_filter)
               for item in items]
    scores = [_pattern_score(cfg, state.committee, item) for item in items]
    for res in results:
        state.dataset.pairs.extend(res.acquired_pairs)
        state.solver_invocations += res.solver_invocations
    state.acquisition_logs.append([{
        "pool_index": item.pool_index,
        "pattern": "".join("1" if b else "0" for b in item.pattern.bits),
        "cost": item.pattern.cost,
        "retained": res.cost,
        "filtered_count": res.filtered_count,
        "aborted_at": res.aborted_at,
    } for item, res in zip(items, results)])
    if state.writer is not None:
        state.writer.write_acquisition(r, items, results, scores)

    committee = make_committee(cfg.architecture, state.dataset.norm,
                               cfg.committee_size,
                               state.master.child("round", r, "init"))
    committee = train_committee(committee, state.dataset, cfg.train,
                                threads=state.threads,
                                rng=state.master.child("round", r, "train"))
    state.committee = committee
    state.metrics_rounds.append(
        evaluate_committee(committee, state.test_set, round_index=r))
    state.round_index = r
    if state.writer is not None:
        state.writer.write_checkpoints(r, committee)
        state.writer.write_metrics(MetricsReport(state.metrics_rounds))
        state.writer.write_manifest(cfg, r, state.solver_invocations)
    return state


def run_experiment(cfg: ExperimentConfig, *, threads: int | None = None,
                   force: bool = False, progress=None) -> RunArtifacts:
    """Execute the full configured run; see the module docstring for order."""
    threads = resolve_threads(threads)
    writer = (RunWriter(cfg.output_dir, force=force)
              if cfg.output_dir is not None else None)
    master = RandomStream(cfg.master_seed)
    pool, test_set = generate_pool_and_test(cfg, master)
    pool_ids = list(range(len(pool)))
    if writer is not None:
        writer.write_config(cfg)
        writer.write_pool(pool, cfg.pde, cfg.master_seed)
        writer.write_test(test_set, cfg.pde, cfg.master_seed)
    dataset, used_ids = build_initial_dataset(pool, cfg, pool_ids)
    if writer is not None:
        writer.write_initial_dataset(dataset, used_ids)

    committee = make_committee(cfg.architecture, dataset.norm,
                               cfg.committee_size,
                               master.child("round", 0, "init"))
    committee = train_committee(committee, dataset, cfg.train,
                                threads=threads,
                                rng=master.child("round", 0, "train"))
    baseline = evaluate_committee(committee, test_set, round_index=0)
    if progress is not None:
        progress(baseline)

    state = RunState(
        config=cfg, master=master, pool=pool, pool_ids=pool_ids,
        test_set=test_set, dataset=dataset, committee=committee,
        round_index=0, metrics_rounds=[baseline], acquisition_logs=[],
        solver_invocations=cfg.initial_trajectories * cfg.pde.trajectory_length,
        threads=threads, writer=writer)
    if writer is not None:
        writer.write_checkpoints(0, committee)
        writer.write_metrics(MetricsReport(state.metrics_rounds))
        writer.write_manifest(cfg, 0, state.solver_invocations)

    for _ in range(cfg.rounds):
        run_round(state)
        if progress is not None:
            progress(state.metrics_rounds[-1])

    return RunArtifacts(
        config=cfg, metrics=MetricsReport(state.metrics_rounds),
        committee=state.committee, dataset=state.dataset, pool=state.pool,
        pool_ids=state.pool_ids, test_set=state.test_set,
        acquisition_logs=state.acquisition_logs,
        solver_invocations=state.solver_invocations,
        output_dir=writer.root if writer is not None else None)


# --- reading a persisted run back --------------------------------------------

def load_test_set(run_dir) -> list[Trajectory]:
    run_dir = Path(run_dir)
    cfg = load_config(run_dir / "config.json")
    with open(run_dir / "test.json") as fh:
        shape = tuple(json.load(fh)["shape"])
    array = read_f64_blob(run_dir / "test.f64", shape)
    return [Trajectory(array[r], cfg.pde.grid, cfg.pde)
            for r in range(shape[0])]


def load_committee(run_dir, round_index: int) -> Committee:
    rdir = Path(run_dir) / f"round_{round_index:03d}"
    if not rdir.is_dir():
        raise InvalidConfig(f"no persisted round at {rdir}")
    members = [load_model(p) for p in sorted(rdir.glob("member_*.json"))]
    if not members:
        raise InvalidConfig(f"no checkpoints inside {rdir}")
    return Committee(members)


def last_completed_round(run_dir) -> int:
    with open(Path(run_dir) / "run.json") as fh:
        return int(json.load(fh)["completed_rounds"])
