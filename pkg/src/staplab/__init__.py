"""Active-learning laboratory for autoregressive PDE surrogate models.

The package trains small spectral surrogates on solver transition pairs
and acquires new data under a per-step budget: a boolean sampling pattern
decides, step by step, whether the numerical solver or the committee mean
advances each acquired trajectory.
"""

from .acquisition import (PatternScorer, cost_weighted, qbc_score,
                          qbc_scores, stap_acquisition, stap_mf_acquisition,
                          variance_reduction)
from .cost_analysis import (AlCost, CostModel, NonAlCost, al_cost,
                            al_reduces_cost, non_al_cost)
from .errors import (EmptyPool, InvalidArchitecture, InvalidConfig,
                     InvalidModel, NonFiniteLoss, NonFiniteOutput,
                     NumericalBlowup, PoolExhausted, ShapeMismatch,
                     StaplabError, StepSizeUnderflow, ZeroCostPattern,
                     ZeroReference)
from .experiment import (ExperimentConfig, RunArtifacts, RunState, RunWriter,
                         build_initial_dataset, config_from_dict,
                         config_to_dict, default_config,
                         generate_pool_and_test, load_committee, load_config,
                         load_model, load_test_set, make_pool_and_test,
                         read_f64_blob, run_experiment, run_round, save_model,
                         write_f64_blob)
from .initial_conditions import (IcKind, IcSpec, default_ic_spec,
                                 make_initial_condition, sample_fourier_sum,
                                 sample_grf, sample_raw)
from .metrics import (DIVERGED_LOG_ERROR, MetricsReport, RoundMetrics,
                      evaluate_committee, mae, nrmse, quantile, rmse,
                      write_metrics_csv, write_metrics_json)
from .rng import RandomStream
from .rollout import (AcquisitionResult, SamplingPattern, StabilityFilter,
                      default_stability_filter, rollout_interleaved,
                      rollout_mean, rollout_pairwise, rollout_pairwise_values,
                      rollout_surrogate, rollout_surrogate_values)
from .selection import (BaseSelector, BatchItem, GreedyConfig, PatternMode,
                        bernoulli_pattern, build_batch,
                        initial_bernoulli_pattern, optimize_pattern,
                        select_initial_qbc, select_initial_random,
                        select_initial_sbal, truncate_pattern)
from .solvers import (PdeKind, PdeSpec, SpatialGrid, State, Trajectory,
                      burgers_spec, evolve, evolve_values, kdv_spec, ks_spec,
                      step, step_values)
from .surrogate import (Architecture, Committee, Dataset, NormStats,
                        SurrogateModel, TrainConfig, TransitionPair,
                        compute_norm_stats, forward, forward_values,
                        init_model, loss_and_gradient, make_committee,
                        mean_forward, mean_forward_values, parameter_count,
                        train, train_committee)

__version__ = "0.1.0"
