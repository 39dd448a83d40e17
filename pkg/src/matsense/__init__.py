"""Low-rank matrix sensing: factored gradient descent, adaptive restarts,
and executable verification of the optimization landscape."""

from .config import ConfigError, ExperimentSpec, load_config, preset_path
from .dynamics import (FactorState, NumericalOverflowError, Trajectory,
                       TrajectoryRecord, gd_step, init_factor,
                       integrate_flow_rk4, run_gd, singular_value_rates)
from .experiments import (AggregateCurve, ExperimentResult, SeriesResult,
                          aggregate_trajectories, run_capture_experiment,
                          run_experiment, write_experiment_csvs)
from .geometry import (CheckResult, VerificationReport, effective_rank,
                       jacobian_singular_values, manifold_distance_bound,
                       numerical_rank, pl_slack, procrustes_distance,
                       procrustes_gap, regularity_radius_estimate,
                       restricted_injectivity)
from .objective import (Residuals, grad_scaled_error, grad_train_error,
                        residuals, test_error)
from .plot import render_plot
from .restart import RestartConfig, RestartEvent, run_restart, window_ratio
from .rng import derive_seed, substream
from .sensing import (PlantedInstance, SensingOperator, gen_operator,
                      gen_planted, operator_norm, plant_instance)
from .verify import run_verify_suite

__version__ = "0.1.0"

__all__ = [
    "AggregateCurve", "CheckResult", "ConfigError", "ExperimentResult",
    "ExperimentSpec", "FactorState", "NumericalOverflowError",
    "PlantedInstance", "Residuals", "RestartConfig", "RestartEvent",
    "SensingOperator", "SeriesResult", "Trajectory", "TrajectoryRecord",
    "VerificationReport", "aggregate_trajectories", "derive_seed",
    "effective_rank", "gd_step", "gen_operator", "gen_planted",
    "grad_scaled_error", "grad_train_error", "init_factor",
    "integrate_flow_rk4", "jacobian_singular_values", "load_config",
    "manifold_distance_bound", "numerical_rank", "operator_norm", "pl_slack",
    "plant_instance", "preset_path", "procrustes_distance", "procrustes_gap",
    "regularity_radius_estimate", "render_plot", "residuals",
    "restricted_injectivity", "run_capture_experiment", "run_experiment",
    "run_gd", "run_restart", "run_verify_suite", "singular_value_rates",
    "substream", "test_error", "window_ratio", "write_experiment_csvs",
]
