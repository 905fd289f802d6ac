"""Physically consistent modeling and optimization of stacked intelligent metasurfaces."""

from .errors import *  # noqa: F401,F403
from .model import (
    Architecture,
    PropagationStage,
    SimLayer,
    SimStack,
    Violation,
    assemble_general,
    block_scattering,
    channel_gain,
    extract_channel,
    simplified_channel,
    stack_from_json,
    stack_to_json,
    validate_layer,
)
from .network import (
    TOL,
    PartitionedScattering,
    Tolerances,
    cascade,
    random_scattering,
    reflection_coefficients,
    solve_waves_oracle,
    source_wave,
    spectral_norm,
)
from .optimize import (
    DRisOptimizerConfig,
    OptimizationTrace,
    UniformRandomPhase,
    ZeroPhase,
    bdris_optimal,
    circuit_complexity,
    dris_layer_update,
    dris_optimize,
    dris_upper_bound,
)
from .propagation import SimGeometry, build_stack, rayleigh_channel, rs_channel, trial_seed, upa_positions
from .harness import (
    ExperimentConfig,
    TrialRecord,
    format_summary,
    load_config,
    read_csv,
    run_experiment,
    summarize,
    write_csv,
)

__version__ = "0.1.0"
