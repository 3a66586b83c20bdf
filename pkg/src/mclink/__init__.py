"""Link-level simulator for flow-driven molecular communication.

Particles released into a microfluidic channel drift and diffuse toward
a receptor patch; bound-receptor counts form the per-frame observation.
Two detectors decode the stream: an adaptive PID-controlled threshold
and a fixed statistically derived benchmark threshold.
"""

from .analytic import (
    ChannelParams,
    GaussianStats,
    NoiseStats,
    binding_probability,
    bound_receptor_stats,
    dissociation_constant,
    gaussian_error_rate,
    initial_threshold,
    optimal_threshold,
    peak_concentration,
    peak_time,
)
from .biofet import BioFetParams, drain_current, surface_potential, transconductance
from .config import (
    DEFAULT_SWEEP_VALUES,
    SWEEP_AXES,
    ExperimentConfig,
    SweepSpec,
    load_config,
    parse_config,
)
from .control import (
    DEFAULT_GAINS,
    GainSchedule,
    PidGains,
    PidState,
    Setpoint,
    TuningResult,
    compute_error,
    pid_update,
    schedule_gains,
    update_setpoint,
    update_threshold,
    ziegler_nichols_tune,
)
from .harness import (
    CSV_HEADER,
    ResultRow,
    Runtime,
    build_runtime,
    emit_csv,
    emit_plot,
    estimate_noise,
    run_experiment,
    run_plan,
)
from .link import (
    CskScheme,
    RunResult,
    adaptive_detect,
    bep,
    bit_error_rate,
    detect,
    generate_bitstream,
    modulate,
)
from .particle import ParticleChannel, SimClock, derive_clock

__version__ = "0.1.0"

__all__ = [
    "ChannelParams", "GaussianStats", "NoiseStats", "binding_probability",
    "bound_receptor_stats", "dissociation_constant", "gaussian_error_rate",
    "initial_threshold", "optimal_threshold", "peak_concentration", "peak_time",
    "BioFetParams", "drain_current", "surface_potential", "transconductance",
    "DEFAULT_SWEEP_VALUES", "SWEEP_AXES", "ExperimentConfig", "SweepSpec",
    "load_config", "parse_config",
    "DEFAULT_GAINS", "GainSchedule", "PidGains", "PidState", "Setpoint",
    "TuningResult", "compute_error", "pid_update", "schedule_gains",
    "update_setpoint", "update_threshold", "ziegler_nichols_tune",
    "CSV_HEADER", "ResultRow", "Runtime", "build_runtime", "emit_csv",
    "emit_plot", "estimate_noise", "run_experiment", "run_plan",
    "CskScheme", "RunResult", "adaptive_detect", "bep", "bit_error_rate",
    "detect", "generate_bitstream", "modulate",
    "ParticleChannel", "SimClock", "derive_clock",
    "__version__",
]
