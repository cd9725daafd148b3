"""Radar stair dimensioning: simulation, target extraction, and refinement.

The package covers the full chain from a parametric staircase scene to
corrected stair dimensions:

- `rf_params` / `numerics`: radar configuration and FFT/windowing helpers
- `scene`: staircase geometry and the walking sensor trajectory
- `chirp_sim`: raw chirp cube synthesis and the on-disk cube format
- `dsp_chain`: range/Doppler/AoA processing down to a target list
- `dimension`: consecutive-corner search and initial depth/height estimates
- `enhancer`: the small neural network that shrinks systematic errors
- `evaluation`: error statistics and histograms
- `scenario`: end-to-end runs and the dimension sweep grid
"""

from .chirp_sim import (
    NOISELESS,
    ChirpCube,
    FrameMeta,
    NoiseConfig,
    load_cube,
    quantize_to_wire,
    save_cube,
    synthesize_frame,
)
from .dimension import (
    DEFAULT_STANDARDS,
    SWEEP_STANDARDS,
    DimensionEstimate,
    StairStandards,
    aggregate_estimates,
    correct_coordinates,
    estimate_initial,
    find_consecutive_corners,
)
from .dsp_chain import (
    CfarConfig,
    DspConfig,
    TargetEntry,
    TargetList,
    accumulate_range_profile,
    cfar_detect,
    extract_stationary_slice,
    local_maxima,
    process_frame,
    range_doppler_transform,
    read_target_lists,
    write_target_lists,
)
from .enhancer import (
    EnhancerModel,
    EnhancerSample,
    TrainConfig,
    TrainResult,
    assemble_dataset,
    dataset_fingerprint,
    forward,
    gradient_check,
    init_model,
    load_model,
    radar_height,
    read_dataset,
    save_model,
    split_dataset,
    train,
    write_dataset,
)
from .evaluation import (
    DimensionMetrics,
    ErrorReport,
    build_error_report,
    compare_estimators,
    compute_metrics,
    report_to_dict,
)
from .numerics import rng_for
from .rf_params import DerivedAttributes, RadarConfig, derive_attributes
from .scenario import (
    ScenarioConfig,
    ScenarioResult,
    build_sweep,
    load_scenario,
    run_scenario,
    save_scenario,
    scenario_trajectory,
)
from .scene import (
    GaitFrame,
    Scatterer,
    StaircaseSpec,
    Trajectory,
    WalkConfig,
    corner_scatterers,
    corners_of,
    generate_walk,
)

__version__ = "0.1.0"

__all__ = [
    "ChirpCube",
    "CfarConfig",
    "DEFAULT_STANDARDS",
    "DerivedAttributes",
    "DimensionEstimate",
    "DimensionMetrics",
    "DspConfig",
    "EnhancerModel",
    "EnhancerSample",
    "ErrorReport",
    "FrameMeta",
    "GaitFrame",
    "NOISELESS",
    "NoiseConfig",
    "RadarConfig",
    "SWEEP_STANDARDS",
    "Scatterer",
    "ScenarioConfig",
    "ScenarioResult",
    "StairStandards",
    "StaircaseSpec",
    "TargetEntry",
    "TargetList",
    "TrainConfig",
    "TrainResult",
    "Trajectory",
    "WalkConfig",
    "accumulate_range_profile",
    "aggregate_estimates",
    "assemble_dataset",
    "build_error_report",
    "build_sweep",
    "cfar_detect",
    "compare_estimators",
    "compute_metrics",
    "corner_scatterers",
    "corners_of",
    "correct_coordinates",
    "dataset_fingerprint",
    "derive_attributes",
    "estimate_initial",
    "extract_stationary_slice",
    "find_consecutive_corners",
    "forward",
    "generate_walk",
    "gradient_check",
    "init_model",
    "load_cube",
    "load_model",
    "local_maxima",
    "process_frame",
    "quantize_to_wire",
    "radar_height",
    "range_doppler_transform",
    "read_dataset",
    "read_target_lists",
    "rng_for",
    "run_scenario",
    "save_cube",
    "save_model",
    "save_scenario",
    "scenario_trajectory",
    "split_dataset",
    "synthesize_frame",
    "train",
    "write_dataset",
    "write_target_lists",
]
