"""GARI decoding toolkit: model transform, fixed-point min-sum decoder,
architecture timing, tile placement and a Monte Carlo harness."""

from .archsim import ArchConfig, CrossbarNetwork, TaggedMessage, TimingReport, cycle_model, latency_ns
from .errors import (
    BackPressureOverflowError,
    DegenerateCheckError,
    GariError,
    InfeasibleMappingError,
    InvalidInputError,
    ModelInconsistencyError,
    SchedulingViolationError,
    StaleHazardError,
)
from .gf2model import (
    DetectorErrorModel,
    GariModel,
    SparseBitMatrix,
    Syndrome,
    assemble_augmented,
    derive_uv,
    load_dem,
    merge_duplicate_columns,
    recover_physical_error,
    resolve_physical_error,
    save_dem,
)
from .harness import BenchReport, ExperimentConfig, run_shots, sample_errors
from .msdecoder import DecodeResult, FixedPointSpec, Schedule, check_update_minsum, decode, quantize
from .placement import CheckOrdering, TileMap, load_cycles, map_serial_variables, map_uv_checks, order_checks

__version__ = "0.1.0"

__all__ = [
    "ArchConfig",
    "BackPressureOverflowError",
    "BenchReport",
    "CheckOrdering",
    "CrossbarNetwork",
    "DecodeResult",
    "DegenerateCheckError",
    "DetectorErrorModel",
    "ExperimentConfig",
    "FixedPointSpec",
    "GariError",
    "GariModel",
    "InfeasibleMappingError",
    "InvalidInputError",
    "ModelInconsistencyError",
    "Schedule",
    "SchedulingViolationError",
    "SparseBitMatrix",
    "StaleHazardError",
    "Syndrome",
    "TaggedMessage",
    "TileMap",
    "TimingReport",
    "assemble_augmented",
    "check_update_minsum",
    "cycle_model",
    "decode",
    "derive_uv",
    "latency_ns",
    "load_cycles",
    "load_dem",
    "map_serial_variables",
    "map_uv_checks",
    "merge_duplicate_columns",
    "order_checks",
    "quantize",
    "recover_physical_error",
    "resolve_physical_error",
    "run_shots",
    "sample_errors",
    "save_dem",
]
