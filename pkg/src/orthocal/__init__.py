"""Calibration toolkit for Orthoglide-type translational parallel mechanisms.

Identifies actuator encoder offsets from leg-parallelism gauge measurements:
exact kinematics of the simplified rod model, an exact leg/gauge model, a
virtual measurement rig, and linear least-squares identification with
residual analysis.
"""

from . import errors
from .experiments import EXPERIMENTS, ExperimentRecord
from .identification import (
    FULL_COLUMNS,
    FULL_LAYOUT,
    REDUCED_COLUMNS,
    REDUCED_LAYOUT,
    CalibrationResult,
    PostureAngles,
    design_matrix_full,
    design_matrix_reduced,
    fit_posture_angles,
    predict_improvement,
    rms,
    solve_offsets,
)
from .kinematics import (
    AXES,
    DEFAULT_GEOMETRY,
    Geometry,
    closure_residual,
    direct_kinematics,
    inverse_jacobian,
    inverse_kinematics,
    jacobian,
    test_posture,
    validate_offsets,
)
from .leg_model import (
    DeviationPair,
    LegLine,
    exact_deviation_delta,
    exact_gauge_pair,
    leg_line,
    linearized_deviation_delta,
    transverse_deviation,
)
from .virtual_rig import (
    MonteCarloSummary,
    ProtocolRun,
    RigConfig,
    monte_carlo_identification,
    run_protocol,
    simulate_reading,
)

__version__ = "0.1.0"

__all__ = [
    "AXES",
    "DEFAULT_GEOMETRY",
    "EXPERIMENTS",
    "FULL_COLUMNS",
    "FULL_LAYOUT",
    "REDUCED_COLUMNS",
    "REDUCED_LAYOUT",
    "CalibrationResult",
    "DeviationPair",
    "ExperimentRecord",
    "Geometry",
    "LegLine",
    "MonteCarloSummary",
    "PostureAngles",
    "ProtocolRun",
    "RigConfig",
    "closure_residual",
    "design_matrix_full",
    "design_matrix_reduced",
    "direct_kinematics",
    "errors",
    "exact_deviation_delta",
    "exact_gauge_pair",
    "fit_posture_angles",
    "inverse_jacobian",
    "inverse_kinematics",
    "jacobian",
    "leg_line",
    "linearized_deviation_delta",
    "monte_carlo_identification",
    "predict_improvement",
    "rms",
    "run_protocol",
    "simulate_reading",
    "solve_offsets",
    "test_posture",
    "transverse_deviation",
    "validate_offsets",
]
