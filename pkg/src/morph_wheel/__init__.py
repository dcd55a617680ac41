"""Quasi-static model and design tools for a passive variable-radius wheel."""

__version__ = "0.1.0"

from .behavior import (
    DecidingForces,
    DriveSolution,
    EquilibriumSolution,
    Mode,
    ModeState,
    classify_mode,
    drive_solution,
    equilibrium_delta_r,
    transformation_threshold_torque,
)
from .design_space import (
    ConstraintReport,
    FeasibilityRegion,
    SegmentConfig,
    check_coupler_constraints,
    displacement_amplitude,
    min_friction_coefficient,
    min_segment_count,
    stiffness_sweep,
    strut_inner_radius_bound,
    weight_feasibility,
)
from .errors import (
    ConfigError,
    DomainError,
    InfeasibleDesignError,
    MorphError,
    NearSingularWarning,
    OutOfRangeError,
    SingularConfigurationError,
)
from .locomotion import (
    MotorModel,
    SimTrace,
    TerrainProfile,
    TerrainScenario,
    TerrainSegment,
    VehicleSpec,
    bidirectional_check,
    compare_wheels,
    resistance_force,
    run,
    step,
)
from .sweep import SweepResult
from .wheel_model import (
    CouplerGeometry,
    SpringSpec,
    StrutGeometry,
    WheelDesign,
    WheelState,
    contraction_force,
    coupler_delta_r,
    coupler_jacobian,
    input_torque,
    output_force,
    spring_resistance_force,
    strut_delta_r,
    strut_jacobian,
    wheel_state,
)
