"""Periodic non-autonomous triangular maps: composition, cycles, stability."""
from .analysis import (
    ConvergenceReport,
    CoppelResult,
    CycleRecord,
    FixedPointList,
    OmegaLimit,
    Period2Result,
    Scenario,
    SelfMapError,
    SpectrumClassification,
    Verdict,
    classify_spectrum,
    coppel_1d_test,
    find_fixed_points,
    find_periodic_orbits,
    periodic_orbits_by_period,
    jacobian,
    omega_limit_estimate,
    period2_absence_test,
    sample_grid,
    scenario_classify,
    verify_global_convergence,
)
from .core import (
    Box,
    CompositionOperator,
    ConvergenceRule,
    CoordinateMap,
    DomainError,
    EvaluationError,
    NonFiniteError,
    Orbit,
    PeriodWarning,
    TriangularMap,
    TriangularSystem,
    compose,
    evaluate,
    identity_system,
    iterate_orbit,
    system_period,
)

__version__ = "0.1.0"
