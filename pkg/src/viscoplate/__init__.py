"""Spectral Galerkin simulator for a viscoelastic plate with logarithmic
source and nonlinear frictional damping, plus the diagnostics that verify
its structural assumptions and decay estimates numerically."""

from .diagnostics import (
    DampingDiagnostics,
    EnergySample,
    FitReport,
    LyapunovReport,
    LyapunovSample,
    SeriesBundle,
    WellConstants,
    WellReport,
    analyze,
    check_well,
    damping_diag,
    energy,
    energy_rate_residual,
    energy_series,
    find_lyapunov_N,
    fit_decay,
    log_sobolev_gap,
    lyapunov_series,
    memory_cs_check,
    psi1,
    psi2,
    s_log_constant,
    well_constants,
)
from .dynamics import (
    HistoryBuffer,
    PhysicalParams,
    PlateState,
    Trajectory,
    initial_state,
    memory_term,
    newton_solve_accel,
    residual,
    run,
    step,
)
from .errors import (
    AssemblyError,
    DivergedError,
    DomainError,
    HypothesisError,
    InputError,
    ScenarioError,
    ViscoplateError,
)
from .kernels import (
    ConvexModulus,
    DampingLaw,
    DecayEnvelope,
    RelaxationKernel,
    ValidationReport,
    XiWeight,
    convex_conjugate,
    envelope_linear_B,
    envelope_nonlinear_B,
    envelope_nonlinear_both,
    extend_modulus,
    parse_damping_spec,
    parse_kernel_spec,
    parse_modulus_spec,
    parse_xi_spec,
    validate_h1,
    validate_h2,
    validate_h3,
)
from .scenario import (
    PRESETS,
    Scenario,
    effective_config,
    load_scenario,
    parse_scenario,
    parse_scenario_text,
    with_overrides,
)
from .spectral import (
    Basis,
    GramSet,
    assemble_grams,
    beam_roots,
    build_basis,
    estimate_cp,
    eval_field,
    eval_laplacian,
    project_initial,
)

__version__ = "0.1.0"

__all__ = [
    "AssemblyError",
    "Basis",
    "ConvexModulus",
    "DampingDiagnostics",
    "DampingLaw",
    "DecayEnvelope",
    "DivergedError",
    "DomainError",
    "EnergySample",
    "FitReport",
    "GramSet",
    "HistoryBuffer",
    "HypothesisError",
    "InputError",
    "LyapunovReport",
    "LyapunovSample",
    "PRESETS",
    "PhysicalParams",
    "PlateState",
    "RelaxationKernel",
    "Scenario",
    "ScenarioError",
    "SeriesBundle",
    "Trajectory",
    "ValidationReport",
    "ViscoplateError",
    "WellConstants",
    "WellReport",
    "XiWeight",
    "analyze",
    "assemble_grams",
    "beam_roots",
    "build_basis",
    "check_well",
    "convex_conjugate",
    "damping_diag",
    "effective_config",
    "energy",
    "energy_rate_residual",
    "energy_series",
    "envelope_linear_B",
    "envelope_nonlinear_B",
    "envelope_nonlinear_both",
    "estimate_cp",
    "eval_field",
    "eval_laplacian",
    "extend_modulus",
    "find_lyapunov_N",
    "fit_decay",
    "initial_state",
    "load_scenario",
    "log_sobolev_gap",
    "lyapunov_series",
    "memory_cs_check",
    "memory_term",
    "newton_solve_accel",
    "parse_damping_spec",
    "parse_kernel_spec",
    "parse_modulus_spec",
    "parse_scenario",
    "parse_scenario_text",
    "parse_xi_spec",
    "project_initial",
    "psi1",
    "psi2",
    "residual",
    "run",
    "s_log_constant",
    "step",
    "validate_h1",
    "validate_h2",
    "validate_h3",
    "well_constants",
    "with_overrides",
]
