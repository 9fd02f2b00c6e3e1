"""Exponential collocation integrators for the cubic Schroedinger equation
on periodic domains, with splitting and averaged-vector-field baselines and
an experiment harness around them."""

from .collocation import (
    CollocationTableau,
    EcmOperatorSet,
    abar_multiplier,
    build_operator_set,
    gauss_legendre,
    make_tableau,
    projection_apply,
    shifted_legendre_coeffs,
)
from .grid import (
    SpectralField,
    TorusGrid,
    apply_diagonal,
    energy,
    h_alpha_norm,
    l2_norm,
    make_grid,
    mass,
    nonlinearity,
    to_fourier,
    to_physical,
)
from .integrators import (
    DivergenceError,
    EavfStepper,
    EcmStepper,
    RunRecord,
    StepperConfig,
    StepReport,
    StrangStepper,
    fixed_point_solve,
    integrate,
    make_stepper,
    parse_method,
)
from .config import ConfigError, ExperimentConfig, load_config, parse_number
from .phifun import PhiTable, phi, phi_table
from .problems import (
    PRESETS,
    build_problem,
    exact_solution,
    has_closed_form,
    initial_field,
    preset,
)
from .reference import (
    MissingReferenceError,
    compute_reference,
    ensure_reference,
    reference_key,
    reference_solution,
)

__version__ = "0.1.0"

__all__ = [
    "CollocationTableau",
    "ConfigError",
    "DivergenceError",
    "EavfStepper",
    "EcmOperatorSet",
    "EcmStepper",
    "ExperimentConfig",
    "MissingReferenceError",
    "PhiTable",
    "PRESETS",
    "RunRecord",
    "SpectralField",
    "StepperConfig",
    "StepReport",
    "StrangStepper",
    "TorusGrid",
    "abar_multiplier",
    "apply_diagonal",
    "build_operator_set",
    "build_problem",
    "compute_reference",
    "energy",
    "ensure_reference",
    "exact_solution",
    "fixed_point_solve",
    "gauss_legendre",
    "h_alpha_norm",
    "has_closed_form",
    "initial_field",
    "integrate",
    "l2_norm",
    "load_config",
    "make_grid",
    "make_stepper",
    "make_tableau",
    "mass",
    "nonlinearity",
    "parse_method",
    "parse_number",
    "phi",
    "phi_table",
    "preset",
    "projection_apply",
    "reference_key",
    "reference_solution",
    "shifted_legendre_coeffs",
    "to_fourier",
    "to_physical",
]
