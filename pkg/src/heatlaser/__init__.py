"""Single-atom heat-engine laser simulator.

A three- or four-level atom pumped by thermal baths and coupled to a lossy
cavity mode.  The package builds the Lindblad master equation and solves it
exactly (:mod:`heatlaser.solver`), evaluates the closed-form semi-classical
and fully quantum laser theory (:mod:`heatlaser.semiclassical`,
:mod:`heatlaser.photonstats`), and cross-validates the two routes.
"""

__version__ = "0.1.0"

from .core import (
    Dissipator,
    HilbertSpace,
    build_atom_operators,
    build_cavity_operators,
    build_dissipators,
    build_interaction,
    build_liouvillian,
)
from .models import (
    FOUR_LEVEL,
    THREE_LEVEL,
    BathSpec,
    EngineModel,
    build_four_level,
    build_three_level,
    planck_occupation,
    with_hot_occupation,
)
from .photonstats import (
    LaserCoefficients,
    Moments,
    PhotonDistribution,
    TruncationError,
    coefficient_flow,
    distribution_moments,
    elimination_flow,
    output_power,
    pn_derivative,
    rough_estimate_mean,
    saturated_power,
    scully_lamb_coefficients,
    steady_distribution,
)
from .semiclassical import (
    LasingReport,
    StructureConstants,
    field_derivative,
    find_thresholds,
    lasing_gain,
    population_inversion,
    saturation_parameter,
    structure_constants,
    temperature_lasing_condition,
    zero_field_populations,
)
from .solver import (
    SteadyStateError,
    SteadyStateResult,
    WignerField,
    evolve,
    expectation,
    partial_trace_atom,
    photon_distribution,
    solve_model,
    steady_state,
    wigner,
)

__all__ = [
    "__version__",
    "THREE_LEVEL",
    "FOUR_LEVEL",
    "BathSpec",
    "EngineModel",
    "planck_occupation",
    "build_three_level",
    "build_four_level",
    "with_hot_occupation",
    "HilbertSpace",
    "Dissipator",
    "build_cavity_operators",
    "build_atom_operators",
    "build_interaction",
    "build_dissipators",
    "build_liouvillian",
    "StructureConstants",
    "LasingReport",
    "structure_constants",
    "zero_field_populations",
    "population_inversion",
    "lasing_gain",
    "saturation_parameter",
    "field_derivative",
    "find_thresholds",
    "temperature_lasing_condition",
    "LaserCoefficients",
    "PhotonDistribution",
    "Moments",
    "TruncationError",
    "scully_lamb_coefficients",
    "steady_distribution",
    "pn_derivative",
    "distribution_moments",
    "coefficient_flow",
    "elimination_flow",
    "output_power",
    "saturated_power",
    "rough_estimate_mean",
    "SteadyStateResult",
    "SteadyStateError",
    "WignerField",
    "steady_state",
    "evolve",
    "partial_trace_atom",
    "photon_distribution",
    "expectation",
    "wigner",
    "solve_model",
]
