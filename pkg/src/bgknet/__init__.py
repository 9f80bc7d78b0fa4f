"""Spectral coupling conditions for the linearized BGK equation on networks.

The package computes the macroscopic coupling coefficients of the acoustic
limit from coupled kinetic half-space problems at network nodes, solves the
full node problem (asymptotic states, layer amplitudes, node distributions),
and validates the results against a discrete-velocity BGK network simulator
and the composite asymptotic solution.
"""

from .acoustic import (
    CompositeProfile,
    MacroState,
    characteristics,
    composite_profile,
    composite_rho,
    exact_macro,
    macro_state,
    viscous_amplitudes,
    viscous_layer_check,
)
from .coupling import (
    ACOUSTIC_SPEED,
    HALF_MOMENT_REFERENCE,
    INFINITE,
    CouplingCoefficients,
    InvariantMatrix,
    MacroCouplingSystem,
    NodeOperators,
    NodeProblem,
    NodeSolution,
    NodeTopology,
    build_macro_system,
    compute_coefficients,
    coupling_residual,
    extract_deltas,
    flux_residual,
    invariant_matrix,
    macro_coupling_solve,
    macro_determinant,
    maxwell_delta,
    node_distribution,
    odd_moment_residual,
    solve_node,
    solve_node_general,
)
from .errors import DegeneracyError, NumericalError, SingularSystemError
from .hermite import (
    HermiteTable,
    MomentSet,
    MomentTransform,
    QuadratureRule,
    build_rule,
    build_tables,
    discrete_maxwellian,
    hermite_functions,
    moments,
    recursion_coefficients,
)
from .kinetic import (
    InitialData,
    KineticResult,
    NetworkConfig,
    NetworkState,
    apply_node_coupling,
    apply_outer_boundary,
    conservation_residual,
    graded_spacing,
    initialize,
    run,
    step,
    total_mass,
)
from .layer import (
    LayerMatrix,
    LayerSpectrum,
    LiftMatrix,
    build_layer_matrix,
    build_lift,
    layer_profile,
    stable_manifold,
)

__version__ = "0.1.0"
