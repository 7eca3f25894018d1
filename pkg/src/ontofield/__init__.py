"""Tools for the deterministic (all-commuting) formulation of a free scalar boson.

The package builds the finite periodic automaton whose evolution operator is a
cyclic permutation, the truncated ladder algebra that connects it to a
harmonic oscillator mode, momentum-lattice fields evolved by exact spectral
phase rotation, the real-space propagation kernels evaluated by two
independent quadrature routes, finite-difference interacting dynamics, and a
random-phase vacuum ensemble with its correlator statistics.
"""

from ontofield.cyclic import (
    BasisChange,
    CycleConfig,
    OntState,
    basis_change,
    energy_levels,
    evolution_matrix,
    evolve_step,
)
from ontofield.ladder import (
    CommutatorReport,
    ModeOperators,
    TimedOperator,
    b_eigensystem,
    build_mode,
    commutator_defect,
    evolve_operator,
    reconstruct_a,
    truncate_from_a,
)
from ontofield.lattice import (
    ComplexField,
    MomentumLattice,
    build_lattice,
    load_field,
    position_axes,
    save_field,
    spectral_evolve,
    to_momentum,
    to_position,
)
from ontofield.kernels import (
    KernelSpec,
    KernelTable,
    QuadratureError,
    SuppressionReport,
    decay_fit,
    f1_contour,
    f1_direct,
    f2_contour,
    f2_direct,
    f2_eval,
    group_velocity,
    kernel_table,
    spacelike_suppression_scan,
)
from ontofield.dynamics import (
    EvolutionRun,
    FrontMeasurement,
    FrontTrackingError,
    InstabilityError,
    ResidualReport,
    evolve_convolution,
    gaussian_packet,
    kg_residual,
    leapfrog_interact,
    refinement_study,
    spectral_run,
    stability_bound,
    time_derivative_check,
    wavefront_measure,
)
from ontofield.vacuum import (
    CorrelatorEstimate,
    EnsembleSpec,
    ensemble_correlator,
    sample_vacuum,
)

__version__ = "0.1.0"

__all__ = [
    "BasisChange",
    "CycleConfig",
    "OntState",
    "basis_change",
    "energy_levels",
    "evolution_matrix",
    "evolve_step",
    "CommutatorReport",
    "ModeOperators",
    "TimedOperator",
    "b_eigensystem",
    "build_mode",
    "commutator_defect",
    "evolve_operator",
    "reconstruct_a",
    "truncate_from_a",
    "ComplexField",
    "MomentumLattice",
    "build_lattice",
    "load_field",
    "position_axes",
    "save_field",
    "spectral_evolve",
    "to_momentum",
    "to_position",
    "KernelSpec",
    "KernelTable",
    "QuadratureError",
    "SuppressionReport",
    "decay_fit",
    "f1_contour",
    "f1_direct",
    "f2_contour",
    "f2_direct",
    "f2_eval",
    "group_velocity",
    "kernel_table",
    "spacelike_suppression_scan",
    "EvolutionRun",
    "FrontMeasurement",
    "FrontTrackingError",
    "InstabilityError",
    "ResidualReport",
    "evolve_convolution",
    "gaussian_packet",
    "kg_residual",
    "leapfrog_interact",
    "refinement_study",
    "spectral_run",
    "stability_bound",
    "time_derivative_check",
    "wavefront_measure",
    "__version__",
]
