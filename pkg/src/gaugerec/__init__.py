"""Local quantum errors from a truncated Cuntz multiplet, and their recovery.

The package builds a concrete matrix representation of d shift generators on
a word space truncated at length L, applies the Kraus-style error channel
they generate, synthesizes recovery operators as nonnegative projector
combinations, and verifies the algebraic and gauge-covariance identities the
construction satisfies.
"""

from .channels import (
    Superoperator,
    apply_error_channel,
    apply_isometry_channel,
    apply_projection_channel,
    apply_recovery_channel,
    error_superoperator,
    isometry_superoperator,
    projection_superoperator,
    recovery_superoperator,
)
from .cuntz import (
    CuntzRelationReport,
    FieldOperator,
    GaugeMultiplet,
    build_isometry_S,
    build_multiplet,
    build_projectors,
    canonical_endomorphism,
    check_cuntz_relations,
    compose_generators,
    permutation_sign,
)
from .gauge import (
    FidelityInvarianceReport,
    GammaRep,
    GaugeElement,
    SCovarianceReport,
    check_fidelity_gauge_invariance,
    check_S_covariance,
    gauge_element,
    gauge_transform_multiplet,
    second_quantize,
    transform_density,
    transform_state,
)
from .recovery import (
    AmplitudeTable,
    BasisTransformReport,
    CodeSpace,
    GaugeConstraintResult,
    InfeasibleRecoveryError,
    RecoveryPlan,
    RecoveryVerification,
    assemble_plan,
    check_basis_transform,
    check_gauge_constraint,
    constraint_matrix,
    cross_amplitudes,
    solve_recovery,
    transition_amplitudes,
    verify_recovery,
)
from .scenario import (
    CHECK_NAMES,
    ConfigError,
    ScenarioConfig,
    ScenarioReport,
    emit_report,
    load_config,
    parse_config,
    parse_report,
    run_scenario,
)
from .wordspace import (
    BasisMismatchError,
    DensityMatrix,
    StateVector,
    WordBasis,
    build_word_basis,
    fidelity,
    format_word,
    length_projector,
    make_state,
    parse_word,
    pure_density,
    vacuum_projector,
    word_dimension,
)

__version__ = "0.1.0"
