"""Numerical laboratory for the entanglement cost of preparing bipartite states."""

__version__ = "0.1.0"

from .qcore import (
    DimensionError,
    Ensemble,
    PureState,
    QuantumState,
    RandomSource,
    StateValidationError,
    basis_pure,
    binary_entropy,
    ensemble_average,
    partial_trace,
    pure_entanglement,
    pure_power,
    purify,
    sample_density_matrix,
    sample_pure_state,
    sample_unitary,
    singlet,
    tensor_power,
    tensor_product,
    tensor_pure,
    von_neumann_entropy,
)
from .metrics import (
    DistanceReport,
    bures_distance,
    metric_relation_check,
    tensor_power_divergence,
    trace_distance,
    uhlmann_fidelity,
)
from .eof import (
    ContinuityCheck,
    EofResult,
    LoccChannel,
    MonotonicityReport,
    apply_locc,
    check_monotonicity,
    concurrence,
    continuity_bound,
    eof_optimize,
    eof_two_qubit_closed_form,
    sample_locc,
)
from .regcost import (
    AdditivityReport,
    CostBracket,
    RegularizationTrace,
    additivity_probe,
    cost_bracket,
    fekete_check,
    product_ensemble,
    regularized_sequence,
)
from .formation import (
    DilutionPlan,
    FormationResult,
    TypicalSet,
    dilute_pure_state,
    dilution_fidelity,
    dilution_plan,
    formation_protocol,
    truncated_state,
    typical_set,
    verify_fid_bounds,
)
from .serialize import load_state, save_object
from .verify import run_verification
