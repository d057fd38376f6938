"""Finite-dimensional ideal-measurement models and Everett-copy verification."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConditionM2Violation,
    ConfigInvalid,
    ConvergenceFailure,
    DegenerateSpectrum,
    DimensionMismatch,
    EverettError,
    InvalidDimension,
    IoFailure,
    NotHermitian,
    NotNormalized,
    RetriesExhausted,
)
from .tensor import (  # noqa: E402
    DEFAULT_TOLERANCES,
    ComplexOperator,
    Space,
    ToleranceProfile,
    conditional_blocks,
    frob_dist,
    haar_random_unitary,
    hermitian_eig,
    kron,
    reassemble_blocks,
    unitary_exp,
)
from .measurement import (  # noqa: E402
    ConditionReport,
    MeasurementModel,
    NotBranchForm,
    SystemState,
    build_interaction_hamiltonian,
    build_model,
    check_branch_form,
    schrodinger_evolve,
    verify_condition_M2,
    verify_condition_M4,
)
from .ambiguity import (  # noqa: E402
    BasisPair,
    EquivalenceWitness,
    hadamard_primed_bases,
    match_to_unprimed,
    random_basis_search,
    verify_M2_for_basis,
)
from .heisenberg import (  # noqa: E402
    EverettDecomposition,
    HeisenbergOperator,
    NotCopyForm,
    closed_form_branches,
    evolve_operator,
    expectation_consistency,
    extract_copy_structure,
    noncommuting_impossibility_check,
    permutation_equivalent,
)
