"""Partial trace as classical marginalization of Born-rule statistics."""

from .composite import (
    derivation_walkthrough,
    embed_bra,
    embed_ket,
    extend,
    partial_trace_fast,
    partial_trace_sequential,
    partial_trace_via_embeddings,
)
from .linalg import check_orthonormal, commutator, dagger, hermitian_eig, kron, matmul, trace
from .measurement import (
    Observable,
    born_probs,
    empirical_compare,
    expectation,
    joint_born_probs,
    marginalize,
    observable_from_matrix,
    sample_joint,
    verify_marginal_consistency,
)
from .states import (
    DensityOperator,
    Ket,
    bell_phi_plus,
    from_pure,
    product_state,
    random_density,
    validate_density,
)

__version__ = "0.1.0"

__all__ = [
    "DensityOperator",
    "Ket",
    "Observable",
    "bell_phi_plus",
    "born_probs",
    "check_orthonormal",
    "commutator",
    "dagger",
    "derivation_walkthrough",
    "embed_bra",
    "embed_ket",
    "empirical_compare",
    "expectation",
    "extend",
    "from_pure",
    "hermitian_eig",
    "joint_born_probs",
    "kron",
    "marginalize",
    "matmul",
    "observable_from_matrix",
    "partial_trace_fast",
    "partial_trace_sequential",
    "partial_trace_via_embeddings",
    "product_state",
    "random_density",
    "sample_joint",
    "trace",
    "validate_density",
    "verify_marginal_consistency",
]
