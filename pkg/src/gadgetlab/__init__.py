"""Gadget compiler and numerical laboratory for 2-local Hamiltonian simulation.

Maps k-local interactions onto bounded-strength 2-local simulators with
mediator qubits, derives the rotation generators that relate the two, and
certifies the accuracy claims by exact diagonalization on small registers.
"""

from .pauli import (
    FormatError,
    LocalityProfile,
    PauliString,
    PauliSum,
    PauliTerm,
    commutator,
    embed,
    load_hamiltonian,
    locality_profile,
    multiply,
    operator_norm_local,
    parse_hamiltonian,
    serialize_hamiltonian,
)
from .spectral import (
    BlockDecomposition,
    ConvergenceError,
    DenseOperator,
    GroundStateResult,
    ProjectorSplit,
    block_extract,
    conjugate_by_exp,
    ground_energy,
    matrix_to_pauli_sum,
    pauli_decompose,
    to_matrix,
    to_sparse,
)
from .gadgets import (
    FactorizedInteraction,
    GadgetInstance,
    LevelRecord,
    LevelSchedule,
    SimulatorHamiltonian,
    assemble_simulator,
    factorize_term,
    reduce_to_two_local,
    serialize_compiled,
    subdivision_gadget,
    three_to_two_gadget,
)
from .swt import (
    EffectiveHamiltonian,
    SWGenerator,
    block_split,
    effective_hamiltonian,
    gadget_split,
    l0_inverse,
    sw_exact,
    sw_gadget_closed_form,
    sw_perturbative,
)
from .bounds import (
    CrossGadgetReport,
    RemainderReport,
    ScalingReport,
    counting_norm_bound,
    cross_gadget_report,
    lemma1_suite,
    lemma2_scaling,
    nested_commutator,
    operator_inequality_check,
    project_low,
    random_pauli_sum,
    remainder_r_k,
)
from .reporting import (
    SCALING_COLUMNS,
    ScalingRecord,
    fit_loglog,
    read_records,
    write_records,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # pauli
    "FormatError",
    "LocalityProfile",
    "PauliString",
    "PauliSum",
    "PauliTerm",
    "commutator",
    "embed",
    "load_hamiltonian",
    "locality_profile",
    "multiply",
    "operator_norm_local",
    "parse_hamiltonian",
    "serialize_hamiltonian",
    # spectral
    "BlockDecomposition",
    "ConvergenceError",
    "DenseOperator",
    "GroundStateResult",
    "ProjectorSplit",
    "block_extract",
    "conjugate_by_exp",
    "ground_energy",
    "matrix_to_pauli_sum",
    "pauli_decompose",
    "to_matrix",
    "to_sparse",
    # gadgets
    "FactorizedInteraction",
    "GadgetInstance",
    "LevelRecord",
    "LevelSchedule",
    "SimulatorHamiltonian",
    "assemble_simulator",
    "factorize_term",
    "reduce_to_two_local",
    "serialize_compiled",
    "subdivision_gadget",
    "three_to_two_gadget",
    # swt
    "EffectiveHamiltonian",
    "SWGenerator",
    "block_split",
    "effective_hamiltonian",
    "gadget_split",
    "l0_inverse",
    "sw_exact",
    "sw_gadget_closed_form",
    "sw_perturbative",
    # bounds
    "CrossGadgetReport",
    "RemainderReport",
    "ScalingReport",
    "counting_norm_bound",
    "cross_gadget_report",
    "lemma1_suite",
    "lemma2_scaling",
    "nested_commutator",
    "operator_inequality_check",
    "project_low",
    "random_pauli_sum",
    "remainder_r_k",
    # reporting
    "SCALING_COLUMNS",
    "ScalingRecord",
    "fit_loglog",
    "read_records",
    "write_records",
]
