"""Entanglement-swapping QKD simulator.

A small dense state-vector kernel over named qubits, round drivers for
the original and Hadamard-hardened key distribution protocols, a family
of eavesdropping strategies wired in as channel hooks, and exact (full
branch enumeration) plus Monte Carlo detection statistics.
"""

from .qkernel import (
    ATOL,
    BellOutcome,
    BranchAction,
    PauliOp,
    PureState,
    apply_bell_conditioned,
    apply_hadamard,
    apply_pauli,
    bell_distribution,
    bell_pair,
    chi_pair,
    delta_circuit_stages,
    equal_up_to_global_phase,
    measure_bell,
    measure_bell_remove,
    omega_pair,
    pauli_bell_action,
    prepare_delta,
    prepare_delta_circuit,
    tensor,
)
from .protocol import (
    ChannelHooks,
    RoundConfig,
    RoundTranscript,
    Variant,
    deduce_pauli,
    imaginary_result,
    key_bits,
    run_modified_round,
    run_original_round,
    run_round,
)
from .adversary import (
    AttackKind,
    EveRecord,
    delayed_hooks,
    delta_swap_hooks,
    eve_infer_key,
    first_bsm_corrections,
    intercept_resend_hooks,
    make_hooks,
    second_bsm_corrections,
    source_control_hooks,
)
from .analysis import (
    DetectionReport,
    MonteCarloStats,
    RoundStats,
    build_report,
    closed_form_session_detection,
    correlation_table,
    enumerate_round_branches,
    exact_round_stats,
    monte_carlo,
    session_detection,
)
from .sampling import BranchPoint, BranchSource, SeededSource

__version__ = "0.1.0"

__all__ = [
    "ATOL",
    "AttackKind",
    "BellOutcome",
    "BranchAction",
    "BranchPoint",
    "BranchSource",
    "ChannelHooks",
    "DetectionReport",
    "EveRecord",
    "MonteCarloStats",
    "PauliOp",
    "PureState",
    "RoundConfig",
    "RoundStats",
    "RoundTranscript",
    "SeededSource",
    "Variant",
    "apply_bell_conditioned",
    "apply_hadamard",
    "apply_pauli",
    "bell_distribution",
    "bell_pair",
    "build_report",
    "chi_pair",
    "closed_form_session_detection",
    "correlation_table",
    "deduce_pauli",
    "delayed_hooks",
    "delta_circuit_stages",
    "delta_swap_hooks",
    "enumerate_round_branches",
    "equal_up_to_global_phase",
    "eve_infer_key",
    "exact_round_stats",
    "first_bsm_corrections",
    "imaginary_result",
    "intercept_resend_hooks",
    "key_bits",
    "make_hooks",
    "measure_bell",
    "measure_bell_remove",
    "monte_carlo",
    "omega_pair",
    "pauli_bell_action",
    "prepare_delta",
    "prepare_delta_circuit",
    "run_modified_round",
    "run_original_round",
    "run_round",
    "second_bsm_corrections",
    "session_detection",
    "source_control_hooks",
    "tensor",
]
