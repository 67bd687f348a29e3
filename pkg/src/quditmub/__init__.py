"""
Optimal operator bases for qudits.

The configuration and utilities are imported eagerly; the computational
modules are loaded on first access to one of their public names.
"""

from .config import Config, config
from . import utils

_lazy = {
    "zd_arith": {"PhaseExp", "CsVector", "CyclotomicValue", "enumerate_vanishing_sums",
                 "vanishing_sum_check", "factorize"},
    "monomial": {"MonomialOperator", "multiply", "adjoint", "hs_inner", "spectrum",
                 "eigenbasis", "from_dense", "tensor"},
    "pauli_basis": {"PauliLabel", "OperatorBasis", "make_X", "make_Z", "make_pauli",
                    "build_basis", "build_tensor_basis", "build_composite_basis", "audit"},
    "mub_partition": {"family_powers", "partition_basis", "partition_tensor_basis",
                      "verify_mub", "projector_from_family", "knight_move_unitary",
                      "shift_compose", "verify_diagonal_property", "count_knight_unitaries",
                      "knight_census"},
    "gate_classify": {"UnitaryGate", "builtin_gate", "conjugation_image", "classify",
                      "phase_is_dnary", "is_mub_preserving", "cycle_degree_histogram"},
    "fidelity_mc": {"QuantumChannel", "depolarizing", "dephasing", "unitary_error",
                    "noisy_implementation", "exact_average_fidelity",
                    "relevance_distribution", "mc_estimate", "eigenstate_inputs"},
}

def __getattr__(attr):
    for modname, names in _lazy.items():
        if attr in names:
            from importlib import import_module
            return getattr(import_module(f".{modname}", __name__), attr)
    raise AttributeError(f"Module `quditmub` does not define '{attr}'.")
