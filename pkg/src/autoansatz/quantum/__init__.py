"""Statevector simulation, circuit templates and circuit derivatives."""

from .ansatz import (
    build_circuit,
    count_params,
    embed_count,
    embedding_values,
    embedding_vjp,
    iqp_pairs,
)
from .gradients import GradientRequest, adjoint_grad, adjoint_vjp, finite_diff_grad, param_shift_grad
from .statevector import (
    Circuit,
    Gate,
    GateKind,
    Slot,
    SlotKind,
    StateVector,
    apply_gate,
    expect_z,
    run_circuit,
    simulate,
)

__all__ = [
    "Circuit",
    "Gate",
    "GateKind",
    "GradientRequest",
    "Slot",
    "SlotKind",
    "StateVector",
    "adjoint_grad",
    "adjoint_vjp",
    "apply_gate",
    "build_circuit",
    "count_params",
    "embed_count",
    "embedding_values",
    "embedding_vjp",
    "expect_z",
    "finite_diff_grad",
    "iqp_pairs",
    "param_shift_grad",
    "run_circuit",
    "simulate",
]
