"""Derivatives of Pauli-Z readouts with respect to circuit angles.

Jacobians have shape ``batch + (n, S)``: one row per readout, one column per requested
slot, variational slots first and embedding slots after them. The chain rule from
embedding angles back to raw features belongs to the model, not here.
"""

from dataclasses import dataclass
from typing import List, Literal, Tuple

import numpy as np

from .statevector import (
    PARAMETERIZED_KINDS,
    Circuit,
    Slot,
    SlotKind,
    apply_generator,
    apply_inverse_inplace,
    bind_angles,
    check_slot_vectors,
    run_circuit,
    simulate,
    z_signs,
)

SHIFT = np.pi / 2
DEFAULT_FD_STEP = 1e-4

Which = Literal["variational", "embedding", "both"]


@dataclass(frozen=True)
class GradientRequest:
    circuit: Circuit
    theta: np.ndarray
    x: np.ndarray
    which: Which = "both"

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=np.float64))
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.float64))
        check_slot_vectors(self.circuit, self.theta, self.x)
        if self.which not in ("variational", "embedding", "both"):
            raise ValueError(f"unknown slot selection {self.which!r}")

    @property
    def slots(self) -> List[Slot]:
        slots: List[Slot] = []
        if self.which in ("variational", "both"):
            slots += [Slot(SlotKind.VARIATIONAL, i) for i in range(self.circuit.n_variational)]
        if self.which in ("embedding", "both"):
            slots += [Slot(SlotKind.EMBEDDING, i) for i in range(self.circuit.n_embedding)]
        return slots

    @property
    def batch_shape(self) -> Tuple[int, ...]:
        return self.x.shape[:-1]


def param_shift_grad(req: GradientRequest) -> np.ndarray:
    """Two-term parameter-shift Jacobian, summed over every occurrence of a shared slot."""
    circuit = req.circuit
    for gate in circuit.gates:
        if gate.slot is not None and gate.kind not in PARAMETERIZED_KINDS:
            raise ValueError(f"{gate.kind.value} does not admit the two-term shift rule")

    occurrences = circuit.slot_occurrences()
    slots = req.slots
    jacobian = np.zeros(req.batch_shape + (circuit.n, len(slots)))
    for column, slot in enumerate(slots):
        for position in occurrences.get(slot, []):
            plus = run_circuit(circuit, req.theta, req.x, offsets={position: SHIFT})
            minus = run_circuit(circuit, req.theta, req.x, offsets={position: -SHIFT})
            jacobian[..., column] += 0.5 * (plus - minus)
    return jacobian


def finite_diff_grad(req: GradientRequest, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central finite differences per slot."""
    if h <= 0:
        raise ValueError(f"finite-difference step must be positive, got {h}")

    circuit = req.circuit
    slots = req.slots
    jacobian = np.zeros(req.batch_shape + (circuit.n, len(slots)))
    for column, slot in enumerate(slots):
        theta_plus, theta_minus = req.theta.copy(), req.theta.copy()
        x_plus, x_minus = req.x.copy(), req.x.copy()
        if slot.kind == SlotKind.VARIATIONAL:
            theta_plus[slot.index] += h
            theta_minus[slot.index] -= h
        else:
            x_plus[..., slot.index] += h
            x_minus[..., slot.index] -= h
        plus = run_circuit(circuit, theta_plus, x_plus)
        minus = run_circuit(circuit, theta_minus, x_minus)
        jacobian[..., column] = (plus - minus) / (2.0 * h)
    return jacobian


def adjoint_vjp(
    circuit: Circuit, theta: np.ndarray, x: np.ndarray, cotangent: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient of sum_i c_i <Z_i> by one forward and one reverse sweep.

    Returns per-sample gradients with respect to variational angles, shape
    ``batch + (n_variational,)``, and embedding angles, ``batch + (n_embedding,)``.
    """
    theta = np.asarray(theta, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    batch_shape = x.shape[:-1]
    cotangent = np.broadcast_to(np.asarray(cotangent, dtype=np.float64), batch_shape + (circuit.n,))

    angles = bind_angles(circuit, theta, x)
    psi = simulate(circuit, theta, x)
    lam = (cotangent @ z_signs(circuit.n)) * psi

    grad_theta = np.zeros(batch_shape + (circuit.n_variational,))
    grad_x = np.zeros(batch_shape + (circuit.n_embedding,))
    for position in range(len(circuit.gates) - 1, -1, -1):
        gate, angle = circuit.gates[position], angles[position]
        if gate.slot is not None:
            mixed = apply_generator(psi, circuit.n, gate)
            contribution = np.einsum("...k,...k->...", lam.conj(), mixed).imag
            if gate.slot.kind == SlotKind.VARIATIONAL:
                grad_theta[..., gate.slot.index] += contribution
            else:
                grad_x[..., gate.slot.index] += contribution
        apply_inverse_inplace(psi, circuit.n, gate, angle)
        apply_inverse_inplace(lam, circuit.n, gate, angle)
    return grad_theta, grad_x


def adjoint_grad(req: GradientRequest) -> np.ndarray:
    """Jacobian in the layout of :func:`param_shift_grad`, one reverse sweep per readout."""
    circuit = req.circuit
    columns = []
    for wire in range(circuit.n):
        cotangent = np.zeros(req.batch_shape + (circuit.n,))
        cotangent[..., wire] = 1.0
        grad_theta, grad_x = adjoint_vjp(circuit, req.theta, req.x, cotangent)
        parts = []
        if req.which in ("variational", "both"):
            parts.append(grad_theta)
        if req.which in ("embedding", "both"):
            parts.append(grad_x)
        columns.append(np.concatenate(parts, axis=-1))
    return np.stack(columns, axis=-2)
