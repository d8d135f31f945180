"""Dense reference simulator and random circuit generator for the statevector tests."""

from functools import reduce
from typing import Optional, Tuple

import numpy as np

from autoansatz.quantum.statevector import Circuit, Gate, GateKind, Slot, SlotKind, bind_angles

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Z = np.diag([1.0, -1.0]).astype(np.complex128)
P0 = np.diag([1.0, 0.0]).astype(np.complex128)
P1 = np.diag([0.0, 1.0]).astype(np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)


def single_qubit_matrix(kind: GateKind, angle: Optional[float]) -> np.ndarray:
    if kind == GateKind.H:
        return H
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if kind == GateKind.RX:
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == GateKind.RY:
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    return np.diag([np.exp(-1j * angle / 2), np.exp(1j * angle / 2)])


def embed(ops: dict, n: int) -> np.ndarray:
    """Kronecker product with wire 0 as the leftmost (most significant) factor."""
    return reduce(np.kron, [ops.get(wire, I2) for wire in range(n)])


def dense_unitary(gate: Gate, n: int, angle: Optional[float] = None) -> np.ndarray:
    if gate.kind == GateKind.CNOT:
        control, target = gate.wires
        return embed({control: P0}, n) + embed({control: P1, target: X}, n)
    if gate.kind == GateKind.CZ:
        a, b = gate.wires
        return embed({a: P0}, n) + embed({a: P1, b: Z}, n)
    if gate.kind == GateKind.ZZ:
        a, b = gate.wires
        zz = embed({a: Z, b: Z}, n)
        return np.cos(angle / 2) * np.eye(1 << n) - 1j * np.sin(angle / 2) * zz
    return embed({gate.wires[0]: single_qubit_matrix(gate.kind, angle)}, n)


def dense_state(circuit: Circuit, theta: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Reference amplitudes for a single (unbatched) embedding vector."""
    state = np.zeros(1 << circuit.n, dtype=np.complex128)
    state[0] = 1.0
    for gate, angle in zip(circuit.gates, bind_angles(circuit, theta, x)):
        state = dense_unitary(gate, circuit.n, None if angle is None else float(angle)) @ state
    return state


def dense_expect_z(circuit: Circuit, theta: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = circuit.n
    state = dense_state(circuit, theta, x)
    return np.array([np.real(state.conj() @ embed({wire: Z}, n) @ state) for wire in range(n)])


def random_circuit(
    rng: np.random.Generator, n: int, n_gates: int, n_variational: int = 3, n_embedding: int = 2
) -> Tuple[Circuit, np.ndarray, np.ndarray]:
    """Random circuit over every gate kind plus matching angle vectors."""
    kinds = list(GateKind)
    gates = []
    for _ in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        if n == 1 and kind in (GateKind.CZ, GateKind.CNOT, GateKind.ZZ):
            kind = GateKind.RY
        if kind in (GateKind.CZ, GateKind.CNOT, GateKind.ZZ):
            wires = tuple(int(w) for w in rng.choice(n, size=2, replace=False))
        else:
            wires = (int(rng.integers(n)),)
        slot = None
        if kind in (GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.ZZ):
            if rng.random() < 0.5:
                slot = Slot(SlotKind.VARIATIONAL, int(rng.integers(n_variational)))
            else:
                slot = Slot(SlotKind.EMBEDDING, int(rng.integers(n_embedding)))
        gates.append(Gate(kind, wires, slot))
    circuit = Circuit(n=n, gates=tuple(gates), n_embedding=n_embedding, n_variational=n_variational)
    theta = rng.uniform(0, 2 * np.pi, n_variational)
    x = rng.uniform(-np.pi, np.pi, n_embedding)
    return circuit, theta, x
