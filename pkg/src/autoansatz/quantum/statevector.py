"""Dense noiseless statevector simulator.

Wire 0 is the most significant bit of the amplitude index. Gates are applied by
reshaping the amplitude buffer so that the touched wires become their own axes and
mixing the two halves in place, which costs O(2^n) per gate. Every kernel accepts
amplitudes with leading batch axes, ``(..., 2**n)``, so independent samples that
share a circuit are simulated together; angles are scalars or arrays matching the
batch shape.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from ..models import MAX_QUBITS

Angle = Union[float, np.ndarray]

_SQRT1_2 = 1.0 / np.sqrt(2.0)


class GateKind(str, Enum):
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    H = "H"
    CZ = "CZ"
    CNOT = "CNOT"
    ZZ = "ZZ"


PARAMETERIZED_KINDS = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.ZZ})
TWO_QUBIT_KINDS = frozenset({GateKind.CZ, GateKind.CNOT, GateKind.ZZ})


class SlotKind(str, Enum):
    EMBEDDING = "embedding"
    VARIATIONAL = "variational"


class Slot(NamedTuple):
    kind: SlotKind
    index: int


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    wires: Tuple[int, ...]
    slot: Optional[Slot] = None

    def __post_init__(self) -> None:
        expected = 2 if self.kind in TWO_QUBIT_KINDS else 1
        if len(self.wires) != expected:
            raise ValueError(f"{self.kind.value} acts on {expected} wire(s), got {self.wires}")
        if len(set(self.wires)) != len(self.wires):
            raise ValueError(f"{self.kind.value} wires must be distinct, got {self.wires}")
        if any(w < 0 for w in self.wires):
            raise ValueError(f"negative wire index in {self.wires}")
        if (self.slot is not None) != self.is_parameterized:
            raise ValueError(f"{self.kind.value} {'needs' if self.is_parameterized else 'takes no'} parameter slot")

    @property
    def is_parameterized(self) -> bool:
        return self.kind in PARAMETERIZED_KINDS


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list over a slot table of embedding and variational angles.

    A slot may be referenced by several gates; slots referenced by none are allowed.
    """

    n: int
    gates: Tuple[Gate, ...] = ()
    n_embedding: int = 0
    n_variational: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"qubit count {self.n} outside [1, {MAX_QUBITS}]")
        for position, gate in enumerate(self.gates):
            if any(w >= self.n for w in gate.wires):
                raise ValueError(f"gate {position} ({gate.kind.value}) wire out of range for n={self.n}")
            if gate.slot is not None:
                size = self.n_embedding if gate.slot.kind == SlotKind.EMBEDDING else self.n_variational
                if not 0 <= gate.slot.index < size:
                    raise ValueError(f"gate {position} references missing slot {gate.slot}")

    def slot_occurrences(self) -> Dict[Slot, List[int]]:
        occurrences: Dict[Slot, List[int]] = {}
        for position, gate in enumerate(self.gates):
            if gate.slot is not None:
                occurrences.setdefault(gate.slot, []).append(position)
        return occurrences


@dataclass(frozen=True)
class StateVector:
    n: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        if self.amps.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} amplitudes for n={self.n}, got {self.amps.shape}")

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        return cls(n, zero_amplitudes(n))

    def norm_squared(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)


def zero_amplitudes(n: int, batch_shape: Tuple[int, ...] = ()) -> np.ndarray:
    amps = np.zeros(batch_shape + (1 << n,), dtype=np.complex128)
    amps[..., 0] = 1.0
    return amps


def _wire_view(amps: np.ndarray, n: int, wire: int) -> np.ndarray:
    return amps.reshape(amps.shape[:-1] + (1 << wire, 2, 1 << (n - wire - 1)))


def _pair_view(amps: np.ndarray, n: int, first: int, second: int) -> Tuple[np.ndarray, Callable[[int, int], tuple]]:
    low, high = min(first, second), max(first, second)
    view = amps.reshape(amps.shape[:-1] + (1 << low, 2, 1 << (high - low - 1), 2, 1 << (n - high - 1)))

    def select(bit_first: int, bit_second: int) -> tuple:
        bit_low, bit_high = (bit_first, bit_second) if first < second else (bit_second, bit_first)
        return (Ellipsis, slice(None), bit_low, slice(None), bit_high, slice(None))

    return view, select


def _expand(angle: Angle, trailing: int) -> np.ndarray:
    return np.asarray(angle, dtype=np.float64)[(Ellipsis,) + (None,) * trailing]


def apply_inplace(amps: np.ndarray, n: int, gate: Gate, angle: Optional[Angle] = None) -> None:
    """Apply ``gate`` to ``amps`` in place."""
    kind = gate.kind
    if kind in TWO_QUBIT_KINDS:
        view, select = _pair_view(amps, n, gate.wires[0], gate.wires[1])
        if kind == GateKind.CZ:
            view[select(1, 1)] *= -1.0
        elif kind == GateKind.CNOT:
            swapped = view[select(1, 0)].copy()
            view[select(1, 0)] = view[select(1, 1)]
            view[select(1, 1)] = swapped
        else:
            half = _expand(angle, 3) / 2.0
            even, odd = np.exp(-1j * half), np.exp(1j * half)
            view[select(0, 0)] *= even
            view[select(1, 1)] *= even
            view[select(0, 1)] *= odd
            view[select(1, 0)] *= odd
        return

    view = _wire_view(amps, n, gate.wires[0])
    zero, one = view[..., :, 0, :], view[..., :, 1, :]
    if kind == GateKind.RZ:
        half = _expand(angle, 2) / 2.0
        zero *= np.exp(-1j * half)
        one *= np.exp(1j * half)
        return

    # [[m00, m01], [m10, m11]] acting on (zero, one)
    m00: Angle
    m01: Angle
    m10: Angle
    m11: Angle
    if kind == GateKind.H:
        m00 = m01 = m10 = _SQRT1_2
        m11 = -_SQRT1_2
    else:
        half = _expand(angle, 2) / 2.0
        m00 = m11 = np.cos(half)
        if kind == GateKind.RY:
            m10 = np.sin(half)
            m01 = -m10
        else:
            m01 = m10 = -1j * np.sin(half)
    saved = zero.copy()
    zero *= m00
    zero += m01 * one
    one *= m11
    one += m10 * saved


def apply_inverse_inplace(amps: np.ndarray, n: int, gate: Gate, angle: Optional[Angle] = None) -> None:
    if gate.is_parameterized:
        apply_inplace(amps, n, gate, -np.asarray(angle, dtype=np.float64))
    else:
        apply_inplace(amps, n, gate)


def apply_generator(amps: np.ndarray, n: int, gate: Gate) -> np.ndarray:
    """Return the Pauli generator G of a rotation exp(-i angle G / 2) applied to ``amps``."""
    if not gate.is_parameterized:
        raise ValueError(f"{gate.kind.value} has no rotation generator")
    out = amps.copy()
    if gate.kind == GateKind.ZZ:
        view, select = _pair_view(out, n, gate.wires[0], gate.wires[1])
        view[select(0, 1)] *= -1.0
        view[select(1, 0)] *= -1.0
        return out

    view = _wire_view(out, n, gate.wires[0])
    if gate.kind == GateKind.RZ:
        view[..., :, 1, :] *= -1.0
        return out
    zero = view[..., :, 0, :].copy()
    if gate.kind == GateKind.RX:
        view[..., :, 0, :] = view[..., :, 1, :]
        view[..., :, 1, :] = zero
    else:
        view[..., :, 0, :] = -1j * view[..., :, 1, :]
        view[..., :, 1, :] = 1j * zero
    return out


def _check_wires(gate: Gate, n: int) -> None:
    if any(w >= n for w in gate.wires):
        raise ValueError(f"{gate.kind.value} wires {gate.wires} out of range for n={n}")


def apply_gate(state: StateVector, gate: Gate, angle: Optional[float] = None) -> StateVector:
    _check_wires(gate, state.n)
    if gate.is_parameterized and angle is None:
        raise ValueError(f"{gate.kind.value} needs an angle")
    if not gate.is_parameterized and angle is not None:
        raise ValueError(f"{gate.kind.value} takes no angle")
    amps = state.amps.copy()
    apply_inplace(amps, state.n, gate, angle)
    return StateVector(state.n, amps)


@lru_cache(maxsize=None)
def z_signs(n: int) -> np.ndarray:
    """(n, 2**n) matrix of Z eigenvalues: +1 where the wire's bit is 0, -1 where it is 1."""
    index = np.arange(1 << n)
    bits = (index[None, :] >> (n - 1 - np.arange(n))[:, None]) & 1
    signs = 1.0 - 2.0 * bits
    signs.flags.writeable = False
    return signs


def expect_z_all(amps: np.ndarray, n: int) -> np.ndarray:
    probabilities = np.abs(amps) ** 2
    return probabilities @ z_signs(n).T


def expect_z(state: StateVector, wire: int) -> float:
    if not 0 <= wire < state.n:
        raise ValueError(f"wire {wire} out of range for n={state.n}")
    view = _wire_view(np.abs(state.amps) ** 2, state.n, wire)
    return float(view[:, 0, :].sum() - view[:, 1, :].sum())


def check_slot_vectors(circuit: Circuit, variational: np.ndarray, embedding: np.ndarray) -> None:
    if variational.shape != (circuit.n_variational,):
        raise ValueError(
            f"expected {circuit.n_variational} variational angles, got shape {variational.shape}"
        )
    if embedding.ndim == 0 or embedding.shape[-1] != circuit.n_embedding:
        raise ValueError(f"expected {circuit.n_embedding} embedding angles, got shape {embedding.shape}")


def bind_angles(
    circuit: Circuit,
    variational: Sequence[float],
    embedding: Sequence[float],
    offsets: Optional[Mapping[int, float]] = None,
) -> List[Optional[Angle]]:
    """Resolve every gate's angle; ``offsets`` shifts individual gate occurrences."""
    theta = np.asarray(variational, dtype=np.float64)
    x = np.asarray(embedding, dtype=np.float64)
    check_slot_vectors(circuit, theta, x)
    angles: List[Optional[Angle]] = []
    for position, gate in enumerate(circuit.gates):
        if gate.slot is None:
            angles.append(None)
            continue
        value: Angle = theta[gate.slot.index] if gate.slot.kind == SlotKind.VARIATIONAL else x[..., gate.slot.index]
        if offsets and position in offsets:
            value = value + offsets[position]
        angles.append(value)
    return angles


def simulate(
    circuit: Circuit,
    variational: Sequence[float],
    embedding: Sequence[float],
    offsets: Optional[Mapping[int, float]] = None,
) -> np.ndarray:
    """Final amplitudes, shape ``batch + (2**n,)`` where batch is the embedding's leading shape."""
    angles = bind_angles(circuit, variational, embedding, offsets)
    batch_shape = np.asarray(embedding, dtype=np.float64).shape[:-1]
    amps = zero_amplitudes(circuit.n, batch_shape)
    for gate, angle in zip(circuit.gates, angles):
        apply_inplace(amps, circuit.n, gate, angle)
    return amps


def run_circuit(
    circuit: Circuit,
    variational: Sequence[float],
    embedding: Sequence[float],
    offsets: Optional[Mapping[int, float]] = None,
) -> np.ndarray:
    """Pauli-Z readout (<Z_0>, ..., <Z_{n-1}>) starting from |0...0>."""
    return expect_z_all(simulate(circuit, variational, embedding, offsets), circuit.n)
