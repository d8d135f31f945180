"""Embedding and variational circuit templates.

Every template appends whole layers to a :class:`CircuitBuilder`; the embedding
always comes first so that embedding slots are numbered before any variational one.
"""

import logging
from abc import ABC, abstractmethod
from itertools import combinations
from typing import Callable, ClassVar, Dict, List, Optional, Tuple, Type, TypeVar

import numpy as np

from ..models import AnsatzSpec, EmbeddingKind, VariationalKind
from .statevector import Circuit, Gate, GateKind, Slot, SlotKind

logger = logging.getLogger(__name__)

_RANDOM_ROTATIONS = (GateKind.RX, GateKind.RY, GateKind.RZ)


class CircuitBuilder:
    """Collects gates and hands out fresh slot references."""

    def __init__(self, n: int):
        self.n = n
        self.gates: List[Gate] = []
        self.n_embedding = 0
        self.n_variational = 0

    def embedding_slot(self) -> Slot:
        slot = Slot(SlotKind.EMBEDDING, self.n_embedding)
        self.n_embedding += 1
        return slot

    def variational_slot(self) -> Slot:
        slot = Slot(SlotKind.VARIATIONAL, self.n_variational)
        self.n_variational += 1
        return slot

    def add(self, kind: GateKind, *wires: int, slot: Optional[Slot] = None) -> None:
        self.gates.append(Gate(kind, tuple(wires), slot))

    def rotation(self, kind: GateKind, wire: int) -> None:
        self.add(kind, wire, slot=self.variational_slot())

    def build(self) -> Circuit:
        return Circuit(
            n=self.n,
            gates=tuple(self.gates),
            n_embedding=self.n_embedding,
            n_variational=self.n_variational,
        )


def iqp_pairs(n: int) -> List[Tuple[int, int]]:
    """Unordered qubit pairs i < j in lexicographic order; the k-th pair owns slot n + k."""
    return list(combinations(range(n), 2))


def embedding_size(kind: EmbeddingKind, n: int) -> int:
    if EmbeddingKind(kind) == EmbeddingKind.ANGLE:
        return n
    return n + n * (n - 1) // 2


def embed_count(spec: AnsatzSpec) -> int:
    return embedding_size(spec.embedding, spec.n)


def embedding_values(kind: EmbeddingKind, a: np.ndarray) -> np.ndarray:
    """Map per-qubit pre-activations ``a`` (shape ``(..., n)``) to embedding slot values."""
    a = np.asarray(a, dtype=np.float64)
    if EmbeddingKind(kind) == EmbeddingKind.ANGLE:
        return a
    pairs = iqp_pairs(a.shape[-1])
    if not pairs:
        return a
    first, second = (np.array(index) for index in zip(*pairs))
    return np.concatenate([a, a[..., first] * a[..., second]], axis=-1)


def embedding_vjp(kind: EmbeddingKind, a: np.ndarray, grad_values: np.ndarray) -> np.ndarray:
    """Pull a gradient on embedding slot values back to the per-qubit pre-activations."""
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[-1]
    grad_a = np.array(grad_values[..., :n], dtype=np.float64)
    if EmbeddingKind(kind) == EmbeddingKind.ANGLE:
        return grad_a
    for k, (i, j) in enumerate(iqp_pairs(n)):
        g = grad_values[..., n + k]
        grad_a[..., i] += g * a[..., j]
        grad_a[..., j] += g * a[..., i]
    return grad_a


def append_embedding(builder: CircuitBuilder, kind: EmbeddingKind) -> None:
    n = builder.n
    if EmbeddingKind(kind) == EmbeddingKind.ANGLE:
        for wire in range(n):
            builder.add(GateKind.RY, wire, slot=builder.embedding_slot())
        return

    for wire in range(n):
        builder.add(GateKind.H, wire)
    for wire in range(n):
        builder.add(GateKind.RZ, wire, slot=builder.embedding_slot())
    for i, j in iqp_pairs(n):
        builder.add(GateKind.ZZ, i, j, slot=builder.embedding_slot())


class Ansatz(ABC):
    """Base class for variational templates."""

    kind: ClassVar[VariationalKind]

    @staticmethod
    @abstractmethod
    def count(n: int, L: int) -> int:
        """Number of variational slots the template creates."""

    @abstractmethod
    def append_layer(self, builder: CircuitBuilder, layer: int) -> None:
        pass

    def append(self, builder: CircuitBuilder, L: int) -> None:
        for layer in range(L):
            self.append_layer(builder, layer)


_TEMPLATES: Dict[VariationalKind, Type[Ansatz]] = {}

A = TypeVar("A", bound=Type[Ansatz])


def register(kind: VariationalKind) -> Callable[[A], A]:
    def decorator(cls: A) -> A:
        cls.kind = kind
        _TEMPLATES[kind] = cls
        return cls

    return decorator


def get_template(kind: VariationalKind, structure_seed: int = 0) -> Ansatz:
    template_class = _TEMPLATES.get(VariationalKind(kind))
    if template_class is None:
        raise ValueError(f"unknown variational template {kind!r}")
    if template_class is RandomAnsatz:
        return RandomAnsatz(structure_seed)
    return template_class()


@register(VariationalKind.S2D)
class SimplifiedTwoDesign(Ansatz):
    @staticmethod
    def count(n: int, L: int) -> int:
        return 2 * (n - 1) * L

    def append_layer(self, builder: CircuitBuilder, layer: int) -> None:
        for start in (0, 1):
            pairs = [(i, i + 1) for i in range(start, builder.n - 1, 2)]
            for i, j in pairs:
                builder.add(GateKind.CZ, i, j)
            for i, j in pairs:
                builder.rotation(GateKind.RY, i)
                builder.rotation(GateKind.RY, j)


@register(VariationalKind.QAOA)
class QaoaLayers(Ansatz):
    """ZZ cost ring then RX mixer. Two qubits share one coupler, so n=2 gives 3 angles per layer."""

    @staticmethod
    def couplers(n: int) -> List[Tuple[int, int]]:
        if n == 2:
            return [(0, 1)]
        return [(i, (i + 1) % n) for i in range(n)]

    @staticmethod
    def count(n: int, L: int) -> int:
        return (len(QaoaLayers.couplers(n)) + n) * L

    def append_layer(self, builder: CircuitBuilder, layer: int) -> None:
        for i, j in self.couplers(builder.n):
            builder.add(GateKind.ZZ, i, j, slot=builder.variational_slot())
        for wire in range(builder.n):
            builder.rotation(GateKind.RX, wire)


@register(VariationalKind.TTN)
class TreeTensorNetwork(Ansatz):
    @staticmethod
    def count(n: int, L: int) -> int:
        return 2 * (n - 1) * L

    def append_layer(self, builder: CircuitBuilder, layer: int) -> None:
        active = list(range(builder.n))
        while len(active) > 1:
            survivors = []
            for k in range(0, len(active) - 1, 2):
                upper, lower = active[k], active[k + 1]
                builder.rotation(GateKind.RY, upper)
                builder.rotation(GateKind.RY, lower)
                builder.add(GateKind.CNOT, upper, lower)
                survivors.append(lower)
            if len(active) % 2:
                survivors.append(active[-1])
            active = survivors


@register(VariationalKind.MPS)
class MatrixProductState(Ansatz):
    @staticmethod
    def count(n: int, L: int) -> int:
        return 2 * (n - 1) * L

    def append_layer(self, builder: CircuitBuilder, layer: int) -> None:
        for i in range(builder.n - 1):
            builder.rotation(GateKind.RY, i)
            builder.rotation(GateKind.RY, i + 1)
            builder.add(GateKind.CNOT, i, i + 1)


@register(VariationalKind.STRONG)
class StronglyEntangling(Ansatz):
    @staticmethod
    def count(n: int, L: int) -> int:
        return 3 * n * L

    def append_layer(self, builder: CircuitBuilder, layer: int) -> None:
        n = builder.n
        for wire in range(n):
            builder.rotation(GateKind.RZ, wire)
            builder.rotation(GateKind.RY, wire)
            builder.rotation(GateKind.RZ, wire)
        reach = 1 + layer % (n - 1)
        for wire in range(n):
            builder.add(GateKind.CNOT, wire, (wire + reach) % n)


@register(VariationalKind.BASIC)
class BasicEntangler(Ansatz):
    @staticmethod
    def count(n: int, L: int) -> int:
        return n * L

    def append_layer(self, builder: CircuitBuilder, layer: int) -> None:
        n = builder.n
        for wire in range(n):
            builder.rotation(GateKind.RY, wire)
        ring = [(0, 1)] if n == 2 else [(i, (i + 1) % n) for i in range(n)]
        for control, target in ring:
            builder.add(GateKind.CNOT, control, target)


@register(VariationalKind.RANDOM)
class RandomAnsatz(Ansatz):
    """Seeded random rotations, with a CNOT on a random wire pair after every second one."""

    def __init__(self, structure_seed: int = 0):
        self.structure_seed = structure_seed
        self._rng = np.random.default_rng(structure_seed)

    @staticmethod
    def count(n: int, L: int) -> int:
        return n * L

    def append(self, builder: CircuitBuilder, L: int) -> None:
        # Same seed, same gate list
        self._rng = np.random.default_rng(self.structure_seed)
        super().append(builder, L)

    def append_layer(self, builder: CircuitBuilder, layer: int) -> None:
        n = builder.n
        for k in range(n):
            kind = _RANDOM_ROTATIONS[int(self._rng.integers(len(_RANDOM_ROTATIONS)))]
            builder.rotation(kind, int(self._rng.integers(n)))
            if k % 2 == 1:
                control, target = self._rng.choice(n, size=2, replace=False)
                builder.add(GateKind.CNOT, int(control), int(target))


def count_params(variational: VariationalKind, n: int, L: int) -> int:
    if n < 2 or L < 1:
        raise ValueError(f"templates need n >= 2 and L >= 1, got n={n}, L={L}")
    return get_template(variational).count(n, L)


def build_circuit(spec: AnsatzSpec) -> Circuit:
    builder = CircuitBuilder(spec.n)
    append_embedding(builder, spec.embedding)
    get_template(spec.variational, spec.structure_seed).append(builder, spec.L)
    circuit = builder.build()

    expected = count_params(spec.variational, spec.n, spec.L)
    if circuit.n_variational != expected:
        raise RuntimeError(
            f"{VariationalKind(spec.variational).value} built {circuit.n_variational} slots, expected {expected}"
        )
    logger.debug(
        f"Built {EmbeddingKind(spec.embedding).value}/{VariationalKind(spec.variational).value} "
        f"n={spec.n} L={spec.L}: {len(circuit.gates)} gates, {circuit.n_variational} angles"
    )
    return circuit
