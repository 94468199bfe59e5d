"""Bit-string encoding of quantum feature-map circuits.

Each gate slot takes 5 bits: the first three pick the gate kind and the last
two pick a proportionality factor used by the rotation gates. Slot ``i`` acts
on qubit ``i % M`` and, for rotations, encodes feature ``i % N``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

GENE_BITS = 5


class EncodingError(ValueError):
    """Raised for malformed genes, chromosomes, or unencodable circuits."""


class GateKind(str, enum.Enum):
    H = "H"
    CNOT = "CNOT"
    I = "I"  # noqa: E741
    RX = "RX"
    RY = "RY"
    RZ = "RZ"

    @property
    def is_rotation(self) -> bool:
        return self in (GateKind.RX, GateKind.RY, GateKind.RZ)


KIND_TABLE = {
    "000": GateKind.H,
    "001": GateKind.CNOT,
    "010": GateKind.I,
    "011": GateKind.RX,
    "100": GateKind.RZ,
    "101": GateKind.I,
    "110": GateKind.I,
    "111": GateKind.RY,
}

PROPORTIONALITY_TABLE = {
    "00": math.pi,
    "01": math.pi / 2,
    "10": math.pi / 4,
    "11": math.pi / 8,
}

# Canonical inverse tables; Identity always encodes as "010".
_KIND_BITS = {
    GateKind.H: "000",
    GateKind.CNOT: "001",
    GateKind.I: "010",
    GateKind.RX: "011",
    GateKind.RZ: "100",
    GateKind.RY: "111",
}
_PROP_BITS = {v: k for k, v in PROPORTIONALITY_TABLE.items()}


@dataclass(frozen=True)
class GateGene:
    kind: GateKind
    proportionality: float
    bits: str = ""


@dataclass(frozen=True)
class Chromosome:
    bits: str
    qubits: int
    layers: int

    def __post_init__(self):
        if self.qubits < 1 or self.layers < 1:
            raise EncodingError("qubit and layer budgets must be positive")
        if len(self.bits) != GENE_BITS * self.qubits * self.layers:
            raise EncodingError(
                f"chromosome has {len(self.bits)} bits, expected "
                f"{GENE_BITS * self.qubits * self.layers} for M={self.qubits}, N={self.layers}"
            )
        if set(self.bits) - {"0", "1"}:
            raise EncodingError("chromosome bits must be '0' or '1'")

    @property
    def n_slots(self) -> int:
        return self.qubits * self.layers

    def genes(self) -> list[str]:
        return [self.bits[i:i + GENE_BITS] for i in range(0, len(self.bits), GENE_BITS)]


@dataclass(frozen=True)
class PlacedGate:
    """A gate placed on the circuit grid.

    For CNOT, ``qubit`` is the control and ``target`` the target qubit. For
    rotations ``feature`` is the index of the encoded input feature.
    """

    slot: int
    kind: GateKind
    qubit: int
    proportionality: float
    feature: Optional[int] = None
    target: Optional[int] = None


@dataclass(frozen=True)
class FeatureMapCircuit:
    gates: tuple[PlacedGate, ...]
    qubits: int
    feature_count: int
    overrides: Optional[tuple[float, ...]] = None
    layers: int = 1

    def __post_init__(self):
        if self.overrides is not None and len(self.overrides) != len(self.rotation_gates):
            raise EncodingError(
                f"{len(self.overrides)} overrides for {len(self.rotation_gates)} rotation gates"
            )

    @property
    def rotation_gates(self) -> list[PlacedGate]:
        return [g for g in self.gates if g.kind.is_rotation]

    def with_overrides(self, values: Optional[Sequence[float]]) -> "FeatureMapCircuit":
        return replace(self, overrides=None if values is None else tuple(float(v) for v in values))

    def placement(self) -> list[tuple]:
        """Gate structure without parameter values, for structural comparisons."""
        return [(g.slot, g.kind, g.qubit, g.feature, g.target) for g in self.gates]


@dataclass(frozen=True)
class SizeMetrics:
    n_local: int
    n_cnot: int
    sm: float
    ws: Optional[float] = None


def decode_gene(bits5: str) -> GateGene:
    if len(bits5) != GENE_BITS or set(bits5) - {"0", "1"}:
        raise EncodingError(f"malformed gene {bits5!r}: need exactly 5 bits")
    return GateGene(KIND_TABLE[bits5[:3]], PROPORTIONALITY_TABLE[bits5[3:]], bits5)


def decode_chromosome(c: Chromosome, n_features: Optional[int] = None) -> FeatureMapCircuit:
    """Decode a chromosome into its placed gates.

    Args:
        c: the chromosome.
        n_features: dimensionality of the data. When smaller than the layer
            budget, feature indices ``i % N`` are further wrapped modulo the
            data dimension so every rotation binds an existing feature.
    """
    M, N = c.qubits, c.layers
    gates = []
    for i, gene_bits in enumerate(c.genes()):
        gene = decode_gene(gene_bits)
        q = i % M
        if gene.kind is GateKind.I or (gene.kind is GateKind.CNOT and M == 1):
            # a CNOT needs two distinct qubits
            continue
        if gene.kind is GateKind.CNOT:
            gates.append(PlacedGate(i, gene.kind, q, gene.proportionality, target=(i + 1) % M))
        elif gene.kind.is_rotation:
            f = i % N
            if n_features is not None and n_features < N:
                f %= n_features
            gates.append(PlacedGate(i, gene.kind, q, gene.proportionality, feature=f))
        else:
            gates.append(PlacedGate(i, gene.kind, q, gene.proportionality))
    feats = [g.feature for g in gates if g.feature is not None]
    return FeatureMapCircuit(tuple(gates), M, max(feats) + 1 if feats else 0, layers=N)


def encode_circuit(fm: FeatureMapCircuit, qubits: int, layers: int) -> Chromosome:
    if fm.overrides is not None:
        raise EncodingError("circuits with continuous overrides cannot be encoded")
    n_slots = qubits * layers
    genes = ["01000"] * n_slots
    for g in fm.gates:
        if not 0 <= g.slot < n_slots or g.qubit != g.slot % qubits:
            raise EncodingError(f"gate at slot {g.slot} does not fit M={qubits}, N={layers}")
        if g.kind is GateKind.CNOT and g.target != (g.slot + 1) % qubits:
            raise EncodingError(f"CNOT at slot {g.slot} has a non round-robin target")
        try:
            prop = _PROP_BITS[g.proportionality]
        except KeyError:
            raise EncodingError(f"proportionality {g.proportionality} is not encodable") from None
        genes[g.slot] = _KIND_BITS[g.kind] + prop
    return Chromosome("".join(genes), qubits, layers)


def size_metric(fm: FeatureMapCircuit, accuracy: Optional[float] = None) -> SizeMetrics:
    n_cnot = sum(g.kind is GateKind.CNOT for g in fm.gates)
    n_local = len(fm.gates) - n_cnot
    sm = (n_local + 2 * n_cnot) / fm.qubits
    ws = None if accuracy is None else weighted_size(sm, accuracy)
    return SizeMetrics(n_local, n_cnot, sm, ws)


def weighted_size(sm: float, accuracy: float) -> float:
    return sm + sm * accuracy ** 2


def random_chromosome(rng: np.random.Generator, qubits: int, layers: int) -> Chromosome:
    bits = rng.integers(0, 2, size=GENE_BITS * qubits * layers)
    return Chromosome("".join("1" if b else "0" for b in bits), qubits, layers)


def _prop_label(p: float) -> str:
    for bits, value in PROPORTIONALITY_TABLE.items():
        if p == value:
            return {"00": "π", "01": "π/2", "10": "π/4", "11": "π/8"}[bits]
    return f"{p:.4g}"


def _rotation_values(fm: FeatureMapCircuit) -> dict[int, float]:
    rots = fm.rotation_gates
    values = fm.overrides if fm.overrides is not None else [g.proportionality for g in rots]
    return {g.slot: float(v) for g, v in zip(rots, values)}


def render_text(fm: FeatureMapCircuit) -> str:
    """Fixed-width diagram: one row per qubit, one column per layer."""
    n_layers = max(fm.layers, 1 + max((g.slot // fm.qubits for g in fm.gates), default=0))
    cells = [["-"] * n_layers for _ in range(fm.qubits)]
    values = _rotation_values(fm)
    for g in fm.gates:
        layer = g.slot // fm.qubits
        if g.kind is GateKind.CNOT:
            label = f"C>q{g.target}"
        elif g.kind.is_rotation:
            label = f"{g.kind.value}({_prop_label(values[g.slot])}*x{g.feature})"
        else:
            label = g.kind.value
        cells[g.qubit][layer] = label
    width = max(len(c) for row in cells for c in row)
    lines = []
    for q, row in enumerate(cells):
        lines.append(f"q{q}: " + " ".join(c.center(width, "-") for c in row))
    return "\n".join(lines) + "\n"


def render_gate_list(fm: FeatureMapCircuit) -> str:
    """Line-oriented ``slot,kind,qubit,feature,proportionality`` listing."""
    values = _rotation_values(fm)
    lines = ["slot,kind,qubit,feature,proportionality"]
    for g in fm.gates:
        qubit = f"{g.qubit}>{g.target}" if g.kind is GateKind.CNOT else str(g.qubit)
        feature = "" if g.feature is None else str(g.feature)
        prop = repr(values[g.slot]) if g.slot in values else ""
        lines.append(f"{g.slot},{g.kind.value},{qubit},{feature},{prop}")
    return "\n".join(lines) + "\n"
