"""Dense statevector simulation of feature-map circuits.

Qubit 0 is the least significant bit of the basis-state index. States are
plain complex numpy arrays; the batched routines carry a leading sample axis
so a whole dataset is encoded with one pass over the gate list.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .encoding import FeatureMapCircuit, GateKind, PlacedGate

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


class SimulationError(ValueError):
    pass


class DimensionError(ValueError):
    pass


def zero_state(qubits: int, batch: Optional[int] = None) -> np.ndarray:
    shape = (2 ** qubits,) if batch is None else (batch, 2 ** qubits)
    psi = np.zeros(shape, dtype=complex)
    psi[..., 0] = 1.0
    return psi


def rotation_matrices(kind: GateKind, theta: np.ndarray) -> np.ndarray:
    """Stack of 2x2 rotation unitaries, shape ``theta.shape + (2, 2)``."""
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    U = np.zeros(theta.shape + (2, 2), dtype=complex)
    if kind is GateKind.RX:
        U[..., 0, 0] = c
        U[..., 1, 1] = c
        U[..., 0, 1] = -1j * s
        U[..., 1, 0] = -1j * s
    elif kind is GateKind.RY:
        U[..., 0, 0] = c
        U[..., 1, 1] = c
        U[..., 0, 1] = -s
        U[..., 1, 0] = s
    elif kind is GateKind.RZ:
        U[..., 0, 0] = c - 1j * s
        U[..., 1, 1] = c + 1j * s
    else:
        raise SimulationError(f"{kind} is not a rotation")
    return U


def _cnot_permutation(qubits: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(2 ** qubits)
    flip = (idx >> control) & 1
    return idx ^ (flip << target)


def _apply_1q(psi: np.ndarray, U: np.ndarray, qubit: int, qubits: int) -> np.ndarray:
    # psi: (B, 2**M); U: (2, 2) or (B, 2, 2)
    B = psi.shape[0]
    view = psi.reshape(B, 2 ** (qubits - qubit - 1), 2, 2 ** qubit)
    if U.ndim == 2:
        out = np.einsum("ab,nibj->niaj", U, view)
    else:
        out = np.einsum("nab,nibj->niaj", U, view)
    return out.reshape(B, -1)


def _check_indices(g: PlacedGate, qubits: int) -> None:
    touched = [g.qubit] if g.target is None else [g.qubit, g.target]
    if any(not 0 <= q < qubits for q in touched):
        raise SimulationError(f"gate at slot {g.slot} touches qubit outside 0..{qubits - 1}")


def apply_gate_batch(psi: np.ndarray, g: PlacedGate, X: np.ndarray, qubits: int,
                     override: Optional[float] = None) -> np.ndarray:
    """Apply one placed gate to a batch of states ``psi`` (B, 2**M)."""
    _check_indices(g, qubits)
    if g.kind is GateKind.H:
        return _apply_1q(psi, _H, g.qubit, qubits)
    if g.kind is GateKind.CNOT:
        if g.target == g.qubit:
            raise SimulationError(f"CNOT at slot {g.slot} has control == target")
        return psi[:, _cnot_permutation(qubits, g.qubit, g.target)]
    if g.kind.is_rotation:
        p = g.proportionality if override is None else override
        theta = p * X[:, g.feature]
        return _apply_1q(psi, rotation_matrices(g.kind, theta), g.qubit, qubits)
    return psi


def apply_gate(state: np.ndarray, g: PlacedGate, x, override: Optional[float] = None) -> np.ndarray:
    """Apply one placed gate to a single state vector."""
    qubits = int(np.log2(state.shape[0]))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if g.kind.is_rotation and g.feature >= x.shape[0]:
        raise DimensionError(f"gate at slot {g.slot} needs feature {g.feature}, got {x.shape[0]}")
    return apply_gate_batch(state[None, :], g, x[None, :], qubits, override)[0]


def prepare_states(fm: FeatureMapCircuit, X) -> np.ndarray:
    """Encode every row of ``X``; returns an array of shape (n, 2**M)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionError("X must be a 2-D array of samples")
    if X.shape[1] < fm.feature_count:
        raise DimensionError(
            f"circuit consumes {fm.feature_count} features, samples have {X.shape[1]}"
        )
    psi = zero_state(fm.qubits, X.shape[0])
    rot = iter(fm.overrides) if fm.overrides is not None else None
    for g in fm.gates:
        override = next(rot) if (rot is not None and g.kind.is_rotation) else None
        psi = apply_gate_batch(psi, g, X, fm.qubits, override)
    return psi


def prepare_feature_state(fm: FeatureMapCircuit, x) -> np.ndarray:
    return prepare_states(fm, np.atleast_1d(np.asarray(x, dtype=float))[None, :])[0]


def circuit_unitary(fm: FeatureMapCircuit, x) -> np.ndarray:
    """Full 2**M x 2**M unitary built from explicit Kronecker products."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    M = fm.qubits
    U = np.eye(2 ** M, dtype=complex)
    rot = iter(fm.overrides) if fm.overrides is not None else None
    for g in fm.gates:
        override = next(rot) if (rot is not None and g.kind.is_rotation) else None
        U = gate_matrix(g, x, M, override) @ U
    return U


def gate_matrix(g: PlacedGate, x, qubits: int, override: Optional[float] = None) -> np.ndarray:
    """Explicit matrix of a placed gate on the full register."""
    dim = 2 ** qubits
    if g.kind is GateKind.CNOT:
        P = np.zeros((dim, dim), dtype=complex)
        perm = _cnot_permutation(qubits, g.qubit, g.target)
        P[np.arange(dim), perm] = 1.0
        return P
    if g.kind is GateKind.H:
        local = _H
    elif g.kind.is_rotation:
        p = g.proportionality if override is None else override
        local = rotation_matrices(g.kind, np.float64(p * x[g.feature]))
    else:
        return np.eye(dim, dtype=complex)
    # kron ordering puts qubit M-1 leftmost (most significant)
    out = np.eye(1, dtype=complex)
    for q in reversed(range(qubits)):
        out = np.kron(out, local if q == g.qubit else np.eye(2))
    return out
