"""Independent reference implementations used only by the tests."""

import numpy as np


def _project(v, y, C):
    """Euclidean projection onto {0 <= a <= C, y.a = 0} by bisection on the multiplier."""
    def g(lam):
        return float(np.dot(y, np.clip(v - lam * y, 0.0, C)))

    hi = float(np.abs(v).max()) + C + 1.0
    lo = -hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return np.clip(v - 0.5 * (lo + hi) * y, 0.0, C)


def projected_gradient_dual(K, y, C, iters=800):
    """Accelerated projected gradient on the SVM dual; returns (alpha, objective)."""
    y = np.asarray(y, dtype=float)
    Q = np.outer(y, y) * np.asarray(K, dtype=float)
    L = max(np.linalg.eigvalsh(Q).max(), 1e-12)
    a = np.zeros(y.size)
    z, t = a.copy(), 1.0
    for _ in range(iters):
        a_next = _project(z - (Q @ z - 1.0) / L, y, C)
        t_next = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        z = a_next + (t - 1) / t_next * (a_next - a)
        a, t = a_next, t_next
    return a, float(0.5 * a @ Q @ a - a.sum())


def brute_force_fronts(F):
    """Peel non-dominated fronts with explicit pairwise loops."""
    F = [tuple(float(v) for v in f) for f in F]
    n = len(F)

    def dom(p, q):
        return all(a <= b for a, b in zip(p, q)) and any(a < b for a, b in zip(p, q))

    beaten_by = [[j for j in range(n) if j != i and dom(F[j], F[i])] for i in range(n)]
    remaining = set(range(n))
    fronts = []
    while remaining:
        front = sorted(i for i in remaining if not any(j in remaining for j in beaten_by[i]))
        fronts.append(front)
        remaining -= set(front)
    return fronts


_PAULI = {
    "RX": np.array([[0, 1], [1, 0]], dtype=complex),
    "RY": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "RZ": np.array([[1, 0], [0, -1]], dtype=complex),
}


def explicit_state(fm, x):
    """State of ``fm`` on input ``x`` from full-register matrices built by Kronecker products.

    Rotations use cos(t/2) I - i sin(t/2) P; CNOT is assembled from basis projectors.
    Qubit 0 is the least significant bit of the basis index.
    """
    M = fm.qubits
    I2 = np.eye(2, dtype=complex)
    P0 = np.diag([1, 0]).astype(complex)
    P1 = np.diag([0, 1]).astype(complex)
    X = _PAULI["RX"]
    H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

    def full(ops):
        out = np.eye(1, dtype=complex)
        for q in reversed(range(M)):
            out = np.kron(out, ops.get(q, I2))
        return out

    psi = np.zeros(2 ** M, dtype=complex)
    psi[0] = 1
    values = iter(fm.overrides) if fm.overrides is not None else None
    for g in fm.gates:
        kind = g.kind.value
        if kind == "H":
            U = full({g.qubit: H})
        elif kind == "CNOT":
            U = full({g.qubit: P0}) + full({g.qubit: P1, g.target: X})
        else:
            p = next(values) if values is not None else g.proportionality
            t = p * x[g.feature]
            U = full({g.qubit: np.cos(t / 2) * I2 - 1j * np.sin(t / 2) * _PAULI[kind]})
        psi = U @ psi
    return psi
