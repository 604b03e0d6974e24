"""Reference computations that share no code with the package's kernels.

Everything here works index by index on plain Python numbers or builds full
2^n x 2^n matrices, which is slow but easy to check by eye.
"""

import cmath
import itertools
import math

import numpy as np


def bit(index, qubit, n):
    """Value of ``qubit`` in basis ``index`` (qubit 0 is the leftmost ket label)."""
    return (index >> (n - 1 - qubit)) & 1


def local_matrix(kind, angle=None):
    if kind in ("X", "CNOT", "CCNOT"):
        return [[0, 1], [1, 0]]
    if kind == "H":
        s = 1 / math.sqrt(2)
        return [[s, s], [s, -s]]
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if kind in ("RY", "CRY"):
        return [[c, -s], [s, c]]
    if kind == "RX":
        return [[c, -1j * s], [-1j * s, c]]
    if kind == "RZ":
        return [[cmath.exp(-1j * angle / 2), 0], [0, cmath.exp(1j * angle / 2)]]
    raise ValueError(kind)


def dense_unitary(kind, targets, n, angle=None):
    dim = 1 << n
    u = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [bit(col, q, n) for q in range(n)]
        if kind == "SWAP":
            a, b = targets
            bits[a], bits[b] = bits[b], bits[a]
            row = sum(v << (n - 1 - q) for q, v in enumerate(bits))
            u[row, col] = 1
            continue
        *controls, t = targets
        if not all(bits[c] for c in controls):
            u[col, col] = 1
            continue
        m = local_matrix(kind, angle)
        for out in (0, 1):
            new = list(bits)
            new[t] = out
            row = sum(v << (n - 1 - q) for q, v in enumerate(new))
            u[row, col] += m[out][bits[t]]
    return u


def dense_circuit(circuit):
    u = np.eye(1 << circuit.n_qubits, dtype=complex)
    for g in circuit.gates:
        u = dense_unitary(g.kind, g.targets, circuit.n_qubits, g.angle) @ u
    return u


def brute_marginal0(probs, qubit, n):
    total = 0.0
    for k in range(1 << n):
        if bit(k, qubit, n) == 0:
            total += probs[k]
    return total


def product_state_probs(fractions):
    """Basis probabilities of independent qubits with P(|0>) = fractions[q]."""
    n = len(fractions)
    out = []
    for bits in itertools.product((0, 1), repeat=n):
        p = 1.0
        for f, b in zip(fractions, bits):
            p *= f if b == 0 else 1 - f
        out.append(p)
    return out


def simulate_dense(circuit):
    """|0...0> pushed through the dense circuit matrix."""
    psi = np.zeros(1 << circuit.n_qubits, dtype=complex)
    psi[0] = 1
    return dense_circuit(circuit) @ psi


def decode_rgb_oracle(probs_8):
    """Channel values from an 8-state distribution using the three explicit sums."""
    p = dict(enumerate(probs_8))
    r = p[0b000] + p[0b001] + p[0b010] + p[0b011]
    g = p[0b000] + p[0b100] + p[0b001] + p[0b101]
    b = p[0b000] + p[0b110] + p[0b100] + p[0b010]
    return tuple(min(255, max(0, math.floor(v * 255 + 0.5 + 1e-9))) for v in (r, g, b))
