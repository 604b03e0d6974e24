"""Dense statevector simulator.

Bit convention: for an n-qubit register, qubit ``q`` lives at bit
``n - 1 - q`` of the basis index, so qubit 0 is the leftmost label of a ket.
``|RGB>`` therefore reads (R, G, B) left to right and ``|100>`` is index 4.

All gate kernels work on a batch of states with shape ``(batch, 2**n)`` and
use only elementwise arithmetic, so a state's result never depends on what
else shares its batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, QubitIndexError, ShapeError

MAX_QUBITS = 24
NORM_TOL = 1e-12

ROTATIONS = frozenset({"RY", "RX", "RZ", "CRY"})
SELF_INVERSE = frozenset({"X", "H", "CNOT", "CCNOT", "SWAP"})
GATE_ARITY = {
    "RY": 1,
    "RX": 1,
    "RZ": 1,
    "X": 1,
    "H": 1,
    "CNOT": 2,
    "CCNOT": 3,
    "SWAP": 2,
    "CRY": 2,
}

PRNG_NAME = "PCG64"

_SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class Gate:
    """One gate application.

    For controlled kinds the controls come first and the target last:
    ``CNOT(c, t)``, ``CCNOT(c1, c2, t)``, ``CRY(c, t)``.
    """

    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if kind not in GATE_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.targets) != GATE_ARITY[kind]:
            raise ValueError(f"{kind} takes {GATE_ARITY[kind]} qubit(s), got {len(self.targets)}")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"{kind} qubits must be distinct, got {self.targets}")
        if any(t < 0 for t in self.targets):
            raise QubitIndexError(f"negative qubit index in {self.targets}")
        if kind in ROTATIONS:
            if self.angle is None:
                raise ValueError(f"{kind} requires an angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{kind} takes no angle")

    def inverse(self) -> Gate:
        if self.kind in SELF_INVERSE:
            return self
        return Gate(self.kind, self.targets, -self.angle)

    def __repr__(self):
        args = ", ".join(map(str, self.targets))
        if self.angle is not None:
            return f"{self.kind}({self.angle:.6g}; {args})"
        return f"{self.kind}({args})"


def ry(theta: float, q: int) -> Gate:
    return Gate("RY", (q,), theta)


def rx(theta: float, q: int) -> Gate:
    return Gate("RX", (q,), theta)


def rz(theta: float, q: int) -> Gate:
    return Gate("RZ", (q,), theta)


def x(q: int) -> Gate:
    return Gate("X", (q,))


def h(q: int) -> Gate:
    return Gate("H", (q,))


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def ccnot(c1: int, c2: int, target: int) -> Gate:
    return Gate("CCNOT", (c1, c2, target))


def swap(a: int, b: int) -> Gate:
    return Gate("SWAP", (a, b))


def cry(theta: float, control: int, target: int) -> Gate:
    return Gate("CRY", (control, target), theta)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        _check_qubit_count(self.n_qubits)
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        for g in gates:
            _check_targets(g, self.n_qubits)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def then(self, other: Circuit | Iterable[Gate]) -> Circuit:
        """Concatenate; ``other`` runs after ``self``."""
        more = other.gates if isinstance(other, Circuit) else tuple(other)
        return Circuit(self.n_qubits, self.gates + more)

    def widen(self, n_qubits: int, offset: int = 0) -> Circuit:
        """Re-home this circuit onto a larger register, shifting qubits by ``offset``."""
        return Circuit(n_qubits, tuple(Gate(g.kind, tuple(t + offset for t in g.targets), g.angle) for g in self.gates))

    def signature(self) -> tuple:
        """Gate structure with angles stripped; circuits sharing it can be batched."""
        return tuple((g.kind, g.targets) for g in self.gates)


@dataclass(frozen=True, eq=False)
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_qubit_count(self.n_qubits)
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != 1 << self.n_qubits:
            raise ShapeError(f"{self.n_qubits} qubits need {1 << self.n_qubits} amplitudes, got {amps.shape[0]}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"amplitudes are not normalized (sum |a|^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes) -> Statevector:
        """Build from any amplitude sequence, normalizing it."""
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        n = int(amps.shape[0]).bit_length() - 1
        if n < 1 or amps.shape[0] != 1 << n:
            raise ShapeError(f"amplitude count must be a power of two >= 2, got {amps.shape[0]}")
        return cls(n, amps / np.linalg.norm(amps))

    def __eq__(self, other):
        if not isinstance(other, Statevector):
            return NotImplemented
        return self.n_qubits == other.n_qubits and np.array_equal(self.amplitudes, other.amplitudes)

    def allclose(self, other: Statevector, atol: float = 1e-10) -> bool:
        return self.n_qubits == other.n_qubits and max_deviation(self, other) <= atol


@dataclass(frozen=True, eq=False)
class ProbEstimate:
    """Basis-state probabilities, dense over ``2**n_qubits`` entries.

    ``source`` is ``"exact"`` or ``"sampled"``. Sampled estimates carry the raw
    ``counts`` so that ``probs == counts / shots`` exactly.
    """

    n_qubits: int
    probs: np.ndarray
    source: str = "exact"
    shots: int = 0
    seed: int | None = None
    counts: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64).reshape(-1)
        if probs.shape[0] != 1 << self.n_qubits:
            raise ShapeError(f"{self.n_qubits} qubits need {1 << self.n_qubits} probabilities, got {probs.shape[0]}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_dict(cls, probs: dict[int, float], n_qubits: int) -> ProbEstimate:
        dense = np.zeros(1 << n_qubits)
        for k, p in probs.items():
            if not 0 <= k < dense.shape[0]:
                raise QubitIndexError(f"basis index {k} outside {n_qubits}-qubit space")
            dense[k] = p
        return cls(n_qubits, dense)

    def as_dict(self) -> dict[int, float]:
        """Nonzero entries only."""
        return {int(k): float(self.probs[k]) for k in np.flatnonzero(self.probs)}

    def __eq__(self, other):
        if not isinstance(other, ProbEstimate):
            return NotImplemented
        return (
            self.n_qubits == other.n_qubits
            and self.source == other.source
            and self.shots == other.shots
            and self.seed == other.seed
            and np.array_equal(self.probs, other.probs)
        )


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __iter__(self):
        return iter((self.x, self.y, self.z))


def _check_qubit_count(n):
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_QUBITS:
        raise CapacityError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n!r}")


def _check_targets(gate: Gate, n_qubits: int):
    for t in gate.targets:
        if not 0 <= t < n_qubits:
            raise QubitIndexError(f"{gate!r} references qubit {t} of a {n_qubits}-qubit register")


def zero_state(n_qubits: int) -> Statevector:
    _check_qubit_count(n_qubits)
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(n_qubits, amps)


# -- batched kernels ---------------------------------------------------------


def _index(n: int, fixed: dict[int, int]) -> tuple:
    return (slice(None),) + tuple(fixed.get(q, slice(None)) for q in range(n))


def _matrix(kind: str, angle):
    """Entries (u00, u01, u10, u11) of the single-qubit action of ``kind``."""
    if kind == "H":
        return _SQRT_HALF, _SQRT_HALF, _SQRT_HALF, -_SQRT_HALF
    half = np.asarray(angle, dtype=np.float64) / 2.0
    c, s = np.cos(half), np.sin(half)
    if kind in ("RY", "CRY"):
        return c, -s, s, c
    if kind == "RX":
        return c, -1j * s, -1j * s, c
    if kind == "RZ":
        return np.exp(-1j * half), 0.0, 0.0, np.exp(1j * half)
    raise ValueError(f"no matrix for {kind}")


def apply_gate_batch(amps: np.ndarray, n_qubits: int, kind: str, targets: Sequence[int], angles=None) -> None:
    """Apply one gate in place to a ``(batch, 2**n)`` C-contiguous array.

    ``angles`` is a scalar or a ``(batch,)`` array for rotation kinds.
    """
    batch = amps.shape[0]
    psi = amps.reshape((batch,) + (2,) * n_qubits)
    if kind == "SWAP":
        a, b = targets
        i01, i10 = _index(n_qubits, {a: 0, b: 1}), _index(n_qubits, {a: 1, b: 0})
        tmp = psi[i01].copy()
        psi[i01] = psi[i10]
        psi[i10] = tmp
        return
    *controls, target = targets
    fixed = dict.fromkeys(controls, 1)
    i0 = _index(n_qubits, {**fixed, target: 0})
    i1 = _index(n_qubits, {**fixed, target: 1})
    a0 = psi[i0].copy()
    a1 = psi[i1]
    if kind in ("X", "CNOT", "CCNOT"):
        psi[i0] = a1
        psi[i1] = a0
        return
    u00, u01, u10, u11 = _matrix(kind, angles)
    if np.ndim(u00):
        shape = (batch,) + (1,) * (a0.ndim - 1)
        u00, u01, u10, u11 = (np.reshape(u, shape) if np.ndim(u) else u for u in (u00, u01, u10, u11))
    new1 = u10 * a0 + u11 * a1
    psi[i0] = u00 * a0 + u01 * a1
    psi[i1] = new1


def run_batch(n_qubits: int, signature: tuple, angles: np.ndarray) -> np.ndarray:
    """Simulate many circuits that share one gate structure, starting from |0...0>.

    ``angles`` has shape ``(batch, len(signature))``; entries for
    non-rotation gates are ignored. Returns amplitudes ``(batch, 2**n)``.
    """
    batch = angles.shape[0]
    amps = np.zeros((batch, 1 << n_qubits), dtype=np.complex128)
    amps[:, 0] = 1.0
    for col, (kind, targets) in enumerate(signature):
        apply_gate_batch(amps, n_qubits, kind, targets, angles[:, col] if kind in ROTATIONS else None)
    return amps


# -- single-state operations -------------------------------------------------


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    _check_targets(gate, state.n_qubits)
    amps = state.amplitudes.copy().reshape(1, -1)
    apply_gate_batch(amps, state.n_qubits, gate.kind, gate.targets, gate.angle)
    return Statevector(state.n_qubits, amps[0])


def apply_circuit(state: Statevector, circuit: Circuit) -> Statevector:
    if circuit.n_qubits != state.n_qubits:
        raise ShapeError(f"circuit has {circuit.n_qubits} qubits, state has {state.n_qubits}")
    amps = state.amplitudes.copy().reshape(1, -1)
    for g in circuit.gates:
        apply_gate_batch(amps, state.n_qubits, g.kind, g.targets, g.angle)
    return Statevector(state.n_qubits, amps[0])


def inverse_circuit(circuit: Circuit) -> Circuit:
    return Circuit(circuit.n_qubits, tuple(g.inverse() for g in reversed(circuit.gates)))


def max_deviation(a: Statevector, b: Statevector) -> float:
    """Largest absolute amplitude difference."""
    if a.n_qubits != b.n_qubits:
        raise ShapeError(f"{a.n_qubits} vs {b.n_qubits} qubits")
    return float(np.max(np.abs(a.amplitudes - b.amplitudes)))


# -- measurement -------------------------------------------------------------


def probabilities_of(amps: np.ndarray) -> np.ndarray:
    return amps.real**2 + amps.imag**2


def exact_probabilities(state: Statevector) -> ProbEstimate:
    return ProbEstimate(state.n_qubits, probabilities_of(state.amplitudes))


def make_rng(seed: int, stream: int | None = None) -> np.random.Generator:
    """Seeded PCG64 generator; ``stream`` selects an independent per-item substream."""
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    key = () if stream is None else (int(stream),)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def sample_counts(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Counts of ``shots`` independent draws from ``probs``."""
    p = np.clip(probs, 0.0, None)
    return rng.multinomial(shots, p / p.sum())


def sample_shots(state: Statevector, shots: int, seed: int) -> ProbEstimate:
    shots = _check_shots(shots)
    counts = sample_counts(probabilities_of(state.amplitudes), shots, make_rng(seed))
    return ProbEstimate(state.n_qubits, counts / shots, "sampled", shots, int(seed), counts)


def _check_shots(shots) -> int:
    if isinstance(shots, bool) or not isinstance(shots, (int, np.integer)) or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots!r}")
    return int(shots)


def marginal_prob0_dense(probs: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """P(qubit reads 0) for a ``(..., 2**n)`` probability array."""
    if not 0 <= qubit < n_qubits:
        raise QubitIndexError(f"qubit {qubit} outside {n_qubits}-qubit register")
    lead = probs.shape[:-1]
    view = probs.reshape(lead + (1 << qubit, 2, 1 << (n_qubits - 1 - qubit)))
    return view[..., 0, :].sum(axis=(-2, -1))


def marginal_prob0(est: ProbEstimate, qubit: int, n_qubits: int | None = None) -> float:
    """Sum of probabilities over basis states with ``qubit`` in |0>."""
    n = est.n_qubits if n_qubits is None else n_qubits
    if n != est.n_qubits:
        raise ShapeError(f"estimate covers {est.n_qubits} qubits, asked about {n}")
    return float(marginal_prob0_dense(est.probs, qubit, n))


def bloch_vector(state: Statevector) -> BlochVector:
    if state.n_qubits != 1:
        raise ShapeError(f"Bloch vector needs a single qubit, got {state.n_qubits}")
    a, b = state.amplitudes
    cross = np.conj(a) * b
    return BlochVector(float(2 * cross.real), float(2 * cross.imag), float(abs(a) ** 2 - abs(b) ** 2))
