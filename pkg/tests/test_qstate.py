import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_marginal0, dense_circuit, dense_unitary
from qcolor.errors import CapacityError, QubitIndexError, ShapeError
from qcolor.qstate import (
    GATE_ARITY,
    ROTATIONS,
    Circuit,
    Gate,
    ProbEstimate,
    Statevector,
    apply_circuit,
    apply_gate,
    bloch_vector,
    cnot,
    exact_probabilities,
    inverse_circuit,
    marginal_prob0,
    ry,
    sample_shots,
    swap,
    x,
    zero_state,
)


def random_gate(rng, n):
    kinds = [k for k in sorted(GATE_ARITY) if GATE_ARITY[k] <= n]
    kind = kinds[rng.integers(len(kinds))]
    targets = tuple(int(t) for t in rng.choice(n, size=GATE_ARITY[kind], replace=False))
    angle = float(rng.uniform(-2 * math.pi, 2 * math.pi)) if kind in ROTATIONS else None
    return Gate(kind, targets, angle)


def random_state(rng, n):
    return Statevector.from_amplitudes(rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n))


def test_zero_state():
    assert np.array_equal(zero_state(1).amplitudes, [1, 0])
    assert np.array_equal(zero_state(2).amplitudes, [1, 0, 0, 0])
    with pytest.raises(CapacityError):
        zero_state(25)
    with pytest.raises(CapacityError):
        zero_state(0)


def test_ry_half_turn_and_quarter_turn():
    assert np.allclose(apply_gate(zero_state(1), ry(math.pi, 0)).amplitudes, [0, 1], atol=1e-15)
    half = math.sqrt(2) / 2
    assert np.allclose(apply_gate(zero_state(1), ry(math.pi / 2, 0)).amplitudes, [half, half], atol=1e-15)


def test_cnot_truth_table():
    s10 = apply_gate(zero_state(2), x(0))
    assert np.array_equal(s10.amplitudes, [0, 0, 1, 0])  # |10>
    s11 = apply_gate(s10, cnot(0, 1))
    assert np.array_equal(s11.amplitudes, [0, 0, 0, 1])  # |11>
    assert np.array_equal(apply_gate(zero_state(2), cnot(0, 1)).amplitudes, [1, 0, 0, 0])


def test_bit_convention_qubit0_is_leftmost():
    s = apply_gate(zero_state(3), x(0))
    assert np.flatnonzero(s.amplitudes).tolist() == [4]


def test_invalid_target_is_index_error():
    with pytest.raises(QubitIndexError):
        apply_gate(zero_state(2), ry(0.3, 2))
    with pytest.raises(QubitIndexError):
        Circuit(2, (cnot(0, 5),))


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("RY", (0,))
    with pytest.raises(ValueError):
        Gate("X", (0,), 1.0)
    with pytest.raises(ValueError):
        Gate("CNOT", (1, 1))
    with pytest.raises(ValueError):
        Gate("TOFFOLI", (0, 1, 2))


@pytest.mark.parametrize("kind", sorted(GATE_ARITY))
def test_kernel_matches_dense_matrix(kind, rng):
    n = 4
    for _ in range(10):
        targets = tuple(int(t) for t in rng.choice(n, size=GATE_ARITY[kind], replace=False))
        angle = float(rng.uniform(-4, 4)) if kind in ROTATIONS else None
        state = random_state(rng, n)
        got = apply_gate(state, Gate(kind, targets, angle)).amplitudes
        want = dense_unitary(kind, targets, n, angle) @ state.amplitudes
        assert np.max(np.abs(got - want)) < 1e-13


def test_apply_circuit_fold():
    s = zero_state(2)
    assert apply_circuit(s, Circuit(2)) == s
    one = apply_circuit(zero_state(1), Circuit(1, (ry(0.4, 0),)))
    assert one == apply_gate(zero_state(1), ry(0.4, 0))
    with pytest.raises(ShapeError):
        apply_circuit(zero_state(2), Circuit(3))


def test_double_x_is_identity(rng):
    s = random_state(rng, 3)
    out = apply_circuit(s, Circuit(3, (x(0), x(0))))
    assert np.max(np.abs(out.amplitudes - s.amplitudes)) <= 1e-12


def test_apply_circuit_matches_dense(rng):
    c = Circuit(3, tuple(random_gate(rng, 3) for _ in range(20)))
    s = random_state(rng, 3)
    assert np.allclose(apply_circuit(s, c).amplitudes, dense_circuit(c) @ s.amplitudes, atol=1e-12)


def test_inverse_circuit_examples():
    assert inverse_circuit(Circuit(1, (ry(0.7, 0),))).gates == (ry(-0.7, 0),)
    c = Circuit(3, (cnot(0, 1), swap(1, 2)))
    assert inverse_circuit(c).gates == (swap(1, 2), cnot(0, 1))


def test_inverse_round_trip_50_gates(rng):
    c = Circuit(5, tuple(random_gate(rng, 5) for _ in range(50)))
    s = random_state(rng, 5)
    back = apply_circuit(apply_circuit(s, c), inverse_circuit(c))
    assert np.max(np.abs(back.amplitudes - s.amplitudes)) <= 1e-10


def test_exact_probabilities():
    assert exact_probabilities(zero_state(1)).as_dict() == {0: 1.0}
    est = exact_probabilities(apply_gate(zero_state(1), ry(math.pi / 2, 0)))
    assert est.probs == pytest.approx([0.5, 0.5], abs=1e-15)
    assert est.source == "exact" and est.shots == 0 and est.seed is None
    theta = math.acos(2 * 64 / 255 - 1)
    est = exact_probabilities(apply_gate(zero_state(1), ry(theta, 0)))
    # cos^2(theta/2) = (1 + cos theta) / 2 = 64/255.
    assert est.probs[0] == pytest.approx((1 + math.cos(theta)) / 2, abs=1e-15)
    assert est.probs[0] == pytest.approx(0.25098, abs=1e-5)
    assert est.probs[1] == pytest.approx(0.74902, abs=1e-5)


def test_sample_shots_degenerate_and_deterministic():
    assert sample_shots(zero_state(1), 17, 3).as_dict() == {0: 1.0}
    s = apply_gate(zero_state(1), ry(math.pi / 2, 0))
    a = sample_shots(s, 12000, 42)
    b = sample_shots(s, 12000, 42)
    assert a == b
    assert np.array_equal(a.counts, b.counts)
    assert a.source == "sampled" and a.shots == 12000 and a.seed == 42
    assert abs(a.probs[0] - 0.5) <= 0.02
    assert a.counts.sum() == 12000


def test_sample_shots_rejects_zero():
    with pytest.raises(ValueError):
        sample_shots(zero_state(1), 0, 1)


def test_sample_shots_accepts_any_64_bit_seed():
    s = apply_gate(zero_state(1), ry(1.0, 0))
    assert sample_shots(s, 10, -1) == sample_shots(s, 10, -1)
    sample_shots(s, 10, 2**64 - 1)


def test_marginal_examples():
    assert marginal_prob0(ProbEstimate.from_dict({0: 1.0}, 3), 0, 3) == 1.0
    uniform = ProbEstimate(3, np.full(8, 1 / 8))
    for q in range(3):
        assert marginal_prob0(uniform, q, 3) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(QubitIndexError):
        marginal_prob0(uniform, 3, 3)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6), st.data())
def test_marginal_matches_brute_force(n, data):
    # Dyadic weights keep every partial sum exact, so summation order cannot matter.
    counts = data.draw(st.lists(st.integers(0, 1024), min_size=1 << n, max_size=1 << n).filter(any))
    total = 1 << (sum(counts).bit_length())
    probs = [c / total for c in counts]
    est = ProbEstimate(n, np.array(probs))
    q = data.draw(st.integers(0, n - 1))
    assert marginal_prob0(est, q, n) == brute_marginal0(probs, q, n)


def test_bloch_examples():
    assert tuple(bloch_vector(zero_state(1))) == (0.0, 0.0, 1.0)
    v = bloch_vector(apply_gate(zero_state(1), ry(math.pi / 2, 0)))
    assert (v.x, v.y, v.z) == pytest.approx((1, 0, 0), abs=1e-15)
    v = bloch_vector(apply_gate(zero_state(1), ry(2.0944, 0)))
    assert (v.x, v.y, v.z) == pytest.approx((math.sin(2.0944), 0, math.cos(2.0944)), abs=1e-12)
    assert (v.x, v.z) == pytest.approx((0.866, -0.5), abs=1e-3)
    with pytest.raises(ShapeError):
        bloch_vector(zero_state(2))


@pytest.mark.parametrize("k", range(5))
def test_bloch_consistency_grid(k):
    theta = k * math.pi / 4
    v = bloch_vector(apply_gate(zero_state(1), ry(theta, 0)))
    assert abs(v.z - math.cos(theta)) <= 1e-12
    assert abs(v.x - math.sin(theta)) <= 1e-12


def test_bloch_norm_bound(rng):
    for _ in range(100):
        v = bloch_vector(random_state(rng, 1))
        assert v.x**2 + v.y**2 + v.z**2 <= 1 + 1e-9


def test_unitarity_random(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        s = random_state(rng, n)
        out = apply_gate(s, random_gate(rng, n))
        assert abs(np.sum(np.abs(out.amplitudes) ** 2) - 1) <= 1e-12


def test_sampling_consistency(rng):
    for shots in (1200, 12000):
        for _ in range(10):
            s = random_state(rng, 3)
            exact = exact_probabilities(s).probs
            bound = 5 * math.sqrt(0.25 / shots)
            ok = sum(np.max(np.abs(sample_shots(s, shots, seed).probs - exact)) <= bound for seed in range(100))
            assert ok >= 99


def test_statevector_rejects_unnormalized():
    with pytest.raises(ValueError):
        Statevector(1, np.array([1.0, 1.0]))
    with pytest.raises(ShapeError):
        Statevector(2, np.array([1.0, 0.0]))
