import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weylsim.pathsampler import dense_evolve, plan, prune_circuit
from weylsim.reps import Circuit, circuit_norm_bound, embed_superop, exact_circuit_norm, pauli_observable
from weylsim.vqe import (AnsatzParams, MaxCutProblem, _cnot, _merge, _noisy_rotation, ansatz_norm_product,
                         build_ansatz_circuit, dense_energy, entangler_pairs, estimate_energy, initial_state,
                         layer_norm, sample_complexity)
from weylsim.noise import depolarizing


def test_entangler_pairs():
    assert entangler_pairs(6) == [(1, 2), (3, 4)]
    assert entangler_pairs(2) == []
    assert entangler_pairs(6, brick_wall=True) == [(0, 1), (2, 3), (4, 5), (1, 2), (3, 4)]


def test_problem_validation():
    with pytest.raises(ValueError):
        MaxCutProblem(3)
    with pytest.raises(ValueError):
        MaxCutProblem(4, {(0, 0): 1.0})
    prob = MaxCutProblem(4, {(1, 0): 1.0, (0, 1): 0.5})
    assert prob.terms() == [(0, 1, 1.5)]
    assert prob.pauli_label(0, 3) == "ZIIZ"
    with pytest.raises(ValueError):
        AnsatzParams(np.zeros((2, 1)), p_C=1.5)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(0.5, 1.0), st.floats(0.5, 1.0))
def test_layer_norm_matches_dense_sandwich(t1, t2, pc, py):
    dep_y = depolarizing(py, 1)
    ops = _noisy_rotation(t1, 0, dep_y) + _noisy_rotation(t2, 1, dep_y)
    ops += [_cnot().to_superop((0, 1)), depolarizing(pc, 2).to_superop((0, 1))]
    circ = Circuit(2, 2, ops)
    assert abs(exact_circuit_norm(circ) - layer_norm(t1, t2, pc, py)) < 1e-10
    assert abs(_merge(ops, "s").l1_to_l1_norm() - layer_norm(t1, t2, pc, py)) < 1e-10


def test_layer_norm_exceeds_one_near_unit_rates():
    assert layer_norm(np.pi / 4, np.pi / 4, 1.0, 1.0) == pytest.approx(2.0)
    assert layer_norm(np.pi / 4, 0.0, 0.9, 0.9) == pytest.approx(max(1, 0.81 * math.sqrt(2)))
    assert layer_norm(np.pi / 4, np.pi / 4, 0.2, 0.5) == 1.0


@pytest.mark.parametrize("brick_wall", [False, True])
def test_grouped_circuit_is_same_channel(brick_wall, rng):
    prob = MaxCutProblem.ring(4)
    params = AnsatzParams(rng.uniform(0, 2 * np.pi, (4, 2)), 0.95, 0.97)
    rho = np.zeros((16, 16), complex)
    rho[0, 0] = 1
    a = dense_evolve(build_ansatz_circuit(prob, params, brick_wall), rho)
    b = dense_evolve(build_ansatz_circuit(prob, params, brick_wall, grouped=True), rho)
    assert np.abs(a - b).max() < 1e-12


def test_grouped_norm_bound_within_closed_form_product(rng):
    prob = MaxCutProblem.ring(6)
    for _ in range(5):
        params = AnsatzParams(rng.uniform(0, 2 * np.pi, (6, 2)), rng.uniform(0.8, 1), rng.uniform(0.8, 1))
        grouped = build_ansatz_circuit(prob, params, grouped=True)
        plain = build_ansatz_circuit(prob, params)
        closed = ansatz_norm_product(prob, params)
        assert circuit_norm_bound(grouped) <= closed * (1 + 1e-12)
        assert closed <= circuit_norm_bound(plain) * (1 + 1e-12)


def test_ungrouped_bound_is_two_to_nd():
    prob = MaxCutProblem.ring(4)
    params = AnsatzParams(np.full((4, 1), np.pi / 4), 1.0, 1.0)
    circ = build_ansatz_circuit(prob, params)
    p = plan(circ, initial_state(4), pauli_observable("ZZII"), 0.1, 0.05, picture="heisenberg")
    assert p.M_B == pytest.approx(2.0 ** (4 * 1))


def test_zero_angles_give_unit_bound_and_exact_energy():
    prob = MaxCutProblem.ring(4)
    params = AnsatzParams(np.zeros((4, 2)), 0.9, 0.95)
    E, rows = estimate_energy(prob, params, 0.1, 0.05, seed=3)
    assert all(r["M_B"] == 1.0 for r in rows)
    assert E == pytest.approx(dense_energy(prob, params), abs=1e-12)
    assert 0 < E < 4.0
    ideal, _ = estimate_energy(prob, AnsatzParams(np.zeros((4, 2))), 0.1, 0.05)
    assert ideal == pytest.approx(4.0)


def test_zero_depth_energy_is_weight_sum():
    prob = MaxCutProblem(4, {(0, 1): 1.0, (1, 2): -0.5, (0, 3): 2.0})
    params = AnsatzParams(np.zeros((4, 0)))
    assert params.depth == 0
    E, _ = estimate_energy(prob, params, 0.1, 0.05)
    assert E == pytest.approx(2.5)
    assert dense_energy(prob, params) == pytest.approx(2.5)


def test_bound_monotone_in_noise(rng):
    prob = MaxCutProblem.ring(4)
    theta = rng.uniform(0, 2 * np.pi, (4, 2))
    vals = [circuit_norm_bound(build_ansatz_circuit(prob, AnsatzParams(theta, p, p), grouped=True))
            for p in (0.6, 0.8, 0.9, 1.0)]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_pruning_keeps_light_cone_only():
    prob = MaxCutProblem.ring(6)
    params = AnsatzParams(np.full((6, 1), 0.3), 0.99, 0.99)
    circ = build_ansatz_circuit(prob, params, grouped=True)
    pruned = prune_circuit(circ, pauli_observable("ZZIIII"))
    assert len(pruned.layers) < len(circ.layers)
    touched = {q for op in pruned.layers for q in op.support}
    assert touched <= {0, 1, 2}


def test_small_ring_estimate_matches_dense(rng):
    prob = MaxCutProblem.ring(4)
    params = AnsatzParams(rng.uniform(0, 2 * np.pi, (4, 1)), 0.98, 0.98)
    E, rows = estimate_energy(prob, params, 0.05, 0.05, seed=7)
    assert abs(E - dense_energy(prob, params)) < 0.05
    assert len(rows) == 4 and all(r["epsilon"] == pytest.approx(0.05 / 4) for r in rows)


def test_sample_complexity_flags():
    r = sample_complexity(4, 1, 0.1, 0.4, 1.0)
    assert r.efficient and r.polynomial_regime
    assert r.growth == pytest.approx(0.8 ** 8)
    assert r.samples == math.ceil(2 * 16 * 0.8 ** 8 * math.log(20) / 0.01)
    r = sample_complexity(4, 2, 0.1, 1.0, 1.0)
    assert not r.efficient and not r.polynomial_regime and r.printed_condition
    assert set(r.to_dict()) == {"samples", "growth", "efficient", "polynomial_regime", "printed_condition"}
