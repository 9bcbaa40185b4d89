import warnings

import numpy as np
import pytest
import scipy.linalg

from weylsim.kernels import available_backends, get_backend
from weylsim.noise import CliffordGate, depolarizing
from weylsim.pathsampler import (CHUNK_SIZE, LindbladLayer, apply_local_superop, dense_expectation, estimate,
                                 estimate_lindblad, exact_path_expectation, hoeffding_samples,
                                 light_cone_layers, lindblad_variance_bound, lindbladian_superop, plan,
                                 prune_circuit, sample_many, sample_path, sample_path_heisenberg)
from weylsim.reps import (Basis, Circuit, channel_to_superop, computational_state, embed_superop,
                          observable_to_weyl, pauli_matrix, pauli_observable, state_to_weyl)

from conftest import kron_all, random_circuit, random_product_state


def pauli_dense(label):
    return kron_all([pauli_matrix(c) for c in label])


@pytest.mark.parametrize("basis", ["weyl", "computational"])
@pytest.mark.parametrize("picture", ["schrodinger", "heisenberg"])
def test_exact_path_sum_equals_dense(basis, picture, rng):
    for _ in range(4):
        circ = random_circuit(rng, n=2, depth=5, basis=basis)
        fs = random_product_state(rng, 2)
        rho = state_to_weyl(fs, basis=basis)
        E = pauli_observable("ZX", basis=basis)
        truth = dense_expectation(circ, kron_all(fs), pauli_dense("ZX"))
        assert abs(exact_path_expectation(circ, rho, E, picture) - truth) < 1e-10


def test_qutrit_estimate_matches_dense(rng):
    circ = random_circuit(rng, n=2, depth=4, d=3)
    fs = random_product_state(rng, 2, d=3)
    rho = state_to_weyl(fs)
    O = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    O = O + O.conj().T
    E = observable_to_weyl([O, np.eye(3)])
    truth = dense_expectation(circ, kron_all(fs), np.kron(O, np.eye(3)))
    for picture in ("schrodinger", "heisenberg"):
        assert abs(exact_path_expectation(circ, rho, E, picture) - truth) < 1e-10
        est = estimate(circ, rho, E, 0.05, 0.05, seed=3, picture=picture, samples=200_000)
        assert abs(est.mean - truth) < 5 * est.stderr + 1e-12


def test_single_path_samples_are_bounded(rng):
    circ = random_circuit(rng, n=3, depth=6)
    rho = computational_state([0, 1, 0])
    E = pauli_observable("ZZX")
    pl = plan(circ, rho, E, 0.1, 0.1)
    for _ in range(50):
        s = sample_path(circ, rho, E, rng)
        h = sample_path_heisenberg(circ, rho, E, rng)
        assert abs(s.value) <= pl.per_sample_bound * (1 + 1e-9)
        assert abs(h.value) <= plan(circ, rho, E, 0.1, 0.1, "heisenberg").per_sample_bound * (1 + 1e-9)


def test_determinism_and_worker_independence(rng):
    circ = random_circuit(rng, n=3, depth=6)
    rho, E = state_to_weyl(random_product_state(rng, 3)), pauli_observable("ZXZ")
    N = 3 * CHUNK_SIZE + 17
    a = sample_many(circ, rho, E, N, seed=11, workers=1)
    b = sample_many(circ, rho, E, N, seed=11, workers=4)
    c = sample_many(circ, rho, E, N, seed=12, workers=1)
    assert np.array_equal(a, b)
    assert np.any(a != 0) and not np.array_equal(a, c)


@pytest.mark.skipif("cython" not in available_backends(), reason="compiled kernels not built")
def test_backends_bit_identical(rng):
    circ = random_circuit(rng, n=3, depth=8)
    rho, E = computational_state([1, 0, 0]), pauli_observable("XZZ")
    for picture in ("schrodinger", "heisenberg"):
        a = sample_many(circ, rho, E, 5000, seed=4, picture=picture, backend=get_backend("python"))
        b = sample_many(circ, rho, E, 5000, seed=4, picture=picture, backend=get_backend("cython"))
        assert np.array_equal(a, b)


def test_planner_clifford_fixture_is_exactly_one():
    circ = Circuit(2, 3)
    for w, q in [("H@0", (0,)), ("CNOT@0,1", (0, 1)), ("S@0", (2,)), ("CNOT@0,1", (1, 2))]:
        m = len(q)
        circ.append(CliffordGate.from_word(w, 2, m).to_superop(q))
    rho = computational_state([0, 0, 0])
    E = pauli_observable("ZZX")
    assert plan(circ, rho, E, 0.1, 0.05, "heisenberg").M_B == 1.0
    est = estimate(circ, rho, E, 0.1, 0.05, picture="heisenberg")
    assert est.stderr == 0.0
    assert abs(est.mean - dense_expectation(circ, kron_all([np.diag([1, 0])] * 3), pauli_dense("ZZX"))) < 1e-12


def test_hoeffding_count():
    assert hoeffding_samples(4.0, 0.1, 0.05) == int(np.ceil(2 * 4.0 * np.log(1 / 0.05) / 0.01))
    with pytest.raises(ValueError):
        plan(Circuit(2, 1, [depolarizing(0.9).to_superop((0,))]), computational_state([0]),
             pauli_observable("Z"), -1.0, 0.1)


def test_light_cone_pruning_is_exact(rng):
    circ = random_circuit(rng, n=4, depth=10)
    rho = computational_state([0, 0, 0, 0])
    E = pauli_observable("ZIII")
    keep = light_cone_layers(circ, E)
    pruned = prune_circuit(circ, E)
    assert len(pruned.layers) == len(keep) <= len(circ.layers)
    truth = dense_expectation(circ, kron_all([np.diag([1, 0])] * 4), pauli_dense("ZIII"))
    assert abs(exact_path_expectation(pruned, rho, E, "heisenberg") - truth) < 1e-10
    assert plan(pruned, rho, E, .1, .1, "heisenberg").M_B <= plan(circ, rho, E, .1, .1, "heisenberg").M_B


def test_pruning_keeps_non_trace_preserving_layers():
    with pytest.warns(UserWarning, match="not CPTP"):
        leak = channel_to_superop(kraus=[np.diag([1.0, 0.5])], support=(1,), label="leak")
    circ = Circuit(2, 2, [leak])
    E = pauli_observable("ZI")
    assert light_cone_layers(circ, E) == [0]
    unital = Circuit(2, 2, [depolarizing(0.5).to_superop((1,))])
    assert light_cone_layers(unital, E) == []


def test_apply_local_superop_matches_embedding(rng):
    op = channel_to_superop(unitary=np.linalg.qr(rng.normal(size=(4, 4)))[0], support=(2, 0))
    rho = rng.normal(size=(8, 8))
    full = embed_superop(op, (0, 1, 2))
    out1 = apply_local_superop(rho, op.dense, op.support, 2, 3)
    out2 = (full.dense @ rho.reshape(-1)).reshape(8, 8)
    assert np.abs(out1 - out2).max() < 1e-12


def test_input_validation():
    circ = Circuit(2, 2, [depolarizing(0.9).to_superop((0,))])
    with pytest.raises(ValueError):
        estimate(circ, computational_state([0]), pauli_observable("Z"), 0.1, 0.1)
    with pytest.raises(ValueError):
        estimate(circ, computational_state([0, 0], basis=Basis.COMPUTATIONAL), pauli_observable("ZZ"), 0.1, 0.1)


# ---------------------------------------------------------------------------
# Lindblad sampler
# ---------------------------------------------------------------------------
def dephasing_layer(t=0.5):
    return LindbladLayer(lindbladian_superop(jumps=[np.sqrt(0.5) * pauli_matrix("Z")]), t)


def plus_state():
    return state_to_weyl([np.full((2, 2), 0.5)])


def test_lindblad_forced_counts_reproduce_powers():
    layer = dephasing_layer()
    L = layer.generator.dense
    rho = np.full((2, 2), 0.5)
    X = pauli_matrix("X")
    for q in (0, 1, 2):
        est, var = estimate_lindblad([layer], plus_state(), pauli_observable("X"), samples=100_000,
                                     forced_q=[q], seed=q)
        exact = np.trace(X @ (np.linalg.matrix_power(L, q) @ rho.reshape(-1)).reshape(2, 2))
        assert abs(est.mean - exact) < 5 * est.stderr


def test_lindblad_estimate_and_variance_bound():
    layer = dephasing_layer()
    truth = np.trace(pauli_matrix("X") @ (scipy.linalg.expm(0.5 * layer.generator.dense)
                                          @ np.full(4, 0.5)).reshape(2, 2))
    est, var = estimate_lindblad([layer], plus_state(), pauli_observable("X"), samples=50_000, seed=2)
    assert abs(est.mean - truth) < 4 * est.stderr
    assert var <= lindblad_variance_bound([layer], plus_state(), pauli_observable("X"))


def test_lindblad_rescale_warning():
    gen = lindbladian_superop(H=3 * pauli_matrix("X"))
    with pytest.warns(UserWarning, match="rescaling"):
        layer = LindbladLayer(gen, 0.2)
    assert layer.norm == pytest.approx(1.0)
    assert layer.t == pytest.approx(0.2 * gen.l1_to_l1_norm())
    with pytest.raises(ValueError):
        LindbladLayer(dephasing_layer().generator, -1.0)
